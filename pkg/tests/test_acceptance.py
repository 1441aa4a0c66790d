"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured figure and
the tolerance it is held to. Run ``python3 tests/test_acceptance.py`` for the
lines alone.
"""
import contextlib
import io
import json
import sys
import tempfile
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from homroll.cli import main as cli_main
from homroll.errors import BadAlpha
from homroll.reductive import CANONICAL_FIRST, CANONICAL_SECOND, alpha_operator, project_m
from homroll.rolling import (ControlCurve, closed_form_can1, integrate_rolling, kinematic_residual,
                             lie_group_rolling, symmetric_pair_rolling, verify_no_slip,
                             verify_no_twist)
from homroll.spaces import (make_group_as_reductive, make_so_n, make_stiefel, stiefel_project_m)

ALPHAS = {"canonical_first": CANONICAL_FIRST, "canonical_second": CANONICAL_SECOND}


def report(number, title, passed, detail, capsys=None):
    line = f"criterion {number} {title}: {'PASS' if passed else 'FAIL'} ({detail})"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return passed


def random_xi(rng, dim, max_norm=2.0):
    w = rng.standard_normal(dim)
    return rng.uniform(0.1, max_norm) * w / np.linalg.norm(w)


def skew(rng, n):
    A = rng.standard_normal((n, n))
    return (A - A.T) / 2.0


@lru_cache(maxsize=None)
def spaces():
    """The three test spaces keyed by label, as reductive spaces."""
    return {
        "SO(3)/{e}": make_group_as_reductive(make_so_n(3)),
        "St(3,1)": make_stiefel(3, 1, 1.0).space,
        "St(4,2)": make_stiefel(4, 2, 1.0).space,
    }


def smooth_samples(dim, seed, n=1001):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, dim))
    a, b = 0.5 * a / np.linalg.norm(a), 0.5 * b / np.linalg.norm(b)
    w = rng.uniform(0.5, 2.0, dim)
    ts = np.linspace(0.0, 1.0, n)
    return ControlCurve.sampled(ts, [a * np.cos(w * t) + b * np.sin(2 * t) for t in ts])


def controls(space, derivative, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(space.dim_m)
    return {
        "constant": ControlCurve.constant(c / np.linalg.norm(c)),
        "sampled": smooth_samples(space.dim_m, seed + 1),
        "special": ControlCurve.special(space, random_xi(rng, space.group.dim), ALPHAS[derivative]),
    }


@lru_cache(maxsize=None)
def rolling_matrix():
    """All integrated trajectories of the 3 x 2 x 3 test matrix at steps=1000."""
    out = {}
    for i, (name, sp) in enumerate(spaces().items()):
        for der, alpha in ALPHAS.items():
            for kind, u in controls(sp, der, 100 + 7 * i).items():
                traj = integrate_rolling(alpha, sp, u, steps=1000)
                out[(name, der, kind)] = (sp, alpha, traj)
    return out


# ---------------------------------------------------------------------------

def criterion_1():
    """Closed-form S solves the frame equation (finite differences) on St(4,2)."""
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    h = 1e-4
    grid = np.linspace(0.0, 1.0, 51)
    worst = 0.0
    for a in (0.5, 1.0, 3.0):
        sp = make_stiefel(4, 2, a).space
        for _ in range(20):
            xi = random_xi(rng, sp.group.dim)
            u = ControlCurve.special(sp, xi)
            S = lambda t: closed_form_can1(sp, xi, t, quad_panels=2).S   # v is not examined
            for t in grid:
                if t == 0.0:
                    fd = (-3 * S(0.0) + 4 * S(h) - S(2 * h)) / (2 * h)
                elif t == 1.0:
                    fd = (3 * S(1.0) - 4 * S(1.0 - h) + S(1.0 - 2 * h)) / (2 * h)
                else:
                    fd = (S(t + h) - S(t - h)) / (2 * h)
                St = S(t)
                res = np.linalg.norm(fd + alpha_operator(CANONICAL_FIRST, St @ u(t), sp) @ St)
                worst = max(worst, res)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed <= 10.0
    return ok, f"max residual {worst:.2e} <= 1e-06, {elapsed:.1f} s <= 10 s"


def _compare(space_cfg, xi, steps, derivative, tmp):
    cfg = {"space": space_cfg, "derivative": derivative, "steps": steps,
           "control": {"type": "special", "xi": list(map(float, xi))}}
    path = Path(tmp) / f"cfg_{steps}_{derivative}.json"
    path.write_text(json.dumps(cfg))
    out = Path(tmp) / f"out_{steps}_{derivative}"
    with contextlib.redirect_stdout(io.StringIO()):
        code = cli_main(["compare", "--config", str(path), "--out", str(out)])
    rep = json.loads((out / "compare.json").read_text())
    return code, rep["max_deviation"]


def criterion_2():
    """Closed form against the integrator through the compare command; RK4 order."""
    start = time.perf_counter()
    cfgs = {
        "SO(3)/{e}": {"type": "so_n", "n": 3},
        "St(3,1)": {"type": "stiefel", "n": 3, "k": 1, "alpha_param": 1.0},
        "St(4,2)": {"type": "stiefel", "n": 4, "k": 2, "alpha_param": 1.0},
    }
    rng = np.random.default_rng(2)
    worst_rel, worst_ratio, ok = 0.0, np.inf, True
    with tempfile.TemporaryDirectory() as tmp:
        for name, cfg in cfgs.items():
            dim = spaces()[name].group.dim
            xi = random_xi(rng, dim)
            xi = 1.5 * xi / np.linalg.norm(xi)
            for der in ALPHAS:
                sub = Path(tmp) / f"{name.replace('/', '_')}_{der}"
                sub.mkdir()
                code, fine = _compare(cfg, xi, 1000, der, sub)
                _, coarse = _compare(cfg, xi, 100, der, sub)
                tol = 1e-5 * (1 + np.linalg.norm(xi))
                worst_rel = max(worst_rel, fine / tol)
                ratio = coarse / max(fine, np.finfo(float).tiny)
                worst_ratio = min(worst_ratio, ratio)
                ok &= code == 0 and fine <= tol and ratio >= 1e3 / 4
    elapsed = time.perf_counter() - start
    ok = ok and elapsed <= 30.0
    return ok, (f"max deviation/tolerance {worst_rel:.2e} <= 1, min ratio(100 vs 1000 steps) "
                f"{worst_ratio:.0f} >= 250, {elapsed:.1f} s <= 30 s")


def criterion_3():
    """No-slip and no-twist over 3 spaces x 2 derivatives x 3 controls."""
    start = time.perf_counter()
    slip = twist = 0.0
    for (name, der, kind), (sp, alpha, traj) in rolling_matrix().items():
        slip = max(slip, verify_no_slip(traj, sp))
        twist = max(twist, verify_no_twist(traj, sp, alpha, probes=np.eye(sp.dim_m)))
    elapsed = time.perf_counter() - start
    ok = slip <= 1e-5 and twist <= 1e-5 and elapsed <= 60.0
    return ok, (f"{len(rolling_matrix())} trajectories, no-slip {slip:.2e}, no-twist {twist:.2e} "
                f"<= 1e-05, {elapsed:.1f} s <= 60 s")


def criterion_4():
    """Orthogonality of S and group membership of g along the test matrix."""
    post = pre = gdrift = 0.0
    for (_, _, _), (sp, alpha, traj) in rolling_matrix().items():
        d = traj.diagnostics
        assert d["S_corrected"] == (sp.is_metric(alpha) and sp.metric_definite)
        if sp.is_metric(alpha):
            post = max(post, d["S_drift_post"].max())
            pre = max(pre, d["S_drift_pre"].max())
        gdrift = max(gdrift, d["g_drift_post"].max())
    ok = post <= 1e-8 and pre <= 1e-5 and gdrift <= 1e-9
    return ok, (f"S drift post {post:.2e} <= 1e-08, pre {pre:.2e} <= 1e-05, "
                f"g drift {gdrift:.2e} <= 1e-09")


def criterion_5():
    """Closed-form Stiefel projector against the generic one; natural reductivity."""
    rng = np.random.default_rng(5)
    proj = nat = 0.0
    for a in (0.5, 1.0, 3.0, -2.0, -0.5):
        st = make_stiefel(4, 2, a)
        sp = st.space
        for _ in range(100):
            Om, eta = skew(rng, 4), skew(rng, 2)
            P_Om, P_eta = stiefel_project_m(st, Om, eta)
            G_Om, G_eta = st.coords_to_pair(project_m(st.pair_to_coords(Om, eta), sp))
            proj = max(proj, np.abs(P_Om - G_Om).max(), np.abs(P_eta - G_eta).max())
            X, Y, Z = rng.standard_normal((3, sp.dim_m))
            br = lambda p, q: sp.to_m(sp.group.bracket_coords(sp.m_to_g(p), sp.m_to_g(q)))
            nat = max(nat, abs(sp.m_inner(br(X, Y), Z) - sp.m_inner(X, br(Y, Z))))
    ok = proj <= 1e-9 and nat <= 1e-9
    return ok, f"projector difference {proj:.2e} <= 1e-09, natural reductivity {nat:.2e} <= 1e-09"


def criterion_6():
    """Lie-group rolling via g = k W^-1 on SO(4)."""
    G = make_so_n(4)
    gs = make_group_as_reductive(G)
    rng = np.random.default_rng(6)
    g0 = G.exp(rng.standard_normal(G.dim))
    X0 = rng.standard_normal(G.dim)
    traj = lie_group_rolling(gs, ControlCurve.constant(X0), g0=g0, steps=1000)
    fact = np.abs(traj.g[-1] - g0 @ G.exp(X0)).max()
    kin = 0.0
    for seed in range(3):
        t = lie_group_rolling(gs, smooth_samples(G.dim, 60 + seed, n=20001), steps=1000)
        kin = max(kin, max(kinematic_residual(t, gs, CANONICAL_FIRST).values()))
    ok = fact <= 1e-8 and kin <= 1e-6
    return ok, f"factorization error {fact:.2e} <= 1e-08, kinematic residual {kin:.2e} <= 1e-06"


def criterion_7():
    """(G x G)/diag G rolling pushed to G against the direct rolling of G = SO(3)."""
    G = make_so_n(3)
    worst = 0.0
    for seed in range(3):
        u = smooth_samples(3, 70 + seed)
        pair, grp = symmetric_pair_rolling(G, u, steps=1000)
        worst = max(worst, pair.diagnostics["relation_residual"])
    return worst <= 1e-8, f"relation residual {worst:.2e} <= 1e-08"


def criterion_8():
    """Degenerate alpha-metric parameters are rejected."""
    rejected = []
    for a in (0.0, -1.0):
        try:
            make_stiefel(4, 2, a)
        except BadAlpha:
            rejected.append(a)
    return rejected == [0.0, -1.0], f"BadAlpha raised for alpha in {rejected}"


CRITERIA = [
    (1, "closed-form frame equation", criterion_1),
    (2, "closed form vs integrator", criterion_2),
    (3, "no-slip / no-twist", criterion_3),
    (4, "structure preservation", criterion_4),
    (5, "Stiefel projector identity", criterion_5),
    (6, "Lie-group factorization", criterion_6),
    (7, "symmetric-pair equivalence", criterion_7),
    (8, "degenerate alpha rejection", criterion_8),
]


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, capsys):
    passed, detail = fn()
    report(number, title, passed, detail, capsys)
    assert passed, detail


if __name__ == "__main__":
    results = [report(n, title, *fn()) for n, title, fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
