"""Command-line front end: ``homroll roll|closed-form|compare|validate --config FILE``.

The config is one JSON document::

    {
      "space": {"type": "stiefel", "n": 4, "k": 2, "alpha_param": 1.0},
      "derivative": "canonical_first",
      "control": {"type": "special", "xi": [...]},
      "t1": 1.0, "steps": 1000, "output": "out", "seed": 0
    }

``space.type`` is one of ``so_n``, ``lie_group``, ``symmetric_pair`` (each
with ``n``) or ``stiefel`` (``n``, ``k``, ``alpha_param``). ``control.type``
is ``constant`` (``value``: m-coordinates), ``sampled`` (``path``: CSV with
header ``t,u_0,..``, relative to the config file) or ``special`` (``xi``:
algebra coordinates, or ``xi1``/``xi2`` skew matrices for Stiefel spaces).

Exit codes: 0 pass, 1 threshold violated, 2 bad config, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from .constants import TOL
from .errors import (ConfigError, HomrollError, NonFinite, RelationViolated,
                     StateInvariantViolated)
from .reductive import AlphaMap, validate_space
from .rolling import (ControlCurve, closed_form_trajectory, integrate_rolling,
                      lie_group_rolling, max_deviation, verify_no_slip, verify_no_twist)
from .spaces import make_group_as_reductive, make_so_n, make_stiefel, make_symmetric_pair

EXIT_OK, EXIT_THRESHOLD, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_THRESHOLDS = {
    "no_slip_residual": TOL.no_slip,
    "no_twist_residual": TOL.no_twist,
    "S_orthogonality_drift": TOL.S_orthogonality,
    "g_group_drift": TOL.g_group,
}


@dataclasses.dataclass
class Scenario:
    space_cfg: dict
    derivative: str
    control_cfg: dict
    t1: float
    steps: int
    output: Path
    seed: int
    base_dir: Path

    # built lazily so that `validate` does not need a control block
    def build_space(self):
        cfg = self.space_cfg
        kind = cfg.get("type")
        try:
            if kind in ("so_n", "lie_group", "symmetric_pair"):
                n = _int_field(cfg, "n", "space.n")
                G = make_so_n(n)
                if kind == "symmetric_pair":
                    return make_symmetric_pair(G, seed=self.seed), None
                return make_group_as_reductive(G, seed=self.seed), None
            if kind == "stiefel":
                st = make_stiefel(_int_field(cfg, "n", "space.n"), _int_field(cfg, "k", "space.k"),
                                  _float_field(cfg, "alpha_param", "space.alpha_param"),
                                  seed=self.seed)
                return st.space, st
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"space: {exc}") from exc
        raise ConfigError(f"space.type: unknown space type {kind!r}")

    @property
    def alpha(self):
        return AlphaMap.parse(self.derivative)


def _int_field(d, key, label):
    if key not in d:
        raise ConfigError(f"{label}: missing")
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{label}: expected an integer, got {val!r}")
    return val


def _float_field(d, key, label):
    if key not in d:
        raise ConfigError(f"{label}: missing")
    try:
        return float(d[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: expected a number, got {d[key]!r}") from exc


def load_scenario(path, out=None) -> Scenario:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict) or not isinstance(cfg.get("space"), dict):
        raise ConfigError("space: missing or not an object")
    derivative = cfg.get("derivative", "canonical_first")
    if derivative not in ("canonical_first", "canonical_second"):
        raise ConfigError(f"derivative: expected canonical_first or canonical_second, got {derivative!r}")
    steps = cfg.get("steps", 1000)
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise ConfigError(f"steps: must be an integer >= 1, got {steps!r}")
    t1 = _float_field(cfg, "t1", "t1") if "t1" in cfg else 1.0
    if not t1 > 0:
        raise ConfigError(f"t1: must be > 0, got {t1!r}")
    seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    control = cfg.get("control", {})
    if not isinstance(control, dict):
        raise ConfigError("control: expected an object")
    output = Path(out) if out is not None else Path(cfg.get("output", "out"))
    return Scenario(cfg["space"], derivative, control, t1, steps, output, seed,
                    path.resolve().parent)


def _vector(val, dim, label):
    try:
        arr = np.asarray(val, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: expected a list of numbers") from exc
    if arr.shape != (dim,):
        raise ConfigError(f"{label}: expected {dim} entries, got {arr.size}")
    return arr


def build_control(sc: Scenario, space, stiefel=None) -> ControlCurve:
    cfg = sc.control_cfg
    kind = cfg.get("type")
    if kind == "constant":
        return ControlCurve.constant(_vector(cfg.get("value"), space.dim_m, "control.value"), t1=sc.t1)
    if kind == "special":
        return ControlCurve.special(space, special_xi(sc, space, stiefel), sc.alpha, t1=sc.t1)
    if kind == "sampled":
        if "path" not in cfg:
            raise ConfigError("control.path: missing")
        p = Path(cfg["path"])
        p = p if p.is_absolute() else sc.base_dir / p
        if not p.exists():
            raise ConfigError(f"control.path: file {p} does not exist")
        data = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != space.dim_m + 1:
            raise ConfigError(f"control.path: expected {space.dim_m + 1} columns, got {data.shape[1]}")
        try:
            u = ControlCurve.sampled(data[:, 0], data[:, 1:])
        except ValueError as exc:
            raise ConfigError(f"control.path: {exc}") from exc
        if sc.t1 > u.t1 + 1e-12 or u.t0 > 0:
            raise ConfigError("control.path: samples must cover [0, t1]")
        return dataclasses.replace(u, t0=0.0, t1=sc.t1)
    raise ConfigError(f"control.type: unknown control type {kind!r}")


def special_xi(sc: Scenario, space, stiefel=None):
    cfg = sc.control_cfg
    if cfg.get("type") != "special":
        raise ConfigError("control.type: this command needs a special control")
    if "xi" in cfg:
        return _vector(cfg["xi"], space.group.dim, "control.xi")
    if stiefel is not None and "xi1" in cfg:
        xi1 = np.asarray(cfg["xi1"], dtype=float)
        xi2 = np.asarray(cfg.get("xi2", np.zeros((stiefel.k, stiefel.k))), dtype=float)
        return stiefel.pair_to_coords(xi1, xi2)
    raise ConfigError("control.xi: missing")


def _fmt(x):
    return format(float(x), ".17g")


def write_trajectory_csv(traj, path, with_gamma=True):
    """Write one row per sample: ``t, v, g (row-major), S (row-major)[, gamma]``."""
    N = len(traj)
    dm, n = traj.v.shape[1], traj.g.shape[1]
    cols = (["t"] + [f"v_{i}" for i in range(dm)]
            + [f"g_{i}{j}" for i in range(n) for j in range(n)]
            + [f"S_{i}{j}" for i in range(dm) for j in range(dm)])
    blocks = [traj.times[:, None], traj.v, traj.g.reshape(N, -1), traj.S.reshape(N, -1)]
    if with_gamma:
        r, c = traj.development.shape[1:]
        cols += [f"gamma_{i}{j}" for i in range(r) for j in range(c)]
        blocks.append(traj.development.reshape(N, -1))
    table = np.hstack(blocks)
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in table:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def read_trajectory_csv(path):
    """Header list and the ``(N, columns)`` array of a trajectory file."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_roll(sc: Scenario):
    space, stiefel = sc.build_space()
    u = build_control(sc, space, stiefel)
    start = time.perf_counter()
    if sc.space_cfg["type"] == "lie_group" and sc.derivative == "canonical_first":
        traj = lie_group_rolling(space, u, steps=sc.steps)
        s_drift = float(traj.diagnostics["S_drift_post"].max())
        gated_S = True
    else:
        traj = integrate_rolling(sc.alpha, space, u, steps=sc.steps)
        s_drift = float(traj.diagnostics["S_drift_post"].max())
        gated_S = bool(traj.diagnostics["S_corrected"]) or space.is_metric(sc.alpha)
    residuals = {
        "no_slip_residual": verify_no_slip(traj, space) if len(traj) >= 3 else 0.0,
        "no_twist_residual": verify_no_twist(traj, space, sc.alpha) if len(traj) >= 3 else 0.0,
        "S_orthogonality_drift": s_drift,
        "g_group_drift": float(traj.diagnostics["g_drift_post"].max()),
    }
    wall = time.perf_counter() - start
    failed = [k for k, v in residuals.items()
              if v > DEFAULT_THRESHOLDS[k] and (k != "S_orthogonality_drift" or gated_S)]
    report = dict(residuals, wall_time=wall, thresholds=DEFAULT_THRESHOLDS,
                  failed=failed, passed=not failed, space=space.name, steps=sc.steps)
    sc.output.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, sc.output / "trajectory.csv")
    _write_json(report, sc.output / "report.json")
    for k, v in residuals.items():
        print(f"{k:24s} {v:.3e}  (threshold {DEFAULT_THRESHOLDS[k]:.0e})")
    return EXIT_OK if not failed else EXIT_THRESHOLD


def cmd_closed_form(sc: Scenario):
    space, stiefel = sc.build_space()
    xi = special_xi(sc, space, stiefel)
    traj = closed_form_trajectory(space, xi, sc.alpha, t1=sc.t1, steps=sc.steps)
    sc.output.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, sc.output / "closed_form.csv")
    print(f"wrote {len(traj)} samples to {sc.output / 'closed_form.csv'}")
    return EXIT_OK


def cmd_compare(sc: Scenario):
    space, stiefel = sc.build_space()
    xi = special_xi(sc, space, stiefel)
    start = time.perf_counter()
    exact = closed_form_trajectory(space, xi, sc.alpha, t1=sc.t1, steps=sc.steps)
    numeric = integrate_rolling(sc.alpha, space, ControlCurve.special(space, xi, sc.alpha, sc.t1),
                                steps=sc.steps)
    dev, at = max_deviation(exact, numeric)
    threshold = TOL.compare_rel * (1.0 + float(np.linalg.norm(xi)))
    report = {"max_deviation": dev, "time_of_max": at, "threshold": threshold,
              "passed": dev <= threshold, "steps": sc.steps, "space": space.name,
              "wall_time": time.perf_counter() - start}
    sc.output.mkdir(parents=True, exist_ok=True)
    _write_json(report, sc.output / "compare.json")
    print(f"max deviation {dev:.3e} at t={at:.6g} (threshold {threshold:.3e})")
    return EXIT_OK if dev <= threshold else EXIT_THRESHOLD


def cmd_validate(sc: Scenario):
    space, _ = sc.build_space()
    report = validate_space(space, sc.alpha)
    for c in report.checks:
        print(f"{'ok  ' if c.passed else 'FAIL'} {c.name:24s} {c.residual:.3e}  (tol {c.tol:.0e})")
    sc.output.mkdir(parents=True, exist_ok=True)
    _write_json(report.as_dict(), sc.output / "validate.json")
    return EXIT_OK if report.ok else EXIT_THRESHOLD


COMMANDS = {
    "roll": cmd_roll,
    "closed-form": cmd_closed_form,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="homroll", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output directory (overrides config.output)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config, args.out)
        return COMMANDS[args.command](sc)
    except (NonFinite, StateInvariantViolated, RelationViolated) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, HomrollError, ValueError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
