"""Intrinsic rollings of m over G/H: kinematic equation, closed forms, verifiers.

A rolling is represented by its lifted curve ``(v, g, S)`` in
``m x G x GL(m)``: ``v`` is the rolling curve in m-coordinates, ``g`` a
horizontal lift of the development curve and ``S`` the frame map in
m-coordinates. For a control ``u`` the kinematic equation reads::

    v' = u,    S' = -alpha(S u, .) S,    g' = g (S u)

where ``S u`` is turned into an ambient algebra matrix for the last product.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import TOL
from .errors import NonFinite, RelationViolated, StateInvariantViolated, TooFarFromGroup
from .lie import AlgebraElement, retract_to_group
from .matcore import SteppedSolution, mat_exp, polar_factor, quad_simpson, rk4_step
from .reductive import (CANONICAL_FIRST, CANONICAL_SECOND, AlphaKind, AlphaMap,
                        ReductiveSpace, alpha_operator, parallel_transport)

__all__ = [
    "ControlCurve",
    "RollingState",
    "RollingTrajectory",
    "kinematic_rhs",
    "integrate_rolling",
    "closed_form_can1",
    "closed_form_can2",
    "closed_form_trajectory",
    "special_generator",
    "lie_group_rolling",
    "symmetric_pair_rolling",
    "verify_no_slip",
    "verify_no_twist",
    "horizontality_residual",
    "kinematic_residual",
    "max_deviation",
]


def _xi_coords(xi):
    if isinstance(xi, AlgebraElement):
        return np.asarray(xi.coords, dtype=float)
    return np.asarray(xi, dtype=float)


def special_generator(space: ReductiveSpace, xi, alpha: AlphaMap):
    """Generator ``K`` and ``xi_m`` with ``u(t) = exp(tK) xi_m`` for the special rolling.

    For the first canonical derivative ``K = pr_m ad(xi_h + xi_m / 2)`` on m,
    for the second one ``K = ad(xi_h)`` on m (so ``exp(tK) = Ad_exp(t xi_h)``).
    """
    x = _xi_coords(xi)
    xh, xm = space.split(x)
    xi_h = space.h_to_g(xh)
    if alpha.kind is AlphaKind.CANONICAL_FIRST:
        K = space.pr_m_ad(xi_h + 0.5 * space.m_to_g(xm))
    elif alpha.kind is AlphaKind.CANONICAL_SECOND:
        K = space.pr_m_ad(xi_h)
    else:
        raise ValueError("closed-form rollings exist only for the canonical derivatives")
    return K, xm


@dataclass(frozen=True, eq=False)
class ControlCurve:
    """Control ``u: [t0, t1] -> m`` in m-coordinates.

    Build with :meth:`constant`, :meth:`sampled` or :meth:`special`.
    """

    kind: str
    t0: float
    t1: float
    value: Optional[np.ndarray] = None
    samples: Optional[SteppedSolution] = field(default=None, repr=False)
    xi: Optional[np.ndarray] = None
    generator: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def constant(cls, value, t1=1.0, t0=0.0):
        return cls("constant", float(t0), float(t1), value=np.asarray(value, dtype=float))

    @classmethod
    def sampled(cls, times, values):
        sol = SteppedSolution(np.asarray(times, dtype=float), np.asarray(values, dtype=float))
        return cls("sampled", float(sol.times[0]), float(sol.times[-1]), samples=sol)

    @classmethod
    def special(cls, space: ReductiveSpace, xi, alpha: AlphaMap = CANONICAL_FIRST, t1=1.0):
        """Control whose rolling develops along ``pr(exp(t xi))``."""
        K, xm = special_generator(space, xi, alpha)
        return cls("special", 0.0, float(t1), value=xm, xi=_xi_coords(xi), generator=K)

    @property
    def dim(self):
        if self.kind == "sampled":
            return self.samples.states.shape[1]
        return self.value.shape[0]

    def __call__(self, t):
        if self.kind == "constant":
            return self.value
        if self.kind == "special":
            return mat_exp(t * self.generator) @ self.value
        ts, ys = self.samples.times, self.samples.states
        if t <= ts[0]:
            return ys[0]
        if t >= ts[-1]:
            return ys[-1]
        i = int(np.searchsorted(ts, t, side="right")) - 1
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return (1.0 - w) * ys[i] + w * ys[i + 1]


@dataclass(frozen=True)
class RollingState:
    t: float
    v: np.ndarray
    g: np.ndarray
    S: np.ndarray


@dataclass(eq=False)
class RollingTrajectory:
    """Sampled rolling on a uniform grid.

    Arrays are stacked along the first axis: ``v`` is ``(N, dim_m)``, ``g`` is
    ``(N, n, n)``, ``S`` is ``(N, dim_m, dim_m)``, ``u`` holds the control at
    the grid and ``development`` the embedded development curve.
    """

    times: np.ndarray
    v: np.ndarray
    g: np.ndarray
    S: np.ndarray
    u: np.ndarray
    development: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i) -> RollingState:
        return RollingState(float(self.times[i]), self.v[i], self.g[i], self.S[i])

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    @property
    def final(self) -> RollingState:
        return self.state(-1)


def _development(space, gs):
    return np.array([space.into_ambient(g) for g in gs])


def kinematic_rhs(alpha: AlphaMap, space: ReductiveSpace, t, state: RollingState, u):
    """Right-hand side ``(v', g', S')`` of the kinematic equation at ``state``."""
    uu = np.asarray(u(t) if callable(u) else u, dtype=float)
    x = state.S @ uu
    vdot = uu
    Sdot = -alpha_operator(alpha, x, space) @ state.S
    gdot = state.g @ space.m_to_mat(x)
    return vdot, gdot, Sdot


def _g_orthogonal_polar(S, chol):
    """Nearest ``S`` with ``S^T G S = G`` where ``G = L L^T``, via a G-orthonormal frame."""
    Lt = chol.T
    S_hat = Lt @ S @ np.linalg.inv(Lt)
    return np.linalg.solve(Lt, polar_factor(S_hat) @ Lt)


def _s_drift(S, G):
    return float(np.linalg.norm(S.T @ G @ S - G))


def integrate_rolling(alpha: AlphaMap, space: ReductiveSpace, u: ControlCurve,
                      initial: Optional[RollingState] = None, steps=1000) -> RollingTrajectory:
    """Integrate the kinematic equation with RK4 on ``[u.t0, u.t1]``.

    After every step ``g`` is retracted onto the group and, for a metric
    ``alpha`` on a Riemannian space, ``S`` is replaced by its G-orthogonal
    polar factor. Drifts before and after correction go to ``diagnostics``.
    The default initial state is ``(0, e, id)``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dm, n = space.dim_m, space.group.n
    if initial is None:
        initial = RollingState(u.t0, np.zeros(dm), space.group.identity, np.eye(dm))
    T = space.alpha_table(alpha)
    G = space.m_gram
    correct_S = space.is_metric(alpha) and space.metric_definite
    chol = np.linalg.cholesky(G) if correct_S else None

    def unpack(y):
        return y[:dm], y[dm:dm + n * n].reshape(n, n), y[dm + n * n:].reshape(dm, dm)

    def rhs(t, y):
        _, g, S = unpack(y)
        uu = u(t)
        x = S @ uu
        Sdot = -np.einsum("i,ijk->kj", x, T) @ S
        gdot = g @ space.m_to_mat(x)
        return np.concatenate([uu, gdot.ravel(), Sdot.ravel()])

    times = np.linspace(u.t0, u.t1, steps + 1)
    vs = np.empty((steps + 1, dm))
    gs = np.empty((steps + 1, n, n))
    Ss = np.empty((steps + 1, dm, dm))
    us = np.empty((steps + 1, dm))
    drift = {k: np.zeros(steps + 1) for k in
             ("g_drift_pre", "g_drift_post", "S_drift_pre", "S_drift_post")}
    vs[0], gs[0], Ss[0], us[0] = initial.v, initial.g, initial.S, u(times[0])
    drift["g_drift_pre"][0] = drift["g_drift_post"][0] = space.group.membership_residual(initial.g)
    drift["S_drift_pre"][0] = drift["S_drift_post"][0] = _s_drift(initial.S, G)
    det0 = np.linalg.det(initial.S)
    y = np.concatenate([initial.v, initial.g.ravel(), initial.S.ravel()])

    for i in range(steps):
        y = rk4_step(rhs, times[i], y, times[i + 1] - times[i])
        v, g, S = unpack(y)
        drift["g_drift_pre"][i + 1] = space.group.membership_residual(g)
        drift["S_drift_pre"][i + 1] = _s_drift(S, G)
        try:
            g = retract_to_group(g, space.group)
        except TooFarFromGroup as exc:
            # only a blow-up of the solution moves g that far within one step
            raise NonFinite(f"solution blew up near t={times[i + 1]:.6g}: {exc}") from exc
        if correct_S:
            S = _g_orthogonal_polar(S, chol)
        g_post = space.group.membership_residual(g)
        S_post = _s_drift(S, G)
        drift["g_drift_post"][i + 1] = g_post
        drift["S_drift_post"][i + 1] = S_post
        detS = np.linalg.det(S)
        if g_post > TOL.state_drift or (correct_S and S_post > TOL.state_drift):
            raise StateInvariantViolated(f"drift after correction at t={times[i + 1]:.6g}")
        if abs(detS) < TOL.min_det_S or np.sign(detS) != np.sign(det0):
            raise StateInvariantViolated(f"S degenerated at t={times[i + 1]:.6g}")
        vs[i + 1], gs[i + 1], Ss[i + 1], us[i + 1] = v, g, S, u(times[i + 1])
        y = np.concatenate([v, g.ravel(), S.ravel()])

    diag = {k: val for k, val in drift.items()}
    diag["S_corrected"] = correct_S
    return RollingTrajectory(times, vs, gs, Ss, us, _development(space, gs), diag)


def _special_state(space, xi, t, alpha, quad_panels):
    x = _xi_coords(xi)
    xh, xm = space.split(x)
    xi_h = space.h_to_g(xh)
    K, _ = special_generator(space, x, alpha)
    g = space.group.exp(t * x) @ space.group.exp(-t * xi_h)
    if t == 0:
        v = np.zeros(space.dim_m)
    else:
        v = quad_simpson(lambda s: mat_exp(s * K) @ xm, 0.0, t, quad_panels)
    if alpha.kind is AlphaKind.CANONICAL_FIRST:
        S = space.Ad_m(space.group.exp(t * xi_h)) @ mat_exp(-t * K)
    else:
        S = np.eye(space.dim_m)
    return RollingState(float(t), v, g, S)


def closed_form_can1(space: ReductiveSpace, xi, t, quad_panels=64) -> RollingState:
    """Rolling along ``pr(exp(t xi))`` for the canonical derivative of the first kind.

    ``g(t) = exp(t xi) exp(-t xi_h)``,
    ``S(t) = Ad_exp(t xi_h) exp(-t pr_m ad(xi_h + xi_m/2))`` and ``v(t)`` the
    Simpson integral of ``exp(s pr_m ad(xi_h + xi_m/2)) xi_m``.
    """
    if t < 0:
        raise ValueError("closed forms are evaluated for t >= 0")
    return _special_state(space, xi, t, CANONICAL_FIRST, quad_panels)


def closed_form_can2(space: ReductiveSpace, xi, t, quad_panels=64) -> RollingState:
    """Rolling along ``pr(exp(t xi))`` for the canonical derivative of the second kind (``S = id``)."""
    if t < 0:
        raise ValueError("closed forms are evaluated for t >= 0")
    return _special_state(space, xi, t, CANONICAL_SECOND, quad_panels)


def closed_form_trajectory(space: ReductiveSpace, xi, alpha: AlphaMap, t1=1.0, steps=1000,
                           quad_panels=8) -> RollingTrajectory:
    """Closed-form special rolling sampled on the uniform grid of ``steps`` intervals.

    ``v`` is accumulated interval by interval: on a uniform grid every
    increment is ``exp(t_i K) w`` with one shared Simpson integral ``w``.
    """
    x = _xi_coords(xi)
    xh, xm = space.split(x)
    xi_h = space.h_to_g(xh)
    K, _ = special_generator(space, x, alpha)
    times = np.linspace(0.0, t1, steps + 1)
    h = times[1] - times[0]
    w = quad_simpson(lambda s: mat_exp(s * K) @ xm, 0.0, h, quad_panels)
    dm = space.dim_m
    vs = np.zeros((steps + 1, dm))
    gs = np.empty((steps + 1, space.group.n, space.group.n))
    Ss = np.empty((steps + 1, dm, dm))
    us = np.empty((steps + 1, dm))
    for i, t in enumerate(times):
        E = mat_exp(t * K)
        us[i] = E @ xm
        if i < steps:
            vs[i + 1] = vs[i] + E @ w
        gs[i] = space.group.exp(t * x) @ space.group.exp(-t * xi_h)
        if alpha.kind is AlphaKind.CANONICAL_FIRST:
            Ss[i] = space.Ad_m(space.group.exp(t * xi_h)) @ mat_exp(-t * K)
        else:
            Ss[i] = np.eye(dm)
    return RollingTrajectory(times, vs, gs, Ss, us, _development(space, gs),
                             {"closed_form": True})


def lie_group_rolling(groupspace: ReductiveSpace, u: ControlCurve, g0=None, t1=None,
                      steps=1000) -> RollingTrajectory:
    """Rolling of g over G = G/{e} for the first canonical derivative via ``g = k W^{-1}``.

    ``k' = k u / 2`` with ``k(0) = g0`` and ``W' = -W u / 2`` with ``W(0) = e``;
    the frame is ``S = Ad_W``.
    """
    if groupspace.dim_h != 0:
        raise ValueError("lie_group_rolling needs a space with trivial h")
    grp = groupspace.group
    n, dm = grp.n, groupspace.dim_m
    g0 = grp.identity if g0 is None else np.asarray(g0, dtype=float)
    t1 = u.t1 if t1 is None else t1
    times = np.linspace(u.t0, t1, steps + 1)

    def rhs(t, y):
        uu = u(t)
        U = groupspace.m_to_mat(uu)
        k = y[dm:dm + n * n].reshape(n, n)
        W = y[dm + n * n:].reshape(n, n)
        return np.concatenate([uu, (0.5 * k @ U).ravel(), (-0.5 * W @ U).ravel()])

    vs = np.empty((steps + 1, dm))
    ks = np.empty((steps + 1, n, n))
    Ws = np.empty((steps + 1, n, n))
    vs[0], ks[0], Ws[0] = 0.0, g0, grp.identity
    y = np.concatenate([vs[0], g0.ravel(), grp.identity.ravel()])
    drift_pre = np.zeros(steps + 1)
    for i in range(steps):
        y = rk4_step(rhs, times[i], y, times[i + 1] - times[i])
        k = y[dm:dm + n * n].reshape(n, n)
        W = y[dm + n * n:].reshape(n, n)
        drift_pre[i + 1] = max(grp.membership_residual(k), grp.membership_residual(W))
        k, W = retract_to_group(k, grp), retract_to_group(W, grp)
        vs[i + 1], ks[i + 1], Ws[i + 1] = y[:dm], k, W
        y = np.concatenate([y[:dm], k.ravel(), W.ravel()])

    gs = np.array([k @ np.linalg.inv(W) for k, W in zip(ks, Ws)])
    Ss = np.array([groupspace.Ad_m(W) for W in Ws])
    us = np.array([u(t) for t in times])
    G = groupspace.m_gram
    diag = {
        "g_drift_pre": drift_pre,
        "g_drift_post": np.array([grp.membership_residual(g) for g in gs]),
        "S_drift_post": np.array([_s_drift(S, G) for S in Ss]),
        "k": ks,
        "W": Ws,
    }
    return RollingTrajectory(times, vs, gs, Ss, us, _development(groupspace, gs), diag)


def symmetric_pair_rolling(G_conn, u: ControlCurve, g0=None, t1=None, steps=1000):
    """Roll G as ``(G x G)/diag G`` and as ``G/{e}`` from one pair of lifts.

    Integrates ``g1' = g1 u / 2`` and ``g2' = -g2 u / 2``; returns the
    trajectory on ``(G x G)/diag G`` (rolling curve ``(v/2, -v/2)``, frame
    ``id``) and the induced trajectory on ``G`` (``g1 g2^{-1}``, frame
    ``Ad_g2``). Raises :class:`RelationViolated` when the two frames, pushed
    to ``G``, disagree on a basis vector by more than the tolerance.
    """
    from .spaces import make_group_as_reductive, make_symmetric_pair

    pair = make_symmetric_pair(G_conn)
    gspace = make_group_as_reductive(G_conn)
    n, d = G_conn.n, G_conn.dim
    g0 = G_conn.identity if g0 is None else np.asarray(g0, dtype=float)
    t1 = u.t1 if t1 is None else t1
    times = np.linspace(u.t0, t1, steps + 1)

    def rhs(t, y):
        uu = u(t)
        U = G_conn.from_coords(uu)
        g1 = y[d:d + n * n].reshape(n, n)
        g2 = y[d + n * n:].reshape(n, n)
        return np.concatenate([uu, (0.5 * g1 @ U).ravel(), (-0.5 * g2 @ U).ravel()])

    vs = np.empty((steps + 1, d))
    g1s = np.empty((steps + 1, n, n))
    g2s = np.empty((steps + 1, n, n))
    vs[0], g1s[0], g2s[0] = 0.0, g0, G_conn.identity
    y = np.concatenate([vs[0], g0.ravel(), G_conn.identity.ravel()])
    for i in range(steps):
        y = rk4_step(rhs, times[i], y, times[i + 1] - times[i])
        g1 = retract_to_group(y[d:d + n * n].reshape(n, n), G_conn)
        g2 = retract_to_group(y[d + n * n:].reshape(n, n), G_conn)
        vs[i + 1], g1s[i + 1], g2s[i + 1] = y[:d], g1, g2
        y = np.concatenate([y[:d], g1.ravel(), g2.ravel()])
    us = np.array([u(t) for t in times])

    pair_g = np.zeros((steps + 1, 2 * n, 2 * n))
    pair_g[:, :n, :n], pair_g[:, n:, n:] = g1s, g2s
    eye = np.broadcast_to(np.eye(d), (steps + 1, d, d)).copy()
    pair_traj = RollingTrajectory(times, 0.5 * vs, pair_g, eye, 0.5 * us,
                                  _development(pair, pair_g), {})
    gs = np.array([a @ np.linalg.inv(b) for a, b in zip(g1s, g2s)])
    Ss = np.array([gspace.Ad_m(b) for b in g2s])
    group_traj = RollingTrajectory(times, vs, gs, Ss, us, _development(gspace, gs), {})

    # q(t) Z on G against the pair frame applied to (Z/2, -Z/2), pushed through phi
    resid = 0.0
    for i in range(steps + 1):
        for z in np.eye(d):
            lhs = gspace.tangent_push(gs[i], gspace.m_to_mat(Ss[i] @ z))
            rhs_ = pair.tangent_push(pair_g[i], pair.m_to_mat(pair_traj.S[i] @ (0.5 * z)))
            resid = max(resid, float(np.linalg.norm(lhs - rhs_)))
    pair_traj.diagnostics["relation_residual"] = resid
    group_traj.diagnostics["relation_residual"] = resid
    group_traj.diagnostics["g_drift_post"] = np.array(
        [G_conn.membership_residual(g) for g in gs])
    if resid > TOL.symmetric_relation:
        raise RelationViolated(f"symmetric-pair relation residual {resid:.3e}")
    return pair_traj, group_traj


def _step(traj):
    dt = np.diff(traj.times)
    return float(dt[0])


def verify_no_slip(traj: RollingTrajectory, space: ReductiveSpace) -> float:
    """Max over interior grid points of ``|gamma'(t) - q(t) v'(t)|``.

    ``gamma'`` comes from central differences of the embedded development
    curve; ``q(t) Z`` is the push of ``g(t) (S(t) Z)`` into the embedding.
    """
    if len(traj) < 3:
        raise ValueError("no-slip check needs at least three samples")
    h = _step(traj)
    dev = traj.development
    worst = 0.0
    for i in range(1, len(traj) - 1):
        fd = (dev[i + 1] - dev[i - 1]) / (2.0 * h)
        push = space.tangent_push(traj.g[i], space.m_to_mat(traj.S[i] @ traj.u[i]))
        worst = max(worst, float(np.linalg.norm(fd - push)))
    return worst


def verify_no_twist(traj: RollingTrajectory, space: ReductiveSpace, alpha: AlphaMap,
                    probes=None) -> float:
    """Max deviation between transported frames and ``S(t) Z0`` over probe vectors.

    Each constant probe ``Z0`` is parallel along the rolling curve; its image
    ``S(t) Z0`` (horizontal-lift coordinates of ``q(t) Z0``) must solve
    ``z' = -alpha(S u, z)``. The transport is integrated independently with
    RK4 using ``x(t) = S(t) u(t)`` interpolated on the trajectory grid;
    with an even number of intervals the step is doubled so that every
    stage time lands on a grid point.
    """
    if len(traj) < 3:
        raise ValueError("no-twist check needs at least three samples")
    probes = np.eye(space.dim_m) if probes is None else np.atleast_2d(probes)
    x = np.einsum("nij,nj->ni", traj.S, traj.u)
    x_curve = ControlCurve.sampled(traj.times, x)
    intervals = len(traj) - 1
    stride = 2 if intervals % 2 == 0 else 1
    steps = intervals // stride
    worst = 0.0
    for Z0 in probes:
        sol = parallel_transport(alpha, x_curve, traj.S[0] @ Z0, traj.times[0],
                                 traj.times[-1], steps, space, full=True)
        target = traj.S[::stride] @ Z0
        worst = max(worst, float(np.abs(sol.states - target).max()))
    return worst


def horizontality_residual(traj: RollingTrajectory, space: ReductiveSpace) -> float:
    """Max norm of the h-part of ``g^{-1} g'`` with ``g'`` from central differences.

    The difference quotient is projected onto the algebra by least squares.
    """
    h = _step(traj)
    worst = 0.0
    for i in range(1, len(traj) - 1):
        gd = (traj.g[i + 1] - traj.g[i - 1]) / (2.0 * h)
        hc = space.to_h(space.group.coords(np.linalg.solve(traj.g[i], gd), check=False))
        if hc.size:
            worst = max(worst, float(np.linalg.norm(hc)))
    return worst


def kinematic_residual(traj: RollingTrajectory, space: ReductiveSpace, alpha: AlphaMap) -> dict:
    """Central-difference residuals of ``v``, ``g``, ``S`` against :func:`kinematic_rhs`."""
    h = _step(traj)
    out = {"v": 0.0, "g": 0.0, "S": 0.0}
    for i in range(1, len(traj) - 1):
        vd, gd, Sd = kinematic_rhs(alpha, space, traj.times[i], traj.state(i), traj.u[i])
        out["v"] = max(out["v"], float(np.linalg.norm((traj.v[i + 1] - traj.v[i - 1]) / (2 * h) - vd)))
        out["g"] = max(out["g"], float(np.linalg.norm((traj.g[i + 1] - traj.g[i - 1]) / (2 * h) - gd)))
        out["S"] = max(out["S"], float(np.linalg.norm((traj.S[i + 1] - traj.S[i - 1]) / (2 * h) - Sd)))
    return out


def max_deviation(a: RollingTrajectory, b: RollingTrajectory):
    """``(max deviation, time)`` between two trajectories on the same grid."""
    if len(a) != len(b) or np.max(np.abs(a.times - b.times)) > 1e-12:
        raise ValueError("trajectories live on different grids")
    dev = np.maximum.reduce([
        np.linalg.norm(a.v - b.v, axis=1),
        np.linalg.norm((a.g - b.g).reshape(len(a), -1), axis=1),
        np.linalg.norm((a.S - b.S).reshape(len(a), -1), axis=1),
    ])
    i = int(np.argmax(dev))
    return float(dev[i]), float(a.times[i])

