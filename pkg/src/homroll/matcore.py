"""Dense linear algebra, matrix exponential, RK4 stepping and Simpson quadrature.

Matrices are plain ``numpy.ndarray`` objects of dtype float64; ``as_matrix``
is the validating constructor used at module boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonSquare, OddPanels

__all__ = [
    "as_matrix",
    "mat_exp",
    "rk4_step",
    "integrate_fixed",
    "quad_simpson",
    "SteppedSolution",
    "polar_factor",
]


def as_matrix(a, rows=None, cols=None) -> np.ndarray:
    """Return ``a`` as a finite 2-D float array, optionally checking its shape."""
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows or cols is not None and m.shape[1] != cols:
        raise ValueError(f"expected shape ({rows}, {cols}), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has non-finite entries")
    return m


# Pade coefficients b_0..b_m for the [m/m] approximant of exp, and the
# 1-norm bounds below which that order reaches double precision.
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = ((3, 1.495585217958292e-2), (5, 2.539398330063230e-1),
          (7, 9.504178996162932e-1), (9, 2.097847961257068e0))
_THETA13 = 5.371920351148152e0


def _pade_uv(A, m):
    b = _PADE[m]
    n = A.shape[0]
    ident = np.eye(n)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    powers = [ident, A2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ A2)
    U = sum(b[2 * j + 1] * powers[j] for j in range((m + 1) // 2))
    V = sum(b[2 * j] * powers[j] for j in range((m + 1) // 2))
    return A @ U, V


def mat_exp(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a Pade core.

    The Pade order and the number of squarings are selected from the
    1-norm of ``A`` (orders 3, 5, 7, 9, 13).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSquare(f"mat_exp needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("mat_exp input has non-finite entries")
    norm1 = np.linalg.norm(A, 1) if A.size else 0.0
    for m, theta in _THETA:
        if norm1 <= theta:
            U, V = _pade_uv(A, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13))))
    U, V = _pade_uv(A / 2.0 ** s, 13)
    F = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        F = F @ F
    return F


def polar_factor(M) -> np.ndarray:
    """Orthogonal factor ``U`` of ``M = U P`` (nearest orthogonal matrix in Frobenius norm)."""
    W, _, Vt = np.linalg.svd(M)
    return W @ Vt


@dataclass(frozen=True)
class SteppedSolution:
    """States of a fixed-step integration on a uniform time grid."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states) or len(self.times) < 2:
            raise ValueError("need at least two samples with matching times/states")
        dt = np.diff(self.times)
        if np.any(dt <= 0):
            raise ValueError("times must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-12 * max(1.0, abs(dt[0])) * len(dt):
            raise ValueError("time grid is not uniform")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _checked(vec):
    vec = np.asarray(vec, dtype=float)
    if not np.all(np.isfinite(vec)):
        raise NonFinite("right-hand side returned non-finite values")
    return vec


def rk4_step(f, t, y, h):
    """One classical Runge-Kutta step of size ``h`` for ``y' = f(t, y)``."""
    y = np.asarray(y, dtype=float)
    # overflow is reported through NonFinite rather than as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = _checked(f(t, y))
        k2 = _checked(f(t + 0.5 * h, y + 0.5 * h * k1))
        k3 = _checked(f(t + 0.5 * h, y + 0.5 * h * k2))
        k4 = _checked(f(t + h, y + h * k3))
        return _checked(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def integrate_fixed(f, t0, t1, y0, steps) -> SteppedSolution:
    if not t1 > t0:
        raise ValueError("integrate_fixed needs t1 > t0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    times = np.linspace(t0, t1, steps + 1)
    y = np.asarray(y0, dtype=float)
    states = np.empty((steps + 1,) + y.shape)
    states[0] = y
    for i in range(steps):
        y = rk4_step(f, times[i], y, times[i + 1] - times[i])
        states[i + 1] = y
    return SteppedSolution(times, states)


def quad_simpson(f, t0, t1, panels):
    """Composite Simpson rule for a (possibly vector valued) integrand."""
    if panels < 2 or panels % 2:
        raise OddPanels(f"Simpson needs a positive even panel count, got {panels}")
    s = np.linspace(t0, t1, panels + 1)
    vals = np.array([np.asarray(f(si), dtype=float) for si in s])
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = (t1 - t0) / panels
    return (h / 3.0) * np.tensordot(w, vals, axes=1)
