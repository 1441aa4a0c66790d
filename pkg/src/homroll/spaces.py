"""Concrete groups and homogeneous spaces.

* ``SO(n)`` / ``O(n)`` with the basis ``E_ij = e_i e_j^T - e_j e_i^T`` (i < j)
* a matrix group ``G`` viewed as ``G/{e}``
* a connected ``G`` viewed as the symmetric space ``(G x G)/diag G``
* Stiefel manifolds ``St(n, k) = (O(n) x O(k))/H`` with alpha-metrics
"""
from __future__ import annotations

import numpy as np

from .errors import BadAlpha, BadBasePoint, NotSkew, NotTangent
from .lie import MatrixLieGroup, Retraction
from .reductive import Embedding, ReductiveSpace, _null_space, orthogonal_complement
from .rolling import CANONICAL_FIRST, RollingTrajectory, closed_form_trajectory

__all__ = [
    "so_basis",
    "make_so_n",
    "make_o_n",
    "trace_form",
    "make_group_as_reductive",
    "SymmetricPairSpace",
    "make_symmetric_pair",
    "StiefelAlphaSpace",
    "make_stiefel",
    "make_sphere",
    "stiefel_project_m",
    "stiefel_tangent_lift",
    "stiefel_special_rolling",
]


def so_basis(n):
    """Standard basis ``E_ij`` (i < j) of ``so(n)``, shape ``(n(n-1)/2, n, n)``."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j], E[j, i] = 1.0, -1.0
            out.append(E)
    return np.array(out).reshape(-1, n, n)


def make_so_n(n) -> MatrixLieGroup:
    if n < 2:
        raise ValueError("SO(n) needs n >= 2")
    return MatrixLieGroup(f"SO({n})", so_basis(n), Retraction.POLAR_ORTHOGONAL)


def make_o_n(n) -> MatrixLieGroup:
    if n < 2:
        raise ValueError("O(n) needs n >= 2")
    return MatrixLieGroup(f"O({n})", so_basis(n), Retraction.POLAR_ORTHOGONAL)


def trace_form(group: MatrixLieGroup) -> np.ndarray:
    """Gram matrix of ``-tr(XY)`` in the algebra basis of ``group``."""
    return -np.einsum("iab,jba->ij", group.basis, group.basis)


def _group_embedding():
    return Embedding(into_ambient=lambda g: np.asarray(g, dtype=float),
                     tangent_push=lambda g, Y: np.asarray(g) @ Y)


def make_group_as_reductive(G: MatrixLieGroup, seed=0) -> ReductiveSpace:
    """``G/{e}``: ``h = 0``, ``m = g`` with the algebra basis, scalar product ``-tr(XY)``."""
    return ReductiveSpace(G, np.zeros((0, G.dim)), np.eye(G.dim), trace_form(G),
                          embedding=_group_embedding(), name=f"{G.name}/{{e}}", seed=seed)


class SymmetricPairSpace(ReductiveSpace):
    """``(G x G)/diag G`` realized with block-diagonal ``2n x 2n`` matrices.

    ``h`` has basis ``(E_i, E_i)`` and ``m`` has basis ``(E_i, -E_i)``; the
    embedding is ``phi(g1, g2) = g1 g2^{-1}`` into ``G``.
    """

    def __init__(self, factor: MatrixLieGroup, seed=0):
        n, d = factor.n, factor.dim
        basis = np.zeros((2 * d, 2 * n, 2 * n))
        basis[:d, :n, :n] = factor.basis
        basis[d:, n:, n:] = factor.basis
        group = MatrixLieGroup(f"{factor.name}x{factor.name}", basis, factor.retraction)
        eye = np.eye(d)
        h = np.hstack([eye, eye])
        m = np.hstack([eye, -eye])
        self.factor = factor

        def into(g):
            return g[:n, :n] @ np.linalg.inv(g[n:, n:])

        def push(g, Y):
            g1, g2inv = g[:n, :n], np.linalg.inv(g[n:, n:])
            return g1 @ Y[:n, :n] @ g2inv - g1 @ Y[n:, n:] @ g2inv

        super().__init__(group, h, m, trace_form(group), embedding=Embedding(into, push),
                         name=f"({factor.name}x{factor.name})/diag", seed=seed)

    def phi_bar(self, g1, g2):
        return np.asarray(g1) @ np.linalg.inv(g2)

    def m_pair_of(self, X):
        """Inverse of ``T phi`` on ``m`` at the identity: ``X -> (X/2, -X/2)``."""
        X = np.asarray(X, dtype=float)
        n = self.factor.n
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n], out[n:, n:] = 0.5 * X, -0.5 * X
        return out


def make_symmetric_pair(G: MatrixLieGroup, seed=0) -> SymmetricPairSpace:
    return SymmetricPairSpace(G, seed=seed)


class StiefelAlphaSpace:
    """Stiefel manifold ``St(n, k)`` as ``(O(n) x O(k))/Stab(X0)`` with an alpha-metric.

    The group is realized block-diagonally in ``(n+k) x (n+k)`` matrices;
    ``space`` is the underlying :class:`ReductiveSpace` with ``m = h^perp``.
    """

    def __init__(self, n, k, alpha_param, X0=None, seed=0):
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
        alpha_param = float(alpha_param)
        if alpha_param == 0.0 or alpha_param == -1.0:
            raise BadAlpha(f"alpha-metric undefined for alpha = {alpha_param:g}")
        X0 = np.eye(n, k) if X0 is None else np.asarray(X0, dtype=float)
        if X0.shape != (n, k) or np.linalg.norm(X0.T @ X0 - np.eye(k)) > 1e-12:
            raise BadBasePoint("base point must be an n x k matrix with X0^T X0 = I")
        self.n, self.k, self.alpha_param, self.X0 = n, k, alpha_param, X0

        bn, bk = so_basis(n), so_basis(k)
        self.dn, self.dk = len(bn), len(bk)
        basis = np.zeros((self.dn + self.dk, n + k, n + k))
        basis[:self.dn, :n, :n] = bn
        if self.dk:
            basis[self.dn:, n:, n:] = bk
        self.group = MatrixLieGroup(f"O({n})xO({k})", basis, Retraction.POLAR_ORTHOGONAL)
        sp = np.zeros((self.group.dim, self.group.dim))
        sp[:self.dn, :self.dn] = -np.einsum("iab,jba->ij", bn, bn)
        if self.dk:
            sp[self.dn:, self.dn:] = -np.einsum("iab,jba->ij", bk, bk) / alpha_param
        self.scalar_product = sp

        # h = ker of (Omega, eta) -> Omega X0 - X0 eta
        cols = [self._push_identity(E).ravel() for E in basis]
        h = _null_space(np.array(cols).T)
        m = orthogonal_complement(h, sp)
        emb = Embedding(self.into_ambient, self.tangent_push)
        self.space = ReductiveSpace(self.group, h, m, sp, embedding=emb,
                                    name=f"St({n},{k}) alpha={alpha_param:g}", seed=seed)

    def __repr__(self):
        return f"StiefelAlphaSpace(n={self.n}, k={self.k}, alpha={self.alpha_param:g})"

    @property
    def dim(self):
        return self.space.dim_m

    def blocks(self, M):
        n = self.n
        return M[:n, :n], M[n:, n:]

    def pair_to_matrix(self, Omega, eta):
        n, k = self.n, self.k
        out = np.zeros((n + k, n + k))
        out[:n, :n], out[n:, n:] = Omega, eta
        return out

    def pair_to_coords(self, Omega, eta):
        return self.group.coords(self.pair_to_matrix(Omega, eta))

    def coords_to_pair(self, c):
        return self.blocks(self.group.from_coords(c))

    def _push_identity(self, Y):
        Omega, eta = self.blocks(Y)
        return Omega @ self.X0 - self.X0 @ eta

    def into_ambient(self, g):
        R, theta = self.blocks(np.asarray(g, dtype=float))
        return R @ self.X0 @ theta.T

    def tangent_push(self, g, Y):
        R, theta = self.blocks(np.asarray(g, dtype=float))
        return R @ self._push_identity(Y) @ theta.T


def make_stiefel(n, k, alpha_param, X0=None, seed=0) -> StiefelAlphaSpace:
    return StiefelAlphaSpace(n, k, alpha_param, X0=X0, seed=seed)


def make_sphere(n, X0=None) -> StiefelAlphaSpace:
    """Unit sphere ``S^{n-1} = St(n, 1)``; the alpha parameter is immaterial since ``so(1) = 0``."""
    return StiefelAlphaSpace(n, 1, 1.0, X0=None if X0 is None else np.reshape(X0, (n, 1)))


def _require_skew(A, name):
    A = np.asarray(A, dtype=float)
    if np.linalg.norm(A + A.T) > 1e-10 * max(1.0, np.linalg.norm(A)):
        raise NotSkew(f"{name} is not skew-symmetric")
    return A


def stiefel_project_m(sp: StiefelAlphaSpace, Omega, eta):
    """Orthogonal projection of ``(Omega, eta)`` onto ``m`` in closed form."""
    Omega = _require_skew(Omega, "Omega")
    eta = _require_skew(eta, "eta")
    a = sp.alpha_param
    X = sp.X0
    P = X @ X.T
    Om = (P @ Omega + Omega @ P - (2 * a + 1) / (a + 1) * P @ Omega @ P
          - X @ eta @ X.T / (a + 1))
    et = a / (a + 1) * (eta - X.T @ Omega @ X)
    return Om, et


def stiefel_tangent_lift(sp: StiefelAlphaSpace, V):
    """Element of ``m`` pushed to the tangent vector ``V`` at ``X0``."""
    V = np.asarray(V, dtype=float)
    X = sp.X0
    if np.linalg.norm(X.T @ V + V.T @ X) > 1e-10 * max(1.0, np.linalg.norm(V)):
        raise NotTangent("V is not tangent to the Stiefel manifold at X0")
    a = sp.alpha_param
    Om = V @ X.T - X @ V.T + (2 * a + 1) / (a + 1) * X @ V.T @ X @ X.T
    et = -a / (a + 1) * X.T @ V
    return Om, et


def stiefel_special_rolling(sp: StiefelAlphaSpace, xi1, xi2, t1=1.0, samples=100,
                            quad_panels=8) -> RollingTrajectory:
    """Closed-form rolling along ``gamma(t) = exp(t xi1) X0 exp(-t xi2)``.

    The returned trajectory carries the embedded development curve. Its
    diagnostics hold the rolling curve ``V(t) = v1(t) X0 - X0 v2(t)`` in
    ``T_X0 St(n, k)`` (``"rolling_curve_embedded"``) and its velocity
    ``u1(t) X0 - X0 u2(t)`` (``"rolling_velocity_embedded"``).
    """
    xi1 = _require_skew(xi1, "xi1")
    xi2 = _require_skew(xi2, "xi2")
    xi = sp.pair_to_coords(xi1, xi2)
    traj = closed_form_trajectory(sp.space, xi, CANONICAL_FIRST, t1=t1, steps=samples,
                                  quad_panels=quad_panels)
    for key, vals in (("rolling_curve_embedded", traj.v), ("rolling_velocity_embedded", traj.u)):
        traj.diagnostics[key] = np.array([sp.space.tangent_push(np.eye(sp.n + sp.k),
                                                                 sp.space.m_to_mat(c))
                                          for c in vals])
    return traj
