"""Reductive decompositions g = h + m, invariant covariant derivatives, transport.

A :class:`ReductiveSpace` stores the bases of ``h`` and ``m`` as rows of
coordinate vectors in the algebra basis of the ambient :class:`MatrixLieGroup`.
Vectors in ``m`` are handled in ``m``-coordinates (length ``dim_m``) and
linear maps on ``m`` as ``dim_m x dim_m`` matrices.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constants import TOL
from .errors import NotClosed, SingularSplit
from .lie import MatrixLieGroup
from .matcore import integrate_fixed

__all__ = [
    "Embedding",
    "ReductiveSpace",
    "AlphaKind",
    "AlphaMap",
    "CANONICAL_FIRST",
    "CANONICAL_SECOND",
    "orthogonal_complement",
    "project_m",
    "project_h",
    "alpha_apply",
    "alpha_operator",
    "parallel_transport",
    "Check",
    "ValidationReport",
    "validate_space",
]


@dataclass(frozen=True)
class Embedding:
    """Realization of ``G/H`` inside a matrix space.

    ``into_ambient(g)`` maps a group element to the point ``pr(g)``;
    ``tangent_push(g, Y)`` is ``d/ds into_ambient(g exp(sY))`` at ``s = 0``
    for an ambient algebra matrix ``Y``.
    """

    into_ambient: Callable[[np.ndarray], np.ndarray]
    tangent_push: Callable[[np.ndarray, np.ndarray], np.ndarray]


def _null_space(A, tol=TOL.null_space):
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return Vt[rank:]


def orthogonal_complement(h_coords, scalar_product, tol=1e-10):
    """Basis of ``h^perp`` under ``scalar_product`` by Gram-Schmidt.

    The algebra basis vectors are projected onto ``h^perp`` and then
    orthonormalized (``<e_i, e_i> = +-1``) with modified Gram-Schmidt.
    """
    P = np.asarray(scalar_product, dtype=float)
    d = P.shape[0]
    H = np.asarray(h_coords, dtype=float).reshape(-1, d)
    target = d - H.shape[0]
    if H.shape[0]:
        hg = H @ P @ H.T
        if abs(np.linalg.det(hg)) < 1e-12 * max(1.0, np.abs(hg).max()) ** H.shape[0]:
            raise SingularSplit("h is degenerate under the scalar product")
        # orthogonal projector onto h^perp along h
        proj = np.eye(d) - H.T @ np.linalg.solve(hg, H @ P)
        candidates = proj.T
    else:
        candidates = np.eye(d)

    basis = []
    signs = []
    for c in candidates:
        w = c.copy()
        for b, s in zip(basis, signs):
            w = w - s * (b @ P @ w) * b
        nrm2 = w @ P @ w
        if abs(nrm2) <= tol * max(1.0, c @ c):
            continue
        basis.append(w / np.sqrt(abs(nrm2)))
        signs.append(np.sign(nrm2))
        if len(basis) == target:
            break
    if len(basis) != target:
        # isotropic vectors defeated Gram-Schmidt; fall back to an eigen-basis
        raw = _null_space(H @ P) if H.shape[0] else np.eye(d)
        lam, Q = np.linalg.eigh(raw @ P @ raw.T)
        basis = list((Q / np.sqrt(np.abs(lam))).T @ raw)
    return np.array(basis).reshape(target, d)


class ReductiveSpace:
    """Reductive homogeneous space ``G/H`` with a fixed split ``g = h + m``.

    :param group: ambient matrix group ``G``
    :param h_coords: ``(dim_h, dim_g)`` coordinates of a basis of ``h``
    :param m_coords: ``(dim_m, dim_g)`` coordinates of a basis of ``m``
    :param scalar_product: symmetric ``(dim_g, dim_g)`` form in algebra coordinates
    :param h_samples: elements of ``H`` used for invariance spot checks; by
        default exponentials of 8 random unit vectors of ``h``
    :param embedding: optional :class:`Embedding` of ``G/H``
    """

    def __init__(self, group: MatrixLieGroup, h_coords, m_coords, scalar_product,
                 h_samples=None, embedding: Optional[Embedding] = None, name=None,
                 seed=0):
        d = group.dim
        self.group = group
        self.name = name or group.name
        self.h_coords = np.asarray(h_coords, dtype=float).reshape(-1, d)
        self.m_coords = np.asarray(m_coords, dtype=float).reshape(-1, d)
        self.scalar_product = np.asarray(scalar_product, dtype=float)
        self.embedding = embedding
        self.dim_h, self.dim_m = self.h_coords.shape[0], self.m_coords.shape[0]
        if self.dim_h + self.dim_m != d:
            raise SingularSplit(f"dim h + dim m = {self.dim_h + self.dim_m} != dim g = {d}")
        if self.scalar_product.shape != (d, d) or not np.allclose(
                self.scalar_product, self.scalar_product.T, atol=1e-12):
            raise ValueError("scalar product must be a symmetric dim_g x dim_g matrix")

        joint = np.vstack([self.h_coords, self.m_coords]).T
        if np.linalg.cond(joint) > 1e10:
            raise SingularSplit("h and m bases do not span g")
        self._split = np.linalg.inv(joint)
        self.m_gram = self.m_coords @ self.scalar_product @ self.m_coords.T
        if abs(np.linalg.det(self.m_gram)) < 1e-12 * max(1.0, np.abs(self.m_gram).max()) ** self.dim_m:
            raise SingularSplit("scalar product is degenerate on m")
        if self.dim_h:
            hg = self.h_coords @ self.scalar_product @ self.h_coords.T
            if abs(np.linalg.det(hg)) < 1e-12 * max(1.0, np.abs(hg).max()) ** self.dim_h:
                raise SingularSplit("scalar product is degenerate on h")
        eig = np.linalg.eigvalsh(self.m_gram)
        self.metric_definite = bool(np.all(eig > 0))

        if h_samples is None:
            h_samples = self._default_h_samples(seed)
        self.h_samples = [np.asarray(h, dtype=float) for h in h_samples]

        # m-coordinates of 1/2 pr_m [m_i, m_j]
        br = np.einsum("ia,jb,abk->ijk", self.m_coords, self.m_coords, group._C)
        self._half_bracket_m = 0.5 * self.to_m(br)

    def __repr__(self):
        return f"ReductiveSpace({self.name!r}, dim_h={self.dim_h}, dim_m={self.dim_m})"

    def _default_h_samples(self, seed, count=8):
        if self.dim_h == 0:
            return [self.group.identity]
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(count):
            w = rng.standard_normal(self.dim_h)
            x = (w / np.linalg.norm(w)) @ self.h_coords
            out.append(self.group.exp(x))
        return out

    # coordinate plumbing -------------------------------------------------
    def split(self, x):
        """``(h-coords, m-coords)`` of algebra coordinates ``x`` (last axis)."""
        c = np.asarray(x, dtype=float) @ self._split.T
        return c[..., :self.dim_h], c[..., self.dim_h:]

    def to_m(self, x):
        return self.split(x)[1]

    def to_h(self, x):
        return self.split(x)[0]

    def m_to_g(self, c):
        return np.asarray(c, dtype=float) @ self.m_coords

    def h_to_g(self, c):
        return np.asarray(c, dtype=float) @ self.h_coords

    def m_to_mat(self, c):
        return self.group.from_coords(self.m_to_g(c))

    def m_coords_of_matrix(self, mat):
        """m-coordinates of an ambient algebra matrix that lies in ``m``."""
        hc, mc = self.split(self.group.coords(mat))
        if np.linalg.norm(hc) > TOL.coord_residual * max(1.0, np.linalg.norm(mc)):
            raise NotClosed("matrix has a component in h")
        return mc

    def m_inner(self, a, b):
        return float(np.asarray(a) @ self.m_gram @ np.asarray(b))

    def pr_m_ad(self, x):
        """``pr_m o ad_x`` restricted to ``m`` for algebra coordinates ``x``."""
        return self.to_m((self.group.ad_matrix(x) @ self.m_coords.T).T).T

    def Ad_m(self, g):
        """``pr_m o Ad_g`` restricted to ``m``; equals ``Ad_g|m`` for ``g`` in ``H``."""
        return self.to_m((self.group.Ad_matrix(g) @ self.m_coords.T).T).T

    def into_ambient(self, g):
        if self.embedding is None:
            return np.asarray(g, dtype=float)
        return self.embedding.into_ambient(g)

    def tangent_push(self, g, Y):
        if self.embedding is None:
            return np.asarray(g) @ Y
        return self.embedding.tangent_push(g, Y)

    def alpha_table(self, alpha: "AlphaMap") -> np.ndarray:
        """Structure tensor ``T`` with ``alpha(X, Y) = T[i, j, :] X_i Y_j``."""
        if alpha.kind is AlphaKind.CANONICAL_FIRST:
            return self._half_bracket_m
        if alpha.kind is AlphaKind.CANONICAL_SECOND:
            return np.zeros((self.dim_m,) * 3)
        table = np.asarray(alpha.table, dtype=float)
        if table.shape != (self.dim_m,) * 3:
            raise ValueError(f"custom alpha table must have shape {(self.dim_m,) * 3}")
        return table

    def is_metric(self, alpha: "AlphaMap", tol=TOL.metric_skew) -> bool:
        """Whether every ``alpha(X, .)`` is skew-adjoint for the m-Gram matrix."""
        T = self.alpha_table(alpha)
        G = self.m_gram
        for i in range(self.dim_m):
            A = T[i].T
            if np.linalg.norm(G @ A + A.T @ G) > tol:
                return False
        return True


class AlphaKind(enum.Enum):
    CANONICAL_FIRST = "canonical_first"
    CANONICAL_SECOND = "canonical_second"
    CUSTOM = "custom"


@dataclass(frozen=True)
class AlphaMap:
    """Ad(H)-invariant bilinear map ``m x m -> m`` selecting a covariant derivative."""

    kind: AlphaKind
    table: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def custom(cls, table):
        return cls(AlphaKind.CUSTOM, np.asarray(table, dtype=float))

    @classmethod
    def parse(cls, name):
        return {"canonical_first": CANONICAL_FIRST,
                "canonical_second": CANONICAL_SECOND}[name]


CANONICAL_FIRST = AlphaMap(AlphaKind.CANONICAL_FIRST)
CANONICAL_SECOND = AlphaMap(AlphaKind.CANONICAL_SECOND)


def project_m(x, space: ReductiveSpace):
    """Projection of algebra coordinates onto ``m`` along ``h``."""
    return space.m_to_g(space.to_m(x))


def project_h(x, space: ReductiveSpace):
    return space.h_to_g(space.to_h(x))


def alpha_apply(alpha: AlphaMap, X, Y, space: ReductiveSpace):
    return np.einsum("i,j,ijk->k", X, Y, space.alpha_table(alpha))


def alpha_operator(alpha: AlphaMap, X, space: ReductiveSpace):
    """Matrix of ``Y -> alpha(X, Y)`` in m-coordinates."""
    return np.einsum("i,ijk->kj", np.asarray(X, dtype=float), space.alpha_table(alpha))


def parallel_transport(alpha: AlphaMap, x_curve, z0, t0, t1, steps, space: ReductiveSpace,
                       full=False):
    """Integrate ``z' = -alpha(x(t), z)`` from ``z(t0) = z0`` with RK4.

    ``x_curve(t)`` is the left-logarithmic derivative of the horizontal lift
    in m-coordinates. Returns ``z(t1)``, or the whole
    :class:`~homroll.matcore.SteppedSolution` when ``full`` is set.
    """
    T = space.alpha_table(alpha)

    def rhs(t, z):
        return -np.einsum("i,j,ijk->k", x_curve(t), z, T)

    sol = integrate_fixed(rhs, t0, t1, np.asarray(z0, dtype=float), steps)
    return sol if full else sol.final


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    tol: float


@dataclass
class ValidationReport:
    space: str
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {"space": self.space, "ok": self.ok,
                "checks": [{"name": c.name, "passed": c.passed,
                            "residual": c.residual, "tol": c.tol} for c in self.checks]}


def validate_space(space: ReductiveSpace, alpha: AlphaMap = CANONICAL_FIRST) -> ValidationReport:
    """Spot-check the reductive structure and the Ad(H)-invariance of ``alpha``."""
    checks = []

    def add(name, resid, tol):
        checks.append(Check(name, bool(resid <= tol), float(resid), tol))

    G = space.group
    joint = np.vstack([space.h_coords, space.m_coords])
    sv = np.linalg.svd(joint, compute_uv=False)
    add("joint_basis_condition", float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf, 1e10)

    resid = 0.0
    for a in space.h_coords:
        for b in space.h_coords:
            resid = max(resid, np.linalg.norm(space.to_m(G.bracket_coords(a, b))))
    add("h_subalgebra", resid, TOL.subalgebra)

    resid = 0.0
    Ad_m_samples = []
    for h in space.h_samples:
        image = (G.Ad_matrix(h) @ space.m_coords.T).T
        hc, mc = space.split(image)
        resid = max(resid, np.abs(hc).max() if hc.size else 0.0)
        Ad_m_samples.append(mc.T)
    add("reductivity", resid, TOL.reductivity)

    resid = 0.0
    for A in Ad_m_samples:
        resid = max(resid, np.linalg.norm(A.T @ space.m_gram @ A - space.m_gram))
    add("metric_invariance", resid, TOL.reductivity)

    gram_sv = np.linalg.svd(space.m_gram, compute_uv=False)
    add("m_gram_condition", float(gram_sv[0] / gram_sv[-1]), 1e12)

    T = space.alpha_table(alpha)
    resid = 0.0
    for A in Ad_m_samples:
        lhs = np.einsum("ijk,lk->ijl", T, A)                  # Ad_h alpha(e_i, e_j)
        rhs = np.einsum("ai,bj,abk->ijk", A, A, T)            # alpha(Ad_h e_i, Ad_h e_j)
        resid = max(resid, np.abs(lhs - rhs).max())
    add("alpha_invariance", resid, TOL.alpha_invariance)
    return ValidationReport(space.name, checks)
