"""Matrix Lie groups described by an explicit basis of their Lie algebra.

Algebra elements are carried twice: as ambient ``n x n`` matrices and as
coordinate vectors in the group's algebra basis. Linear maps on the algebra
(``ad``, ``Ad``) are returned as ``dim x dim`` matrices in those coordinates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .constants import TOL
from .errors import NotClosed, TooFarFromGroup
from .matcore import mat_exp, polar_factor

__all__ = [
    "Retraction",
    "MatrixLieGroup",
    "AlgebraElement",
    "bracket",
    "Ad",
    "ad_operator",
    "retract_to_group",
]


class Retraction(enum.Enum):
    POLAR_ORTHOGONAL = "polar"
    NONE = "none"


class MatrixLieGroup:
    """A matrix Lie group ``G`` of ``n x n`` matrices with algebra basis ``basis``.

    :param name: label used in reports
    :param basis: array-like of shape ``(dim, n, n)`` spanning the Lie algebra
    :param retraction: how drifted matrices are pulled back onto ``G``
    :param membership_tol: tolerance of :meth:`is_member`
    """

    def __init__(self, name, basis, retraction=Retraction.POLAR_ORTHOGONAL,
                 membership_tol=TOL.membership):
        basis = np.array(basis, dtype=float)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError(f"basis must have shape (dim, n, n), got {basis.shape}")
        self.name = name
        self.basis = basis
        self.retraction = Retraction(retraction)
        self.membership_tol = membership_tol
        self.dim, self.n = basis.shape[0], basis.shape[1]

        B = basis.reshape(self.dim, -1).T
        gram = B.T @ B
        scale = np.sqrt(np.diag(gram))
        if np.any(scale == 0) or abs(np.linalg.det(gram / np.outer(scale, scale))) < TOL.basis_det:
            raise ValueError(f"{name}: algebra basis is linearly dependent")
        self._B = B
        self._pinv = np.linalg.solve(gram, B.T)
        # structure constants: _C[i, j] = coords([E_i, E_j])
        comm = np.einsum("iab,jbc->ijac", basis, basis)
        comm = comm - comm.transpose(1, 0, 2, 3)
        self._C = self.coords(comm.reshape(self.dim * self.dim, self.n, self.n)).reshape(
            self.dim, self.dim, self.dim)

        for E in basis:
            for t in (0.25, 0.5, 1.0):
                if not self.is_member(mat_exp(t * E)):
                    raise ValueError(f"{name}: exp of a basis element leaves the group")

    def __repr__(self):
        return f"MatrixLieGroup({self.name!r}, dim={self.dim}, n={self.n})"

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.n)

    def coords(self, mats, check=True) -> np.ndarray:
        """Basis coordinates of one matrix ``(n, n)`` or a stack ``(k, n, n)``.

        Raises :class:`NotClosed` when a matrix is not in the span of the basis;
        with ``check=False`` the least-squares coordinates are returned as is.
        """
        mats = np.asarray(mats, dtype=float)
        flat = mats.reshape(-1, self.n * self.n).T
        c = self._pinv @ flat
        if not check:
            return c.T.reshape(mats.shape[:-2] + (self.dim,))
        resid = np.linalg.norm(self._B @ c - flat, axis=0)
        bound = TOL.coord_residual * np.maximum(1.0, np.linalg.norm(flat, axis=0))
        if np.any(resid > bound):
            raise NotClosed(f"{self.name}: matrix outside the algebra span "
                            f"(residual {resid.max():.3e})")
        return c.T.reshape(mats.shape[:-2] + (self.dim,))

    def from_coords(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), self.basis, axes=(-1, 0))

    def element(self, c) -> "AlgebraElement":
        c = np.asarray(c, dtype=float)
        return AlgebraElement(self, self.from_coords(c), c)

    def exp(self, c) -> np.ndarray:
        return mat_exp(self.from_coords(c))

    def bracket_coords(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self._C)

    def ad_matrix(self, x) -> np.ndarray:
        """Matrix of ``Y -> [X, Y]`` in basis coordinates."""
        return np.einsum("i,ijk->kj", np.asarray(x, dtype=float), self._C)

    def Ad_matrix(self, g) -> np.ndarray:
        """Matrix of ``Y -> g Y g^{-1}`` in basis coordinates."""
        g = np.asarray(g, dtype=float)
        conj = g @ self.basis @ np.linalg.inv(g)
        return self.coords(conj).T

    def membership_residual(self, g) -> float:
        if self.retraction is Retraction.NONE:
            return 0.0
        g = np.asarray(g, dtype=float)
        return float(np.linalg.norm(g.T @ g - np.eye(self.n)))

    def is_member(self, g) -> bool:
        return self.membership_residual(g) <= self.membership_tol


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    group: MatrixLieGroup = field(repr=False)
    mat: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        if np.linalg.norm(self.group.from_coords(self.coords) - self.mat) > 1e-10 * max(
                1.0, np.linalg.norm(self.mat)):
            raise ValueError("coords and matrix of an algebra element disagree")

    @classmethod
    def from_matrix(cls, group, mat):
        mat = np.asarray(mat, dtype=float)
        return cls(group, mat, group.coords(mat))

    def __add__(self, other):
        return AlgebraElement(self.group, self.mat + other.mat, self.coords + other.coords)

    def __sub__(self, other):
        return AlgebraElement(self.group, self.mat - other.mat, self.coords - other.coords)

    def __mul__(self, s):
        return AlgebraElement(self.group, s * self.mat, s * self.coords)

    __rmul__ = __mul__


def _same_group(*elems):
    g = elems[0].group
    if any(e.group is not g for e in elems[1:]):
        raise ValueError("algebra elements belong to different groups")
    return g


def bracket(X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    """Matrix commutator ``XY - YX``; coordinates re-extracted as a closure check."""
    _same_group(X, Y)
    return AlgebraElement.from_matrix(X.group, X.mat @ Y.mat - Y.mat @ X.mat)


def Ad(g, X: AlgebraElement) -> AlgebraElement:
    g = np.asarray(g, dtype=float)
    return AlgebraElement.from_matrix(X.group, g @ X.mat @ np.linalg.inv(g))


def ad_operator(X: AlgebraElement) -> np.ndarray:
    return X.group.ad_matrix(X.coords)


def retract_to_group(g_raw, group: MatrixLieGroup) -> np.ndarray:
    """Pull a drifted matrix back onto ``group``.

    For orthogonal groups this is the polar factor of ``g_raw``.
    """
    g_raw = np.asarray(g_raw, dtype=float)
    if group.retraction is Retraction.NONE:
        return g_raw
    drift = np.linalg.norm(g_raw.T @ g_raw - np.eye(group.n))
    if drift > TOL.retract_max:
        raise TooFarFromGroup(f"matrix is {drift:.3e} away from {group.name}")
    return polar_factor(g_raw)
