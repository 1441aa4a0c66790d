"""Numerical tolerances used across the package.

Every threshold lives here so tests and the CLI read from one place.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    coord_residual: float = 1e-9        # least-squares closure of basis coordinates
    basis_det: float = 1e-12            # normalized Gram determinant of a basis
    null_space: float = 1e-10           # singular values below this count as zero
    membership: float = 1e-9            # ||g^T g - I||_F for orthogonal groups
    retract_max: float = 0.5            # refuse polar retraction beyond this drift
    subalgebra: float = 1e-9            # [h, h] in h
    reductivity: float = 1e-8           # Ad_h(m) in m
    alpha_invariance: float = 1e-8
    metric_skew: float = 1e-9
    min_det_S: float = 1e-8
    state_drift: float = 1e-6           # post-correction drift that aborts integration
    # CLI report thresholds
    no_slip: float = 1e-5
    no_twist: float = 1e-5
    S_orthogonality: float = 1e-8
    g_group: float = 1e-9
    compare_rel: float = 1e-5
    symmetric_relation: float = 1e-8


TOL = Tolerances()
