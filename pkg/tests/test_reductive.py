import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homroll.errors import SingularSplit
from homroll.matcore import mat_exp
from homroll.reductive import (CANONICAL_FIRST, CANONICAL_SECOND, AlphaMap, ReductiveSpace,
                               alpha_apply, alpha_operator, orthogonal_complement,
                               parallel_transport, project_h, project_m, validate_space)
from homroll.spaces import make_sphere, make_stiefel, make_symmetric_pair, make_so_n, trace_form


@pytest.fixture(scope="module")
def s3():
    # so(4) split as so(3) (lower block) + its complement
    return make_sphere(4).space


def test_projection_idempotent_and_kernel(s3, rng):
    x_m = s3.m_to_g(rng.standard_normal(s3.dim_m))
    x_h = s3.h_to_g(rng.standard_normal(s3.dim_h))
    assert np.abs(project_m(x_m, s3) - x_m).max() <= 1e-12
    assert np.abs(project_m(x_h, s3)).max() <= 1e-12


def test_projection_direct_sum(s3, rng):
    x = rng.standard_normal(s3.group.dim)
    assert np.abs(project_m(x, s3) + project_h(x, s3) - x).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projector_algebra(seed):
    sp = make_stiefel(4, 2, 1.0).space
    x = np.random.default_rng(seed).standard_normal(sp.group.dim)
    pm, ph = project_m(x, sp), project_h(x, sp)
    assert np.abs(project_m(pm, sp) - pm).max() <= 1e-12
    assert np.abs(project_h(ph, sp) - ph).max() <= 1e-12
    assert np.abs(project_m(ph, sp)).max() <= 1e-12
    assert np.abs(pm + ph - x).max() <= 1e-12


def test_Ad_h_commutes_with_projection(st42, rng):
    sp = st42.space
    x = rng.standard_normal(sp.group.dim)
    for h in sp.h_samples:
        A = sp.group.Ad_matrix(h)
        assert np.abs(A @ project_m(x, sp) - project_m(A @ x, sp)).max() <= 1e-8


def test_singular_split_rejected(so3):
    with pytest.raises(SingularSplit):
        ReductiveSpace(so3, [[1.0, 0, 0]], [[1.0, 0, 0], [0, 1, 0]], trace_form(so3))
    with pytest.raises(SingularSplit):
        ReductiveSpace(so3, [[1.0, 0, 0]], [[0, 1.0, 0]], trace_form(so3))


def test_alpha_second_kind_vanishes(st42, rng):
    X, Y = rng.standard_normal((2, st42.dim))
    assert np.array_equal(alpha_apply(CANONICAL_SECOND, X, Y, st42.space), np.zeros(st42.dim))


def test_alpha_first_kind_antisymmetric(st42, rng):
    X = rng.standard_normal(st42.dim)
    assert np.abs(alpha_apply(CANONICAL_FIRST, X, X, st42.space)).max() <= 1e-15


def test_alpha_first_kind_is_half_projected_bracket(st42, rng):
    sp = st42.space
    X, Y = rng.standard_normal((2, sp.dim_m))
    br = sp.group.bracket_coords(sp.m_to_g(X), sp.m_to_g(Y))
    assert np.abs(alpha_apply(CANONICAL_FIRST, X, Y, sp) - 0.5 * sp.to_m(br)).max() <= 1e-14


def test_alpha_first_kind_vanishes_on_symmetric_pair(so3):
    sp = make_symmetric_pair(so3)
    I = np.eye(sp.dim_m)
    worst = max(np.abs(alpha_apply(CANONICAL_FIRST, a, b, sp)).max() for a in I for b in I)
    assert worst <= 1e-15


def test_alpha_operator_zero_and_consistency(st42, rng):
    sp = st42.space
    assert np.array_equal(alpha_operator(CANONICAL_FIRST, np.zeros(sp.dim_m), sp),
                          np.zeros((sp.dim_m, sp.dim_m)))
    X, Y = rng.standard_normal((2, sp.dim_m))
    lhs = alpha_operator(CANONICAL_FIRST, X, sp) @ Y
    assert np.abs(lhs - alpha_apply(CANONICAL_FIRST, X, Y, sp)).max() <= 1e-12


@pytest.mark.parametrize("alpha_param", [0.5, 1.0, 3.0, -2.0, -0.5])
def test_alpha_operator_skew_adjoint_on_naturally_reductive(alpha_param, rng):
    sp = make_stiefel(4, 2, alpha_param).space
    G = sp.m_gram
    for _ in range(10):
        A = alpha_operator(CANONICAL_FIRST, rng.standard_normal(sp.dim_m), sp)
        assert np.linalg.norm(G @ A + A.T @ G) <= 1e-9
    assert sp.is_metric(CANONICAL_FIRST)


def test_custom_alpha_table(st42, rng):
    sp = st42.space
    T = rng.standard_normal((sp.dim_m,) * 3)
    X, Y = rng.standard_normal((2, sp.dim_m))
    alpha = AlphaMap.custom(T)
    assert np.allclose(alpha_apply(alpha, X, Y, sp), np.einsum("i,j,ijk->k", X, Y, T))
    with pytest.raises(ValueError):
        alpha_apply(AlphaMap.custom(np.zeros((2, 2, 2))), X, Y, sp)
    assert not validate_space(sp, alpha).ok


def test_alpha_parse():
    assert AlphaMap.parse("canonical_first") is CANONICAL_FIRST
    assert AlphaMap.parse("canonical_second") is CANONICAL_SECOND


def test_transport_second_kind_is_constant(st42, rng):
    z0 = rng.standard_normal(st42.dim)
    x = lambda t: np.sin(t) * np.ones(st42.dim)
    assert np.array_equal(parallel_transport(CANONICAL_SECOND, x, z0, 0.0, 1.0, 50, st42.space), z0)


def test_transport_zero_curve(st42, rng):
    z0 = rng.standard_normal(st42.dim)
    zero = lambda t: np.zeros(st42.dim)
    assert np.array_equal(parallel_transport(CANONICAL_FIRST, zero, z0, 0.0, 1.0, 50, st42.space), z0)


def test_transport_constant_curve_matches_exponential(st42, rng):
    sp = st42.space
    X0, z0 = rng.standard_normal((2, sp.dim_m))
    z = parallel_transport(CANONICAL_FIRST, lambda t: X0, z0, 0.2, 1.4, 200, sp)
    ref = mat_exp(-1.2 * alpha_operator(CANONICAL_FIRST, X0, sp)) @ z0
    assert np.abs(z - ref).max() <= 1e-8


def test_transport_preserves_metric(st42, rng):
    sp = st42.space
    z0 = rng.standard_normal(sp.dim_m)
    x = lambda t: np.cos(3 * t) * np.arange(1.0, sp.dim_m + 1) + np.sin(t)
    sol = parallel_transport(CANONICAL_FIRST, x, z0, 0.0, 2.0, 400, sp, full=True)
    norms = np.einsum("ni,ij,nj->n", sol.states, sp.m_gram, sol.states)
    assert np.abs(norms - norms[0]).max() <= 1e-8


def test_transport_linear(st42, rng):
    sp = st42.space
    z0, w0 = rng.standard_normal((2, sp.dim_m))
    x = lambda t: np.array([np.cos(t), t, 1.0, -t * t, 0.5])
    T = lambda z: parallel_transport(CANONICAL_FIRST, x, z, 0.0, 1.0, 100, sp)
    assert np.abs(T(z0 + w0) - T(z0) - T(w0)).max() <= 1e-10


def test_validate_trivial_h(so3_space):
    rep = validate_space(so3_space)
    assert rep.ok
    assert rep["h_subalgebra"].residual == 0.0
    assert rep.as_dict()["ok"] is True


def test_validate_stiefel(st42):
    assert validate_space(st42.space).ok
    assert validate_space(st42.space, CANONICAL_SECOND).ok


def test_validate_detects_corrupted_m_basis(s3):
    good = s3
    h = good.h_coords.copy()
    m = good.m_coords.copy()
    h[0], m[0] = good.m_coords[0], good.h_coords[0]
    bad = ReductiveSpace(good.group, h, m, good.scalar_product, h_samples=good.h_samples)
    rep = validate_space(bad)
    assert not rep["reductivity"].passed
    assert not rep.ok


def test_orthogonal_complement_is_orthogonal(st42):
    sp = st42.space
    m = orthogonal_complement(sp.h_coords, sp.scalar_product)
    assert np.abs(sp.h_coords @ sp.scalar_product @ m.T).max() <= 1e-12
    assert np.allclose(np.abs(np.diag(m @ sp.scalar_product @ m.T)), 1.0)


def test_reductive_space_metric_flag(so3):
    sp = make_symmetric_pair(so3)
    assert sp.metric_definite
    assert sp.is_metric(CANONICAL_FIRST) and sp.is_metric(CANONICAL_SECOND)
