import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from foldplate.spaces import (
    DofMap,
    SolutionField,
    evaluate_field,
    interpolate,
    inverse_map_derivatives,
    lagrange_nodes,
    physical_shape,
    reference_basis,
)
from conftest import mesh_at


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_reference_basis_is_nodal(k):
    basis = reference_basis(k)
    np.testing.assert_allclose(basis.eval(basis.nodes), np.eye(basis.size), atol=1e-12)
    assert basis.size == (k + 1) * (k + 2) // 2


@pytest.mark.parametrize("k", [2, 3])
def test_partition_of_unity_and_derivative_sums(k, rng):
    basis = reference_basis(k)
    pts = rng.dirichlet([1, 1, 1], 7)[:, 1:]
    np.testing.assert_allclose(basis.eval(pts).sum(axis=1), 1.0, atol=1e-13)
    for order in (1, 2, 3):
        assert np.max(np.abs(basis.eval(pts, order).sum(axis=1))) < 1e-10


@pytest.mark.parametrize("k", [2, 3])
def test_reference_derivatives_match_finite_differences(k, rng):
    basis = reference_basis(k)
    p = rng.dirichlet([1, 1, 1])[1:]
    step = 1e-6
    for order in (1, 2, 3):
        exact = basis.eval(p, order)[0]
        lower = lambda q: basis.eval(q, order - 1)[0]
        for b in range(2):
            dp = np.zeros(2)
            dp[b] = step
            fd = (lower(p + dp) - lower(p - dp)) / (2 * step)
            np.testing.assert_allclose(exact[(Ellipsis, b)], fd, atol=1e-6 * max(1, np.abs(exact).max()))


def test_lagrange_node_ordering():
    nodes = lagrange_nodes(3)
    np.testing.assert_allclose(nodes[:3], [[0, 0], [1, 0], [0, 1]])
    np.testing.assert_allclose(nodes[3:5], [[1 / 3, 0], [2 / 3, 0]])
    np.testing.assert_allclose(nodes[9], [1 / 3, 1 / 3])


def test_dofmap_layout():
    dm = DofMap(5, 2)
    assert dm.local_size == 6 and dm.n_dofs == 30
    np.testing.assert_array_equal(dm.element_dofs(2), np.arange(12, 18))
    assert dm.element_dofs([0, 4]).shape == (2, 6)


def _fd_check(mesh, e, k, ref_point, step_rel=1e-5):
    """Relative errors of the physical gradient, Hessian and third derivative vs FD."""
    x0 = mesh.map_derivatives(e, ref_point, 0)["point"]
    h = mesh.h_max()
    step = step_rel * h
    shape = physical_shape(mesh, e, ref_point, k)
    errs = {}

    def at(x):
        ref = mesh._invert(e, x)
        return physical_shape(mesh, e, ref, k)

    for name, lower, upper in (("gradient", "value", "gradient"), ("hessian", "gradient", "hessian"), ("third", "hessian", "third")):
        fd = np.empty_like(shape[upper])
        for b in range(2):
            dx = np.zeros(2)
            dx[b] = step
            fd[(Ellipsis, b)] = (at(x0 + dx)[lower] - at(x0 - dx)[lower]) / (2 * step)
        errs[name] = np.max(np.abs(fd - shape[upper])) / np.max(np.abs(shape[upper]))
    return errs


@pytest.mark.parametrize("case,k", [("pwquadratic", 2), ("quadratic", 2), ("pwquadratic", 3), ("quadratic", 3)])
def test_chain_rule_matches_finite_differences_on_curved_elements(case, k, rng):
    mesh = mesh_at(case, 0, k)
    curved = np.flatnonzero(mesh.curved)
    assert len(curved)
    for e in curved[:4]:
        ref = rng.dirichlet([2, 2, 2])[1:]
        errs = _fd_check(mesh, int(e), k, ref)
        assert errs["gradient"] <= 1e-5, errs
        assert errs["hessian"] <= 1e-5, errs
        assert errs["third"] <= 1e-5, errs


def test_curved_elements_have_nonzero_map_curvature():
    mesh = mesh_at("quadratic", 0)
    e = int(np.flatnonzero(mesh.curved)[0])
    assert np.abs(mesh.map_derivatives(e, [0.3, 0.3])["H"]).max() > 1e-3


@settings(max_examples=30, deadline=None)
@given(
    A=arrays(np.float64, (2, 2), elements=st.floats(-0.3, 0.3)),
    H=arrays(np.float64, (2, 2, 2), elements=st.floats(-0.2, 0.2)),
    p=arrays(np.float64, 2, elements=st.floats(-0.2, 0.2)),
)
def test_inverse_map_derivatives_property(A, H, p):
    """G2 and G3 from the identity psi(psi^{-1}(x)) = x, checked against FD of K."""
    H = 0.5 * (H + H.transpose(0, 2, 1))
    J0 = np.eye(2) + A

    def jac(q):
        return J0 + np.einsum("abc,c->ab", H, q)

    K, G2, G3 = inverse_map_derivatives(jac(p), H)
    np.testing.assert_allclose(K @ jac(p), np.eye(2), atol=1e-12)
    # d K / d x_j = (d K / d xhat_c) (K)_{cj}; d K/d xhat = -K (dJ/d xhat) K
    step = 1e-6
    dK_dxhat = np.empty((2, 2, 2))
    for c in range(2):
        dq = np.zeros(2)
        dq[c] = step
        dK_dxhat[..., c] = (np.linalg.inv(jac(p + dq)) - np.linalg.inv(jac(p - dq))) / (2 * step)
    fdG2 = np.einsum("bic,cj->bij", dK_dxhat, K)
    np.testing.assert_allclose(G2, fdG2, atol=1e-7)
    assert np.allclose(G2, G2.transpose(0, 2, 1), atol=1e-13)
    assert np.allclose(G3, np.moveaxis(G3, 1, 3), atol=1e-12)


def test_interpolation_reproduces_polynomials_on_affine_mesh():
    mesh = mesh_at("nofold", 1)
    poly = lambda X: 1 + X[:, 0] - 2 * X[:, 1] + X[:, 0] ** 2 - 3 * X[:, 0] * X[:, 1] + 0.5 * X[:, 1] ** 2
    field = interpolate(mesh, 2, poly)
    rng = np.random.default_rng(0)
    for e in rng.choice(mesh.n_elements, 5, replace=False):
        ref = rng.dirichlet([1, 1, 1])[1:]
        x = mesh.map_derivatives(e, ref, 0)["point"]
        res = evaluate_field(field, e, ref)
        assert np.isclose(res["value"], poly(x[None])[0], atol=1e-13)
        np.testing.assert_allclose(res["hessian"], [[2, -3], [-3, 1]], atol=1e-10)


def test_isoparametric_interpolation_matches_nodal_values_on_curved_mesh():
    # curved maps of degree 2 keep quadratics only approximately; nodal values stay exact
    mesh = mesh_at("quadratic", 0)
    field = interpolate(mesh, 2, lambda X: X[:, 0] ** 2)
    e = int(np.flatnonzero(mesh.curved)[0])
    for node in lagrange_nodes(2):
        x = mesh.map_derivatives(e, node, 0)["point"]
        assert np.isclose(evaluate_field(field, e, node)["value"], x[0] ** 2, atol=1e-14)


def test_solution_field_checks_size():
    mesh = mesh_at("nofold", 0)
    with pytest.raises(ValueError):
        SolutionField(mesh, 2, np.zeros(10))
    field = SolutionField(mesh, 2, np.arange(192.0))
    assert field.element_coefficients().shape == (32, 6)
