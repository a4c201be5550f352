import numpy as np
import pytest
from hypothesis import given

import oracles
from conftest import random_orthogonal
from strategies import bracket_and_matrix, brackets
from nilmoment import lie_core as lc
from nilmoment import moment as mm
from nilmoment.errors import NonOrthonormalBasis, ZeroVector


def test_heisenberg_moment():
    m = mm.moment_bracket(lc.heisenberg())
    assert np.max(np.abs(m - np.diag([-4.0, -4.0, 4.0]))) <= 1e-12
    assert np.allclose(mm.moment_projective(lc.heisenberg()), np.diag([-2.0, -2.0, 2.0]), atol=1e-12)


def test_zero_bracket_moment():
    assert not np.any(mm.moment_bracket(lc.abelian(4)))
    with pytest.raises(ZeroVector):
        mm.moment_projective(lc.abelian(4))


@given(brackets())
def test_moment_matches_ad_matrix_oracle(mu):
    assert np.allclose(mm.moment_bracket(mu), oracles.moment(mu.coeffs), atol=1e-10)


@given(brackets())
def test_moment_is_symmetric_and_quadratic(mu):
    m = mm.moment_bracket(mu)
    assert np.array_equal(m, m.T)
    assert np.allclose(mm.moment_bracket(3.0 * mu), 9.0 * m, atol=1e-9)


@given(bracket_and_matrix(symmetric=True))
def test_defining_identity(args):
    mu, a = args
    lhs = float(np.sum(mm.moment_bracket(mu) * a))
    rhs = 2.0 * lc.inner_product(lc.gl_infinitesimal_act(a, mu), mu)
    # max entry rather than the Frobenius norm, which underflows for tiny drawn entries
    scale = float(np.max(np.abs(a))) * mu.dim
    assert abs(lhs - rhs) <= 1e-10 * scale * max(mu.norm() ** 2, 1.0) + 1e-300


def test_defining_identity_batch(rng):
    for _ in range(100):
        n = rng.integers(2, 7)
        mu = lc.random_bracket(n, rng)
        a = rng.standard_normal((n, n))
        a = a + a.T
        lhs = float(np.sum(mm.moment_bracket(mu) * a))
        rhs = 2.0 * lc.inner_product(lc.gl_infinitesimal_act(a, mu), mu)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(a) * mu.norm() ** 2


def test_skew_directions_carry_no_moment(rng):
    # pairing m with so(n) directions vanishes, the reason only the symmetric part is stored
    for n in (3, 5):
        mu = lc.random_bracket(n, rng)
        for k in lc.skew_basis(n):
            assert abs(lc.inner_product(lc.gl_infinitesimal_act(k, mu), mu)) <= 1e-12 * mu.norm() ** 2


def test_equivariance(rng):
    for n in (3, 4, 6):
        mu = lc.random_bracket(n, rng)
        k = random_orthogonal(n, rng)
        lhs = mm.moment_bracket(lc.gl_act(k, mu))
        assert np.max(np.abs(lhs - k @ mm.moment_bracket(mu) @ k.T)) <= 1e-10 * mu.norm() ** 2


def test_projective_moment_is_scale_free(rng):
    mu = lc.random_bracket(4, rng)
    assert np.allclose(mm.moment_projective(5.0 * mu), mm.moment_projective(mu), atol=1e-14)


# -- generic moment map ------------------------------------------------------------------

def test_generic_matches_closed_form_on_heisenberg():
    mu = lc.heisenberg()
    m = mm.moment_generic(mm.bracket_action_basis(3), mu)
    assert np.max(np.abs(m - mm.moment_bracket(mu))) <= 1e-12


def test_generic_on_zero_and_nonorthonormal():
    assert not np.any(mm.moment_generic(mm.bracket_action_basis(3), lc.abelian(3)))
    bad = mm.bracket_action_basis(3, [np.eye(3), np.eye(3)])
    with pytest.raises(NonOrthonormalBasis):
        mm.moment_generic(bad, lc.heisenberg())


def test_generic_on_sub_basis_is_the_projection(rng):
    mu = lc.random_bracket(4, rng)
    diag = [e for e in lc.symmetric_basis(4) if np.count_nonzero(e) == 1]
    m = mm.moment_generic(mm.bracket_action_basis(4, diag), mu)
    assert np.allclose(m, np.diag(np.diag(mm.moment_bracket(mu))), atol=1e-12)


def test_adjoint_generic_moment_of_j2():
    x = np.array([[0.0, np.sqrt(0.5)], [0.0, 0.0]])
    assert np.allclose(mm.moment_generic(mm.adjoint_action_basis(2), x), np.diag([0.5, -0.5]), atol=1e-14)


# -- gradient ---------------------------------------------------------------------------

def _objective(c):
    m = oracles.moment(c) / oracles.inner(c, c)
    return float(np.sum(m * m))


def _tangent(mu, rng):
    t = rng.standard_normal(mu.coeffs.shape)
    t = t - t.transpose(1, 0, 2)
    t -= np.sum(t * mu.coeffs) * mu.coeffs
    return t / np.linalg.norm(t)


def test_gradient_matches_finite_differences(rng):
    h = 1e-5
    for _ in range(5):
        mu = lc.random_bracket(int(rng.integers(3, 6)), rng).normalized()
        grad = mm.grad_norm_sq(mu).coeffs
        for _ in range(4):
            t = _tangent(mu, rng)
            up = (mu.coeffs + h * t) / np.linalg.norm(mu.coeffs + h * t)
            down = (mu.coeffs - h * t) / np.linalg.norm(mu.coeffs - h * t)
            fd = (_objective(up) - _objective(down)) / (2 * h)
            exact = float(np.sum(grad * t))
            assert abs(fd - exact) <= 1e-5 * max(abs(exact), np.linalg.norm(grad))


def test_gradient_is_tangent(rng):
    for n in (3, 4, 5):
        mu = lc.random_bracket(n, rng).normalized()
        assert abs(np.sum(mm.grad_norm_sq(mu).coeffs * mu.coeffs)) <= 1e-12 * mm.grad_norm_sq(mu).norm()


def test_gradient_preconditions():
    with pytest.raises(ZeroVector):
        mm.grad_norm_sq(lc.abelian(3))
    with pytest.raises(ValueError):
        mm.grad_norm_sq(lc.heisenberg())


def test_heisenberg_is_critical():
    mu = lc.heisenberg().normalized()
    assert mu.coeffs[0, 1, 2] == pytest.approx(np.sqrt(0.5))
    assert mm.grad_norm_sq(mu).norm() <= 1e-13


def test_heisenberg_eigen_identity():
    mu = lc.heisenberg()
    w = lc.gl_infinitesimal_act(mm.moment_bracket(mu), mu)
    assert np.max(np.abs(w.coeffs - 12.0 * mu.coeffs)) <= 1e-12
    assert mm.is_distinguished(mu) == pytest.approx(12.0, abs=1e-12)
    assert mm.is_distinguished(mu.normalized()) == pytest.approx(6.0, abs=1e-12)


def test_perturbed_heisenberg_plus_line_is_not_distinguished(rng):
    base = lc.direct_sum(lc.heisenberg(), lc.abelian(1))
    assert mm.is_distinguished(base) is not None
    noise = lc.random_bracket(4, rng) * 1e-3
    assert mm.is_distinguished(base + noise) is None


def test_distinguished_implies_zero_gradient(rng):
    for mu in (lc.heisenberg(), lc.filiform(4), lc.direct_sum(lc.heisenberg(), lc.heisenberg())):
        c = mm.is_distinguished(mu)
        assert c is not None
        assert mm.grad_norm_sq(mu.normalized()).norm() <= 10 * 1e-8


def test_is_distinguished_on_zero():
    with pytest.raises(ZeroVector):
        mm.is_distinguished(lc.abelian(3))


def test_distinguished_constant_is_orbit_scale_covariant(rng):
    # c(t mu) = t^2 c(mu)
    c1 = mm.is_distinguished(lc.filiform(4))
    c3 = mm.is_distinguished(3.0 * lc.filiform(4))
    assert c3 == pytest.approx(9.0 * c1, rel=1e-12)
