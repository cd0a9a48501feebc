import time

import numpy as np
import pytest

from delaysl import funcspace as fs
from delaysl.errors import NonConvergence, ValidationError
from delaysl.forward import (PI, DelayParams, Potential, SpectralPoint, Spectrum,
                             asymptotic_rho, charfn_closed, charfn_closed_both, charfn_oracle,
                             charfn_oracle_both, count_roots_rect, d_from_charfn,
                             d_from_constants, direct_constants, eigenvalues)

from conftest import A, CORPUS, corpus_potential

GOLDEN_CONST_LAM4_J0 = 0.1861246895395093


def seed_rect(j, a, A0, n_max=10, half_height=5.0):
    """lam-rectangle holding the asymptotic seeds n = 1..n_max and no others."""
    rho = asymptotic_rho(j, np.arange(1, n_max + 2), a, A0)
    return (-5.0, float(np.real((rho[-2] + rho[-1]) / 2) ** 2), -half_height, half_height)


# -- validation ----------------------------------------------------------------

@pytest.mark.parametrize("a", [1.2, np.pi / 2, 2.0])
def test_delay_outside_window_rejected(a):
    with pytest.raises(ValidationError):
        DelayParams(a)


def test_delay_window_edges():
    assert DelayParams(2 * np.pi / 5).a == pytest.approx(2 * np.pi / 5)


def test_potential_must_span_a_to_pi():
    with pytest.raises(ValidationError):
        Potential(DelayParams(A), fs.GridFunction.zeros(0.0, np.pi, 16))


def test_spectrum_indices_consecutive():
    with pytest.raises(ValidationError):
        Spectrum(0, (SpectralPoint(0, 1, 1.0), SpectralPoint(0, 3, 9.0)))


def test_spectral_point_rho_principal_branch():
    assert SpectralPoint(0, 1, -4.0).rho == pytest.approx(2j)
    assert SpectralPoint(0, 1, 9.0).rho == 3


# -- characteristic functions -------------------------------------------------------

def test_zero_potential_dirichlet_root():
    assert abs(charfn_closed(0, 1.0, Potential.zero(A))) < 1e-14


def test_zero_potential_neumann_at_zero():
    assert charfn_closed(1, 0.0, Potential.zero(A)) == pytest.approx(1.0, abs=1e-15)


def test_zero_potential_lambda_zero_limit():
    # sin(rho pi)/rho -> pi
    assert charfn_closed(0, 0.0, Potential.zero(A)) == pytest.approx(PI, abs=1e-14)


def test_constant_potential_golden_value():
    p = corpus_potential("constant")
    val = charfn_closed(0, 4.0, p)
    assert abs(val - GOLDEN_CONST_LAM4_J0) < 1e-12
    assert abs(charfn_oracle(0, 4.0, p) - val) < 1e-8


@pytest.mark.parametrize("n", range(1, 6))
def test_oracle_free_roots(n):
    p = Potential.zero(A)
    assert abs(charfn_oracle(0, n * n, p)) < 1e-9
    assert abs(charfn_oracle(1, (n - 0.5) ** 2, p)) < 1e-9


@pytest.mark.parametrize("name", ["ramp", "bump"])
def test_closed_form_agrees_with_oracle_off_axis(name):
    p = corpus_potential(name)
    lam = np.array([-3.0, 7.5 + 1j, 40 - 1j, 95.0])
    c0, c1 = charfn_closed_both(lam, p)
    o0, o1 = charfn_oracle_both(lam, p)
    assert np.max(np.abs(c0 - o0)) < 1e-8
    assert np.max(np.abs(c1 - o1)) < 1e-8


@pytest.mark.parametrize("name", ["constant", "ramp"])
def test_conjugate_symmetry_for_real_potential(name):
    p = corpus_potential(name)
    lam = np.array([3 + 2j, 50 - 7j, -2 + 0.5j])
    for j in (0, 1):
        assert np.allclose(charfn_closed(j, lam.conj(), p), np.conj(charfn_closed(j, lam, p)),
                           rtol=1e-13, atol=1e-15)


def test_closed_form_batches_shape():
    p = corpus_potential("bump")
    lam = np.linspace(1, 200, 150).reshape(10, 15)
    assert charfn_closed(1, lam, p).shape == (10, 15)


def test_high_lambda_still_resolved():
    # closed form refines its quadrature grid when rho*h grows
    coarse = Potential.from_function(A, CORPUS["ramp"], 256)
    fine = Potential.from_function(A, CORPUS["ramp"], 4096)
    lam = np.array([150.0 ** 2 + 0.3])
    assert abs(charfn_closed(0, lam, coarse)[0] - charfn_closed(0, lam, fine)[0]) < 1e-7


# -- eigenvalues -----------------------------------------------------------------

def test_free_dirichlet_spectrum():
    s = eigenvalues(0, Potential.zero(A), 5)
    assert np.max(np.abs(s.lambdas - np.arange(1, 6) ** 2)) < 1e-10


def test_free_mixed_spectrum():
    s = eigenvalues(1, Potential.zero(A), 3)
    assert np.max(np.abs(s.lambdas - np.array([0.25, 2.25, 6.25]))) < 1e-10


def test_eigenvalue_residuals_small():
    p = corpus_potential("bump")
    for j in (0, 1):
        s = eigenvalues(j, p, 30)
        d = np.abs(charfn_closed(j, s.lambdas, p))
        assert np.max(d) < 1e-10


def test_constant_potential_asymptotic_trend():
    p = corpus_potential("constant")
    s = eigenvalues(0, p, 20)
    n = np.arange(1, 21)
    resid = np.abs(s.rhos - n - np.cos(n * A) * 0.55 * PI / (2 * PI * n))
    assert np.median(resid[10:]) < 0.5 * np.median(resid[:5])
    assert resid[-1] < 1e-3


def test_second_order_asymptotics_tighter():
    p = corpus_potential("ramp")
    dc = direct_constants(p)
    s = eigenvalues(0, p, 80)
    n = np.arange(60, 81)
    first = np.abs(s.rhos[59:] - asymptotic_rho(0, n, A, dc.A0))
    second = np.abs(s.rhos[59:] - asymptotic_rho(0, n, A, dc.A0, (dc.A, dc.B1)))
    assert np.max(second) < 0.05 * np.max(first)


def test_nonconvergence_reports_index():
    with pytest.raises(NonConvergence) as exc:
        eigenvalues(0, corpus_potential("bump"), 5, maxiter=1)
    assert exc.value.j == 0 and exc.value.n >= 1
    assert "n=" in str(exc.value) and "j=0" in str(exc.value)


def test_invalid_j_and_N():
    with pytest.raises(ValidationError):
        eigenvalues(2, Potential.zero(A), 3)
    with pytest.raises(ValidationError):
        eigenvalues(0, Potential.zero(A), 0)


# -- root counting -----------------------------------------------------------------

def test_count_free_dirichlet():
    assert count_roots_rect(0, Potential.zero(A), (0.5, 20.5, -1, 1)) == 4


def test_count_free_mixed():
    assert count_roots_rect(1, Potential.zero(A), (0, 1, -1, 1)) == 1


def test_count_constant_first_ten():
    p = corpus_potential("constant")
    A0 = fs.integrate(p.q)
    assert count_roots_rect(0, p, seed_rect(0, A, A0)) == 10


# -- direct constants ----------------------------------------------------------------

def test_direct_constants_zero():
    dc = direct_constants(Potential.zero(A))
    assert dc.A0 == dc.A == dc.B1 == dc.B2 == 0
    for g in (dc.q0, dc.Q, dc.R):
        assert not np.any(g.samples)


def test_direct_constants_constant():
    dc = direct_constants(corpus_potential("constant"))
    assert dc.A0 == pytest.approx(0.55 * PI, abs=1e-12)
    assert dc.A == pytest.approx((0.1 * PI) ** 2 / 2, abs=1e-10)
    assert dc.B1 == pytest.approx(4, abs=1e-12)
    assert abs(dc.B2) < 1e-12
    assert np.max(np.abs(dc.q0.samples)) < 1e-12


def test_direct_constants_constant_Q_brute_force():
    # q = 1: Q1(x) = x - 2a, Q2(x) = Q3(x) = pi - a - x
    dc = direct_constants(corpus_potential("constant"))
    xi = dc.Q.x
    x = xi / 2 + PI / 2
    expected = (x + A - 2 * A) - 2 * (PI - A - x)
    assert np.max(np.abs(dc.Q.samples - expected)) < 1e-9


def test_direct_constants_ramp():
    dc = direct_constants(corpus_potential("ramp"))
    L = PI - A
    assert dc.B1 == pytest.approx(2 * L, abs=1e-10)
    assert dc.B2 == pytest.approx(-2 * L, abs=1e-10)
    assert dc.A0 == pytest.approx(L ** 2 / 2, abs=1e-10)


@pytest.mark.parametrize("name", ["constant", "ramp", "bump"])
def test_fourier_relations_hold(name):
    # d from the closed-form characteristic function equals the Fourier
    # transforms of R built directly from q
    p = corpus_potential(name)
    dc = direct_constants(p)
    rho = np.array([1.5, 4.0, 9.3, 17.0])
    c0, c1 = d_from_charfn(p, rho, dc)
    f0, f1 = d_from_constants(dc, rho)
    # the end values of q' come from a second-order one-sided difference
    assert np.max(np.abs(c0 - f0)) < 5e-6
    assert np.max(np.abs(c1 - f1)) < 1e-7


def test_fourier_relations_converge_with_grid():
    rho = np.array([1.5, 4.0])
    errs = []
    for M in (1024, 4096):
        p = corpus_potential("bump", M)
        dc = direct_constants(p, M)
        errs.append(np.max(np.abs(d_from_charfn(p, rho, dc)[0] - d_from_constants(dc, rho)[0])))
    assert errs[1] < errs[0] / 10


def test_free_spectrum_runtime():
    t = time.perf_counter()
    eigenvalues(0, Potential.zero(A), 20)
    eigenvalues(1, Potential.zero(A), 20)
    assert time.perf_counter() - t < 5
