import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from bigjump import conditional as cd
from bigjump.errors import EmptySupport, OutsideWindow
from bigjump.models import (Exponential, ExpSqrtMinus, ExpSqrtPlus, Gamma, LognormalType,
                            ParetoTail, WeibullType)


def test_log_partition_exponential():
    assert cd.log_partition(Exponential(), 7.0) == pytest.approx(-7.0, abs=1e-12)


def test_log_partition_gamma_closed_form():
    # ∫ (dy)^{a-1} (d(1-y))^{a-1} e^{-d} dy = d^{2(a-1)} e^{-d} B(a, a)
    expected = 2 * math.log(10) - 10 + math.log(1 / 6)
    assert cd.log_partition(Gamma(a=2), 10.0) == pytest.approx(expected, abs=1e-11)


def test_log_partition_pareto_window_against_scipy():
    m = ParetoTail(alpha=2)
    assert cd.window(m, 4.0) == 0.25
    ref, _ = integrate.quad(lambda y: (4 * y) ** -2 * (4 * (1 - y)) ** -2, 0.25, 0.75,
                            epsabs=0, epsrel=1e-13)
    assert cd.log_partition(m, 4.0) == pytest.approx(math.log(ref), abs=1e-11)


def test_log_partition_deep_underflow():
    # Weibull(2), d=1000: integrand peaks at e^{-500000}
    m = WeibullType(alpha=2)
    lp = cd.log_partition(m, 1000.0)
    # Laplace: -d²/2 + log sqrt(pi / (2 d²))
    assert lp == pytest.approx(-5e5 + 0.5 * math.log(math.pi / 2e6), abs=1e-6)


@pytest.mark.parametrize("d", [1.0, 10.0, 100.0, 1000.0])
def test_gamma_midpoint_density(d):
    assert cd.log_pdf_zd(Gamma(a=2), d, 0.5) == pytest.approx(math.log(1.5), abs=1e-11)


def test_exponential_uniform():
    assert cd.log_pdf_zd(Exponential(), 50.0, 0.3) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("model", [Gamma(a=0.5), WeibullType(alpha=0.5), ParetoTail(alpha=2),
                                   LognormalType(), ExpSqrtPlus()], ids=lambda m: m.spec)
def test_symmetry(model):
    x = np.array([0.26, 0.3, 0.41, 0.49])
    assert np.allclose(cd.log_pdf_zd(model, 20.0, x), cd.log_pdf_zd(model, 20.0, 1 - x),
                       rtol=0, atol=1e-9)


def test_outside_window_is_zero():
    m = ParetoTail(alpha=2)
    assert cd.pdf_zd(m, 4.0, 0.2) == 0.0
    assert cd.pdf_zd(m, 4.0, 0.8) == 0.0
    assert cd.pdf_zd(m, 4.0, 0.25) > 0


def test_empty_support():
    with pytest.raises(EmptySupport):
        cd.log_partition(ParetoTail(alpha=2), 2.0)
    with pytest.raises(EmptySupport):
        cd.log_pdf_zd(Exponential(), 0.0, 0.5)


def test_derivative_midpoint_is_exactly_zero():
    for m in (WeibullType(alpha=2), ExpSqrtMinus(), Gamma(a=3), ParetoTail(alpha=2)):
        assert cd.pdf_zd_derivative(m, 10.0, 0.5) == 0.0


def test_derivative_signs():
    assert cd.pdf_zd_derivative(WeibullType(alpha=2), 10.0, 0.25) > 0
    assert cd.pdf_zd_derivative(ExpSqrtMinus(), 100.0, 0.25) < 0


def test_derivative_magnitude_weibull():
    m, d, x, h = WeibullType(alpha=2), 10.0, 0.25, 1e-6
    fd = (cd.pdf_zd(m, d, x + h) - cd.pdf_zd(m, d, x - h)) / (2 * h)
    assert cd.pdf_zd_derivative(m, d, x) == pytest.approx(fd, rel=1e-6)


def test_derivative_outside_window():
    with pytest.raises(OutsideWindow):
        cd.pdf_zd_derivative(ParetoTail(alpha=2), 4.0, 0.25)


def test_cdf_examples():
    assert cd.cdf_zd(Exponential(), 20.0, 0.5) == pytest.approx(0.5, abs=1e-12)
    assert cd.cdf_zd(Gamma(a=2), 100.0, 0.5) == 0.5
    assert cd.cdf_zd(Gamma(a=2), 100.0, 0.25) == pytest.approx(0.15625, abs=1e-10)


def test_cdf_vs_beta_oracle():
    x = np.linspace(0, 1, 41)
    for a in (0.5, 3.0):
        got = cd.cdf_zd(Gamma(a=a), 50.0, x)
        assert np.allclose(got, stats.beta(a, a).cdf(x), atol=1e-9)
    assert np.all(np.diff(cd.cdf_zd(WeibullType(alpha=2), 200.0, x)) >= 0)


def test_table_exponential():
    t = cd.pdf_zd_grid(Exponential(), 10.0, 64)
    assert np.allclose(t.pdf, 1.0, atol=1e-12)
    assert t.integral() == pytest.approx(1.0, abs=1e-9)
    assert 0.5 in t.grid


def test_table_gamma_half_singular_endpoints():
    t = cd.pdf_zd_grid(Gamma(a=0.5), 10.0, 128)
    assert np.isinf(t.pdf[0]) and np.isinf(t.pdf[-1])
    assert t.integral() == pytest.approx(1.0, abs=1e-4)


def test_table_weibull_peak():
    t = cd.pdf_zd_grid(WeibullType(alpha=2), 200.0, 128)
    assert cd.pdf_zd(WeibullType(alpha=2), 200.0, 0.5) > 1e10 * cd.pdf_zd(
        WeibullType(alpha=2), 200.0, 0.25)
    # log integrand near 1/2 is -d²/2 - 2d²(x-1/2)², a Gaussian of height d·sqrt(2/π)
    peak = t.pdf[t.grid == 0.5][0]
    assert peak == pytest.approx(200.0 * math.sqrt(2.0 / math.pi), rel=1e-12)
    assert t.integral() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("model,d", [(Gamma(a=2), 100.0), (ParetoTail(alpha=2), 4.0),
                                     (ParetoTail(alpha=2), 1000.0), (LognormalType(), 50.0),
                                     (WeibullType(alpha=0.5), 1000.0), (ExpSqrtMinus(), 100.0)],
                         ids=str)
def test_table_invariants(model, d):
    t = cd.pdf_zd_grid(model, d, 128)
    assert t.integral() == pytest.approx(1.0, abs=1e-6)
    assert np.array_equal(t.log_pdf, t.log_pdf[::-1])
    assert np.array_equal(t.grid, np.sort(t.grid))
    lo = model.support_low / d
    outside = (t.grid < lo * (1 - 1e-12)) | (t.grid > 1 - lo * (1 - 1e-12))
    assert np.all(t.pdf[outside] == 0.0)


def test_table_csv_format():
    t = cd.pdf_zd_grid(Gamma(a=2), 100.0, 32)
    lines = t.to_csv().splitlines()
    assert lines[0].startswith("# {")
    assert '"family": "gamma"' in lines[0] and '"model": "gamma:a=2"' in lines[0]
    assert lines[1] == "x,log_pdf,pdf"
    x, lp, p = (float(v) for v in lines[2 + 16].split(","))
    assert x == 0.5 and p == pytest.approx(1.5)


@pytest.mark.parametrize("a", [0.5, 2.0, 3.0])
def test_gamma_tables_independent_of_d(a):
    ref = cd.pdf_zd_grid(Gamma(a=a), 1.0, 128).log_pdf
    for d in (10.0, 100.0, 1000.0):
        lp = cd.pdf_zd_grid(Gamma(a=a), d, 128).log_pdf
        finite = np.isfinite(ref)
        assert np.array_equal(finite, np.isfinite(lp))
        assert np.max(np.abs(lp[finite] - ref[finite])) < 1e-9


@pytest.mark.parametrize("model", [WeibullType(alpha=2), WeibullType(alpha=0.5), ExpSqrtPlus(),
                                   ExpSqrtMinus(), LognormalType()], ids=lambda m: m.spec)
@pytest.mark.parametrize("d", [10.0, 100.0, 1000.0])
def test_midpoint_curvature_sign(model, d):
    # second derivative of log f(dx) + log f(d(1-x)) at 1/2 is 2 d² (log f)''(d/2)
    h = 1e-3
    lp = cd.log_pdf_zd(model, d, np.array([0.5 - h, 0.5, 0.5 + h]))
    second = lp[0] + lp[2] - 2 * lp[1]
    assert np.sign(second) == np.sign(model.curvature(d / 2))


def test_symmetric_grid_weights_integrate_polynomials():
    x, w = cd.symmetric_grid(129)
    assert x.size % 2 == 1 and x.size >= 129
    assert np.sum(w * x ** 3) == pytest.approx(0.25, abs=1e-10)
    assert np.sum(w / np.sqrt(np.where(w > 0, x * (1 - x), 1))) == pytest.approx(math.pi,
                                                                                 abs=1e-5)
