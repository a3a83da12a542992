import math

import numpy as np
import pytest
from scipy import integrate, stats

from bigjump import diagnostics as dg
from bigjump.classifier import Certificate
from bigjump.conditional import cdf_zd
from bigjump.diagnostics import LadderVerdict
from bigjump.errors import TailTooSmall, WrongFamily
from bigjump.models import (Exponential, ExpSqrtMinus, ExpSqrtPlus, Gamma, LognormalType,
                            ParetoTail, WeibullType)

LADDER_1E5 = tuple(10.0 * 4.0 ** k for k in range(8))


def test_mass_profile_exponential():
    e, m = dg.mass_profile(Exponential(), 50.0, 0.05)
    assert e == pytest.approx(0.1, abs=1e-12) and m == pytest.approx(0.1, abs=1e-12)


def test_mass_profile_gamma_beta_window():
    # 2 ∫_0^0.05 6x(1-x) dx = 2(3·0.05² - 2·0.05³)
    expected = 2 * (3 * 0.05 ** 2 - 2 * 0.05 ** 3)
    assert expected == pytest.approx(0.0145)
    for d in (1.0, 100.0):
        e, m = dg.mass_profile(Gamma(a=2), d, 0.05)
        assert e == pytest.approx(expected, abs=1e-12)
        assert m == pytest.approx(stats.beta(2, 2).cdf(0.55) - stats.beta(2, 2).cdf(0.45),
                                  abs=1e-12)


def test_mass_profile_weibull_increases():
    mids = [dg.mass_profile(WeibullType(alpha=2), d)[1] for d in LADDER_1E5]
    # saturates at 1.0 to double precision from d ≈ 160
    assert np.all(np.diff(mids) >= 0) and mids[-1] > 0.999
    early = [dg.mass_profile(WeibullType(alpha=2), d)[1] for d in (1.0, 2.0, 4.0, 8.0, 16.0)]
    assert np.all(np.diff(early) > 0)


def test_mass_profile_rejects_bad_eps():
    with pytest.raises(ValueError):
        dg.mass_profile(Exponential(), 10.0, 0.3)


@pytest.mark.parametrize("model,verdict", [
    (ExpSqrtMinus(), LadderVerdict.TENDS_TO_TYPE_I),
    (ExpSqrtPlus(), LadderVerdict.TENDS_TO_TYPE_II),
    (Gamma(a=2), LadderVerdict.STATIONARY),
], ids=str)
def test_convergence_ladder_examples(model, verdict):
    # ExpSqrtPlus needs d ≈ 10⁶ before 95% of the mass sits within 0.05 of 1/2
    ladder = LADDER_1E5 if verdict is not LadderVerdict.TENDS_TO_TYPE_II else dg.DEFAULT_LADDER
    lad = dg.convergence_ladder(model, ladder)
    assert lad.verdict is verdict
    for e, m in zip(lad.endpoint_mass, lad.midpoint_mass):
        assert 0 <= e and 0 <= m and e + m <= 1 + 1e-6


def test_expsqrt_plus_is_inconclusive_on_short_ladder():
    # documented: at d ≤ 10⁵ the midpoint mass is still below 0.95
    lad = dg.convergence_ladder(ExpSqrtPlus(), LADDER_1E5)
    assert lad.midpoint_mass[-1] < 0.95
    assert np.all(np.diff(lad.midpoint_mass) > 0)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.0, 7.5])
def test_gamma_ladder_always_stationary(a):
    assert dg.convergence_ladder(Gamma(a=a)).verdict is LadderVerdict.STATIONARY


def test_ladder_csv_layout():
    lad = dg.convergence_ladder(Gamma(a=2), (10.0, 40.0))
    lines = lad.to_csv().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "d,endpoint_mass,midpoint_mass,fzd_at_0.1,fzd_at_0.25,fzd_at_0.4"
    assert len(lines) == 4
    assert lad.summary()["verdict"] == "Stationary"


def test_ladder_rejects_unsorted():
    with pytest.raises(ValueError):
        dg.convergence_ladder(Gamma(a=2), (40.0, 10.0))


@pytest.mark.parametrize("model,cert", [
    (ParetoTail(alpha=2), Certificate.VANISHING),
    (Gamma(a=2), Certificate.NON_VANISHING),
    (Exponential(), Certificate.NON_VANISHING),
    (WeibullType(alpha=0.5), Certificate.VANISHING),
    # Type II also empties (0, 1/2): the mass moves to the midpoint
    (WeibullType(alpha=2), Certificate.VANISHING),
], ids=str)
def test_pointwise_vanishing(model, cert):
    assert dg.pointwise_vanishing(model, (0.1, 0.25, 0.4), LADDER_1E5) is cert


def test_beta_distance():
    assert dg.beta_distance(Gamma(a=2), 1000.0, 256) < 1e-6
    assert dg.beta_distance(Gamma(a=1), 10.0, 256) < 1e-9
    assert dg.beta_distance(Gamma(a=0.5), 100.0, 256) < 1e-4
    with pytest.raises(WrongFamily):
        dg.beta_distance(Exponential(), 10.0)


@pytest.mark.parametrize("x", [5.0, 10.0, 20.0])
def test_subexp_ratio_exponential(x):
    assert dg.subexp_ratio(Exponential(), x) == pytest.approx(1 + x, rel=1e-9)


def test_subexp_ratio_pareto_against_scipy():
    # P(X1+X2 > x) = ∫ f(y) F̄(x-y) dy with F̄(t) = min(1, 1/t)
    x = 1000.0
    f = lambda y: y ** -2
    sf = lambda t: 1.0 if t <= 1 else 1.0 / t
    pieces = [1.0, 2.0, 10.0, 100.0, x - 100, x - 10, x - 2, x - 1, np.inf]
    num = sum(integrate.quad(lambda y: f(y) * sf(x - y), a, b, limit=400, epsabs=0,
                             epsrel=1e-12)[0] for a, b in zip(pieces, pieces[1:]))
    got = dg.subexp_ratio(ParetoTail(alpha=2), x)
    assert got == pytest.approx(num * x, rel=1e-8)
    assert 1.9 < got < 2.1
    assert abs(dg.subexp_ratio(ParetoTail(alpha=2), 1e4) - 2) < abs(got - 2)


@pytest.mark.parametrize("model", [Exponential(), Gamma(a=0.5), ParetoTail(alpha=2),
                                   WeibullType(alpha=2), LognormalType()], ids=lambda m: m.spec)
def test_subexp_ratio_at_least_one(model):
    for x in (model.support_low, model.support_low + 0.5, 3.0, 25.0):
        assert dg.log_subexp_ratio(model, x) >= -1e-9


def test_subexp_ratio_underflow():
    m = WeibullType(alpha=2)
    with pytest.raises(TailTooSmall) as info:
        dg.subexp_ratio(m, 30.0)
    # S > x needs both near x/2: log ratio ≈ x²/2
    assert info.value.log_value == pytest.approx(dg.log_subexp_ratio(m, 30.0))
    assert info.value.log_value > 400


def test_tail_domination():
    r = dg.tail_domination_ratio(ExpSqrtMinus(), ExpSqrtPlus(), [10.0, 100.0, 400.0])
    assert np.all(np.diff(r) < 0) and r[-1] < 1e-15
    assert np.allclose(dg.tail_domination_ratio(Exponential(), Exponential(), [1.0, 50.0]),
                       1.0, rtol=0, atol=1e-9)
    r = dg.tail_domination_ratio(ParetoTail(alpha=3), ParetoTail(alpha=2), [10.0, 100.0])
    assert r == pytest.approx([0.1, 0.01], rel=1e-8)


def test_symmetric_windows():
    for m in (WeibullType(alpha=0.5), LognormalType(), ParetoTail(alpha=2)):
        lower = cdf_zd(m, 100.0, 0.05)
        upper = 1 - cdf_zd(m, 100.0, 0.95)
        assert lower == pytest.approx(upper, abs=1e-12)


def test_log_window_complements_match_the_masses():
    for m, d in ((Exponential(), 50.0), (Gamma(a=2), 10.0), (WeibullType(alpha=2), 3.0)):
        end, mid = dg.mass_profile(m, d)
        inner, outer = dg.log_window_complements(m, d)
        assert math.exp(inner) == pytest.approx(1 - end, rel=1e-9)
        assert math.exp(outer) == pytest.approx(1 - mid, rel=1e-9)
    assert dg.log_window_complements(Exponential(), 50.0)[0] == pytest.approx(math.log(0.9), rel=1e-12)


def test_log_window_complements_resolve_past_saturation():
    m = WeibullType(alpha=2)
    outer = [dg.log_window_complements(m, 10.0 * 4.0 ** k)[1] for k in range(10)]
    assert dg.mass_profile(m, 10.0 * 4.0 ** 9)[1] == 1.0
    assert np.all(np.isfinite(outer)) and np.all(np.diff(outer) < 0)
    with pytest.raises(ValueError):
        dg.log_window_complements(m, 10.0, eps=0.3)
