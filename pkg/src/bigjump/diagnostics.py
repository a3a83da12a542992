"""Empirical convergence checks along a ladder of d values.

Convergence in distribution to atoms at 0, 1/2 and 1 is measured through the
mass of fixed windows: ``[0, ε) ∪ (1-ε, 1]`` for the endpoints and
``(1/2-ε, 1/2+ε)`` for the midpoint.  The verdicts describe the computed
ladder only; nothing is extrapolated.

Also here: the subexponential ratio P(X1+X2 > x)/P(X1 > x) and tail ratios
between two models.
"""

import csv
import enum
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln

from . import quadrature
from .classifier import Certificate
from .conditional import DEFAULT_QUAD, cdf_zd, log_pdf_zd, zd_law
from .errors import TailTooSmall, WrongFamily
from .models import Family

DEFAULT_EPS = 0.05
DEFAULT_X_PROBES = (0.1, 0.25, 0.4)
# 10·4^k up to ~2.6e6: far enough for the slowest built-in case (e^{-x+√x})
# to put 95% of its mass within 0.05 of 1/2
DEFAULT_LADDER = tuple(10.0 * 4.0 ** k for k in range(10))
LOG_TAIL_FLOOR = -700.0


class LadderVerdict(enum.Enum):
    TENDS_TO_TYPE_I = "TendsToTypeI"
    TENDS_TO_TYPE_II = "TendsToTypeII"
    STATIONARY = "Stationary"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class LadderThresholds:
    final_mass: float = 0.95
    stationary_variation: float = 0.01
    vanish_ratio: float = 1e-3


DEFAULT_THRESHOLDS = LadderThresholds()


def mass_profile(model, d, eps=DEFAULT_EPS, quad=DEFAULT_QUAD):
    """(endpoint mass, midpoint mass) of Z_d for windows of half-width ε."""
    if not 0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    c = cdf_zd(model, d, np.array([eps, 1.0 - eps, 0.5 - eps, 0.5 + eps]), quad)
    endpoint = c[0] + (1.0 - c[1])
    midpoint = c[3] - c[2]
    return float(endpoint), float(midpoint)


def log_window_complements(model, d, eps=DEFAULT_EPS, quad=DEFAULT_QUAD):
    """log P(ε <= Z_d <= 1-ε) and log P(|Z_d - 1/2| >= ε).

    These are 1 minus the two masses of :func:`mass_profile`, kept in log
    space: once a mass rounds to 1.0 its complement is still resolved.
    """
    if not 0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    law = zd_law(model, d, quad)
    cum = law.cumulative
    log_total = cum.log_total
    # on the half window [lo, 1/2]: mass in [ε, 1/2] and in [lo, 1/2-ε]
    inner = float(cum.log_above(np.array([eps]))[0] - log_total)
    outer = float(cum.log_below(np.array([0.5 - eps]))[0] - log_total)
    return inner, outer


def _eventually_nondecreasing(values, rtol=1e-9):
    v = np.asarray(values, dtype=float)
    top = v[v.size // 2:]
    return bool(np.all(np.diff(top) >= -rtol * np.abs(top[1:]).clip(min=1.0)))


def _variation(values):
    v = np.asarray(values, dtype=float)
    scale = max(np.abs(v).max(), 1e-300)
    return (v.max() - v.min()) / scale


@dataclass
class ConvergenceLadder:
    model: str
    d_values: list
    epsilon: float
    x_probes: list
    endpoint_mass: list
    midpoint_mass: list
    pointwise: list  # rows per d, columns per x probe
    verdict: LadderVerdict
    thresholds: LadderThresholds = field(default_factory=LadderThresholds)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# " + json.dumps({"model": self.model, "epsilon": self.epsilon,
                                     "verdict": self.verdict.value}, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "endpoint_mass", "midpoint_mass"]
                   + [f"fzd_at_{x:g}" for x in self.x_probes])
        for d, e, m, row in zip(self.d_values, self.endpoint_mass, self.midpoint_mass,
                                self.pointwise):
            w.writerow([repr(float(d)), repr(float(e)), repr(float(m))]
                       + [repr(float(v)) for v in row])
        return buf.getvalue()

    def summary(self):
        return {
            "model": self.model,
            "verdict": self.verdict.value,
            "epsilon": self.epsilon,
            "d_values": [float(d) for d in self.d_values],
            "final_endpoint_mass": float(self.endpoint_mass[-1]),
            "final_midpoint_mass": float(self.midpoint_mass[-1]),
            "thresholds": {"final_mass": self.thresholds.final_mass,
                           "stationary_variation": self.thresholds.stationary_variation},
        }


def convergence_ladder(model, d_values=DEFAULT_LADDER, eps=DEFAULT_EPS,
                       x_probes=DEFAULT_X_PROBES, thresholds=DEFAULT_THRESHOLDS,
                       quad=DEFAULT_QUAD):
    """Masses and pointwise densities along ``d_values``, plus a verdict."""
    d_values = [float(d) for d in d_values]
    if any(b <= a for a, b in zip(d_values, d_values[1:])):
        raise ValueError("d_values must be increasing")
    if not all(0 < x < 0.5 for x in x_probes):
        raise ValueError("x_probes must lie in (0, 1/2)")
    ends, mids, pointwise = [], [], []
    for d in d_values:
        e, m = mass_profile(model, d, eps, quad)
        ends.append(e)
        mids.append(m)
        pointwise.append([float(v) for v in np.exp(log_pdf_zd(model, d, np.array(x_probes), quad))])

    t = thresholds
    if _eventually_nondecreasing(ends) and ends[-1] > t.final_mass:
        verdict = LadderVerdict.TENDS_TO_TYPE_I
    elif _eventually_nondecreasing(mids) and mids[-1] > t.final_mass:
        verdict = LadderVerdict.TENDS_TO_TYPE_II
    elif _variation(ends) < t.stationary_variation and _variation(mids) < t.stationary_variation:
        verdict = LadderVerdict.STATIONARY
    else:
        verdict = LadderVerdict.INCONCLUSIVE
    return ConvergenceLadder(model.spec, d_values, float(eps), [float(x) for x in x_probes],
                             ends, mids, pointwise, verdict, t)


def pointwise_vanishing(model, x_probes=DEFAULT_X_PROBES, d_values=None,
                        thresholds=DEFAULT_THRESHOLDS, quad=DEFAULT_QUAD):
    """Does f_{Z_d}(x) go to 0 at every probe x in (0, 1/2)?

    A column (one x) vanishes when its log-density is non-increasing over the
    upper half of the ladder and has dropped by ``vanish_ratio`` overall.  It
    persists when it is flat (variation below 1%) or non-decreasing there.
    Ladder values that put x outside the support window are skipped.
    """
    if d_values is None:
        d_values = tuple(d for d in DEFAULT_LADDER if d <= 1e5)
    log_ratio = np.log(thresholds.vanish_ratio)
    status = []
    for x in x_probes:
        col = []
        for d in d_values:
            if x < model.support_low / d * (1.0 - 1e-12):
                continue
            col.append(float(log_pdf_zd(model, d, x, quad)))
        col = np.array(col)
        if col.size < 3:
            status.append(Certificate.INCONCLUSIVE)
            continue
        top = col[col.size // 2:]
        finite = np.isfinite(col)
        if np.all(np.diff(top) <= 1e-12) and (col[-1] - col[0] < log_ratio):
            status.append(Certificate.VANISHING)
        elif finite.all() and (np.ptp(np.exp(top - top.max())) < 0.01
                               or np.all(np.diff(top) >= -1e-12)):
            status.append(Certificate.NON_VANISHING)
        else:
            status.append(Certificate.INCONCLUSIVE)
    if all(s is Certificate.VANISHING for s in status):
        return Certificate.VANISHING
    if any(s is Certificate.NON_VANISHING for s in status):
        return Certificate.NON_VANISHING
    return Certificate.INCONCLUSIVE


def beta_distance(model, d, grid_n=256, quad=DEFAULT_QUAD):
    """sup over an interior grid of |f_{Z_d} - Beta(a, a) density|, Gamma(a) only."""
    if model.family is not Family.GAMMA:
        raise WrongFamily(f"beta_distance needs a gamma model, got {model.spec}")
    a = model.a
    x = np.arange(1, grid_n + 1) / (grid_n + 1.0)
    log_beta = (a - 1.0) * (np.log(x) + np.log1p(-x)) - betaln(a, a)
    fz = np.exp(log_pdf_zd(model, d, x, quad))
    return float(np.max(np.abs(fz - np.exp(log_beta))))


def log_subexp_ratio(model, x):
    """log of P(X1+X2 > x)/P(X1 > x).

    The numerator splits on the smaller summand:
    ``P(S > x) = 2∫_{lo}^{x/2} f(y) F̄(x-y) dy + F̄(x/2)²``.  Both terms are
    non-negative, so nothing cancels.
    """
    lo = model.support_low
    x = float(x)
    if not x >= lo:
        raise ValueError(f"{model.spec}: need x >= {lo}")
    log_den = model.log_sf(x)
    half = x / 2.0
    if half <= lo:
        return -log_den
    log_sq = 2.0 * model.log_sf(half)

    def integrand(y):
        y = np.asarray(y, dtype=float)
        return model.log_density(y) + model.log_sf(np.maximum(x - y, lo))

    edges = np.concatenate([
        np.linspace(lo, half, 65),
        lo + (half - lo) * quadrature.geometric_offsets(200),
        half - (half - lo) * quadrature.geometric_offsets(60),
    ])
    log_int = quadrature.log_integrate(integrand, np.clip(edges, lo, half))
    log_num = np.logaddexp(np.log(2.0) + log_int, log_sq)
    return float(log_num - log_den)


def subexp_ratio(model, x):
    """P(X1+X2 > x)/P(X1 > x); tends to 2 exactly for subexponential laws.

    Raises :class:`TailTooSmall` when P(X1 > x) < e^-700; the log ratio is
    attached to the exception (or use :func:`log_subexp_ratio`).
    """
    log_den = model.log_sf(float(x))
    log_ratio = log_subexp_ratio(model, x)
    if log_den < LOG_TAIL_FLOOR:
        raise TailTooSmall(f"P(X > {x:g}) = exp({log_den:.1f}) underflows", log_ratio)
    return float(np.exp(log_ratio))


def tail_domination_ratio(model_num, model_den, x_values):
    """P(Y > x)/P(X > x) at each x, computed as a difference of log tails."""
    x = np.asarray(x_values, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("x_values must be increasing")
    lo = max(model_num.support_low, model_den.support_low)
    if np.any(x < lo):
        raise ValueError(f"x_values must lie above both supports ({lo})")
    return [float(v) for v in np.exp(model_num.log_sf(x) - model_den.log_sf(x))]
