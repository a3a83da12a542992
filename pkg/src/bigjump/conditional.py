"""The law of Z_d = X1/d given X1 + X2 = d.

Its density on [0, 1] is ``f(dx) f(d(1-x)) / ∫_0^1 f(dy) f(d(1-y)) dy``.
Everything is computed from log-densities: for Weibull(2) at d = 100 the
integrand is about exp(-5000) at the endpoints while the ratio is O(1).

The density is symmetric about 1/2, so integrals are taken over the left half
of the support window only and doubled.  "Partition" below always refers to
the integral of the *unnormalised* pair density; normalising constants cancel.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import quadrature
from .errors import EmptySupport, NonFinite, OutsideWindow

LOG2 = np.log(2.0)


@dataclass(frozen=True)
class QuadConfig:
    """Panelling of the half window [lo, 1/2] before adaptive refinement.

    ``n_panels`` uniform panels span the full window (half of them are used),
    ``endpoint_levels`` dyadic panels grade towards the window edge and
    ``midpoint_levels`` towards 1/2.
    """

    n_panels: int = 512
    order: int = 8
    rtol: float = 1e-11
    endpoint_levels: int = 200
    midpoint_levels: int = 60


DEFAULT_QUAD = QuadConfig()


def window(model, d):
    """Left edge of the support of Z_d; the window is [lo, 1 - lo]."""
    d = float(d)
    if not d > 0 or not np.isfinite(d):
        raise EmptySupport(f"d must be positive and finite, got {d}")
    lo = model.support_low / d
    if not lo < 0.5:
        raise EmptySupport(
            f"{model.spec}: d={d:g} <= 2*support_low={2 * model.support_low:g}, "
            "the conditioning event is empty")
    return lo


def log_pair(model, d, x):
    """log f(dx) + log f(d(1-x)) with unnormalised f; -inf off the window."""
    x = np.asarray(x, dtype=float)
    logu = model.log_unnormalized
    with np.errstate(invalid="ignore"):
        out = logu(d * x) + logu(d * (1.0 - x))
    out = np.where((x >= 0) & (x <= 1), out, -np.inf)
    return out if out.ndim else float(out)


class ZdLaw:
    """Quadrature state for one (model, d): leaves on the half window."""

    def __init__(self, model, d, quad=DEFAULT_QUAD):
        self.model = model
        self.d = float(d)
        self.quad = quad
        self.lo = window(model, d)
        half = 0.5 - self.lo
        edges = np.concatenate([
            np.linspace(self.lo, 0.5, quad.n_panels // 2 + 1),
            self.lo + half * quadrature.geometric_offsets(quad.endpoint_levels),
            0.5 - half * quadrature.geometric_offsets(quad.midpoint_levels),
        ])
        edges = np.clip(edges, self.lo, 0.5)

        def logf(x):
            return log_pair(model, self.d, x)

        self._logf = logf
        leaves = quadrature.adaptive_leaves(logf, edges, order=quad.order, rtol=quad.rtol)
        self.log_half = leaves.log_total
        if not np.isfinite(self.log_half):
            raise NonFinite(f"{model.spec}, d={d:g}: no finite quadrature panel")
        self.log_partition = LOG2 + self.log_half
        self.cumulative = quadrature.LogCumulative(logf, leaves)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = log_pair(self.model, self.d, x) - self.log_partition
        inside = (x >= self.lo * (1 - 1e-12)) & (x <= 1 - self.lo * (1 - 1e-12))
        out = np.where(inside, out, -np.inf)
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        left = np.minimum(x, 1.0 - x)
        with np.errstate(divide="ignore"):
            # normalised by the table's own total, so cdf(1/2) = 0.5 exactly
            mass = 0.5 * np.exp(self.cumulative.log_below(left) - self.cumulative.log_total)
        mass = np.minimum(mass, 0.5)
        out = np.where(x <= 0.5, mass, 1.0 - mass)
        out = np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, out))
        return out if out.ndim else float(out)


@lru_cache(maxsize=256)
def zd_law(model, d, quad=DEFAULT_QUAD):
    return ZdLaw(model, float(d), quad)


def log_partition(model, d, quad=DEFAULT_QUAD):
    """log ∫_0^1 f(dy) f(d(1-y)) dy for the unnormalised density."""
    return zd_law(model, d, quad).log_partition


def log_pdf_zd(model, d, x, quad=DEFAULT_QUAD):
    return zd_law(model, d, quad).log_pdf(x)


def pdf_zd(model, d, x, quad=DEFAULT_QUAD):
    return np.exp(log_pdf_zd(model, d, x, quad))


def cdf_zd(model, d, x, quad=DEFAULT_QUAD):
    return zd_law(model, d, quad).cdf(x)


def pdf_zd_derivative(model, d, x, quad=DEFAULT_QUAD):
    """d/dx f_{Z_d}(x) = d · f_{Z_d}(x) · [ρ(dx) - ρ(d(1-x))]."""
    x = np.asarray(x, dtype=float)
    dx = d * x
    dy = d * (1.0 - x)
    lo = model.support_low
    if np.any(~((x > 0) & (x < 1) & (dx > lo) & (dy > lo))):
        raise OutsideWindow(f"{model.spec}, d={d:g}: x must keep dx and d(1-x) above {lo}")
    bracket = model.score(dx) - model.score(dy)
    out = d * np.exp(log_pdf_zd(model, d, x, quad)) * bracket
    return out if np.ndim(out) else float(out)


def symmetric_grid(n_points, lo=0.0, power=5.0):
    """Mirror-symmetric grid on [0, 1] containing 1/2, graded towards lo, 1/2, 1-lo.

    The half grid is the image of a uniform grid in s under
    ``g(s) = s^p / (s^p + (1-s)^p)``, which clusters points at both ends of
    [lo, 1/2].  Returns ``(x, w)`` where ``w`` are trapezoid weights in s,
    ``w = h·g'(s)·(1/2 - lo)``.  Since g' vanishes at both ends, these weights
    integrate endpoint singularities like x^(-1/2) without special cases.
    When lo > 0 the points 0 and 1 carry zero weight and show the empty region.
    The grid has an odd number of points, at least ``n_points``.
    """
    if n_points < 16:
        raise ValueError("n_points must be >= 16")
    m = n_points // 2 + 1
    if lo > 0:
        m -= 1
    s = np.linspace(0.0, 1.0, m)
    h = s[1]
    den = s ** power + (1.0 - s) ** power
    g = s ** power / den
    gp = power * (s * (1.0 - s)) ** (power - 1.0) / den ** 2
    width = 0.5 - lo
    left = lo + width * g
    left[-1] = 0.5
    wl = h * gp * width
    wl[0] *= 0.5
    wl[-1] *= 0.5
    if lo > 0:
        left = np.concatenate([[0.0], left])
        wl = np.concatenate([[0.0], wl])
    x = np.concatenate([left, 1.0 - left[:-1][::-1]])
    w = np.concatenate([wl[:-1], [2 * wl[-1]], wl[:-1][::-1]])
    return x, w


@dataclass
class ConditionalDensityTable:
    d: float
    grid: np.ndarray
    log_pdf: np.ndarray
    pdf: np.ndarray
    log_partition: float
    weights: np.ndarray = None
    model_spec: str = ""
    window_low: float = 0.0
    meta: dict = field(default_factory=dict)

    def integral(self):
        """Trapezoid mass in the grading coordinate (see :func:`symmetric_grid`)."""
        with np.errstate(invalid="ignore"):
            terms = np.where(self.weights > 0, self.weights * self.pdf, 0.0)
        return float(terms.sum())

    def to_csv(self):
        buf = io.StringIO()
        header = {"d": self.d, "family": self.model_spec.split(":")[0],
                  "model": self.model_spec, "log_partition": self.log_partition}
        header.update(self.meta)
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "log_pdf", "pdf"])
        for x, lp, p in zip(self.grid, self.log_pdf, self.pdf):
            w.writerow([_fmt(x), _fmt(lp), _fmt(p)])
        return buf.getvalue()

    def to_json(self):
        return {"d": self.d, "model": self.model_spec, "log_partition": self.log_partition,
                "x": [float(v) for v in self.grid],
                "log_pdf": [_json_float(v) for v in self.log_pdf],
                "pdf": [_json_float(v) for v in self.pdf]}


def _fmt(v):
    return repr(float(v))


def _json_float(v):
    v = float(v)
    if np.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def pdf_zd_grid(model, d, n_points=128, refinement=5.0, quad=DEFAULT_QUAD):
    """Tabulate f_{Z_d} on a symmetric grid; ``refinement`` is the grading power."""
    law = zd_law(model, d, quad)
    grid, weights = symmetric_grid(n_points, law.lo, refinement)
    # evaluate the left half and mirror, so the table is exactly symmetric
    half = grid[grid <= 0.5]
    lp_half = np.atleast_1d(law.log_pdf(half))
    log_pdf = np.concatenate([lp_half, lp_half[:-1][::-1]])
    with np.errstate(over="ignore"):
        pdf = np.exp(log_pdf)
    return ConditionalDensityTable(d=float(d), grid=grid, log_pdf=log_pdf, pdf=pdf,
                                   log_partition=law.log_partition, weights=weights,
                                   model_spec=model.spec,
                                   window_low=law.lo)
