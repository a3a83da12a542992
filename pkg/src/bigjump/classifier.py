"""Type I / Type II classification of a density model.

The verdict combines four finite-probe surrogates of limiting statements:

* the eventual sign L of (log f)'' on a geometric tail grid,
* growth of the score gap ``d·(ρ(dx) - ρ(d(1-x)))`` along a d ladder,
* monotonicity of the hazard rate f/F̄ on the tail grid,
* heavy versus light tail from the eventual slope of log f(t) + s·t.

L = +1 with a diverging gap gives Type I (mass splits between 0 and 1),
L = -1 with a diverging gap gives Type II (mass at 1/2), and L = 0 gives the
uniform law.  A bounded gap leaves the question open unless the caller
supplies a pointwise-vanishing certificate computed from the density of Z_d
itself, in which case the weaker route (pointwise vanishing + L) is used.
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import OutsideSupport
from .models import CURVATURE_ZERO_TOL, Family


class LSign(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"
    ZERO = "Zero"
    UNDETERMINED = "Undetermined"


class Divergence(enum.Enum):
    TO_PLUS_INF = "ToPlusInf"
    TO_MINUS_INF = "ToMinusInf"
    BOUNDED = "Bounded"
    INCONCLUSIVE = "Inconclusive"


class HazardTrend(enum.Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    CONSTANT = "Constant"
    MIXED = "Mixed"


class TailClass(enum.Enum):
    HEAVY = "Heavy"
    LIGHT = "Light"
    UNDETERMINED = "Undetermined"


class Behaviour(enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    UNIFORM_LIMIT = "UniformLimit"
    THEOREM_INAPPLICABLE = "TheoremInapplicable"


class Certificate(enum.Enum):
    VANISHING = "vanishing"
    NON_VANISHING = "non_vanishing"
    INCONCLUSIVE = "inconclusive"


def _default_ladder():
    return tuple(10.0 * 2.0 ** k for k in range(41))


@dataclass(frozen=True)
class ProbeConfig:
    """Where "eventually" is looked for.

    The tail grid is ``t_start * t_factor**k`` for k < n_probes.  The d ladder
    reaches 10·2^40 ≈ 1.1e13 because logarithmic gap growth (lognormal-type
    tails) needs that range to clear ``growth_ratio``; scores are closed form,
    so the range costs nothing.
    """

    t_start: float = 10.0
    t_factor: float = 2.0
    n_probes: int = 12
    zero_tol: float = CURVATURE_ZERO_TOL
    d_ladder: tuple = field(default_factory=_default_ladder)
    x_probes: tuple = (0.1, 0.25, 0.4)
    growth_ratio: float = 10.0
    bounded_variation: float = 0.1
    hazard_rtol: float = 1e-8
    tail_s: tuple = tuple(2.0 ** -k for k in range(1, 21))
    tail_window: tuple = (1e12, 1e15)

    def __post_init__(self):
        if not self.t_factor > 1:
            raise ValueError("t_factor must exceed 1")
        if self.n_probes < 8:
            raise ValueError("n_probes must be >= 8")
        ladder = np.asarray(self.d_ladder, dtype=float)
        if ladder.size < 2 or np.any(np.diff(ladder) <= 0):
            raise ValueError("d_ladder must be strictly increasing")
        if not all(0 < x < 0.5 for x in self.x_probes):
            raise ValueError("x_probes must lie strictly inside (0, 1/2)")

    def tail_grid(self, model):
        start = max(self.t_start, 2.0 * model.support_low)
        return start * self.t_factor ** np.arange(self.n_probes, dtype=float)


DEFAULT_PROBE = ProbeConfig()


def estimate_L(model, probe=DEFAULT_PROBE):
    """Eventual sign of the log-curvature on the tail grid."""
    curv = np.asarray(model.curvature(probe.tail_grid(model)), dtype=float)
    return _sign_verdict(curv, probe.zero_tol)


def _sign_verdict(curv, tol):
    if np.all(np.abs(curv) < tol):
        return LSign.ZERO
    if np.all(curv > tol):
        return LSign.PLUS
    if np.all(curv < -tol):
        return LSign.MINUS
    return LSign.UNDETERMINED


def divergence_gap(model, d, x):
    """Signed gap d·(ρ(dx) - ρ(d(1-x))); the derivative of f_{Z_d} carries its sign."""
    x = np.asarray(x, dtype=float)
    lo = model.support_low
    dx, dy = d * x, d * (1.0 - x)
    if np.any(~((dx > lo) & (dy > lo))):
        raise OutsideSupport(f"{model.spec}: d={d:g}, x={x} leaves the support")
    out = d * (model.score(dx) - model.score(dy))
    return out if np.ndim(out) else float(out)


@dataclass
class DivergenceProbe:
    x: float
    d: list
    gap: list
    verdict: Divergence


def _gap_verdict(gaps, probe):
    g = np.asarray(gaps, dtype=float)
    if g.size < 2:
        return Divergence.INCONCLUSIVE
    a = np.abs(g)
    if np.all(a <= 1e-12 * max(1.0, a.max())) or np.all(a == 0):
        return Divergence.BOUNDED
    same_sign = np.all(g > 0) or np.all(g < 0)
    if same_sign and np.all(np.diff(a) >= 0) and a[-1] > probe.growth_ratio * a[0]:
        return Divergence.TO_PLUS_INF if g[-1] > 0 else Divergence.TO_MINUS_INF
    top = a[a.size // 2:]
    if (top.max() - top.min()) < probe.bounded_variation * np.abs(top).mean():
        return Divergence.BOUNDED
    return Divergence.INCONCLUSIVE


def check_divergence(model, probe=DEFAULT_PROBE):
    """Per-probe and aggregate verdicts for the gap along the d ladder.

    Ladder entries where dx falls outside the support are skipped.  The
    aggregate is the common verdict when all probes agree, else Inconclusive.
    """
    details = []
    for x in probe.x_probes:
        ds, gaps = [], []
        for d in probe.d_ladder:
            try:
                gaps.append(divergence_gap(model, d, x))
            except OutsideSupport:
                continue
            ds.append(float(d))
        details.append(DivergenceProbe(float(x), ds, gaps, _gap_verdict(gaps, probe)))
    verdicts = {p.verdict for p in details}
    aggregate = verdicts.pop() if len(verdicts) == 1 else Divergence.INCONCLUSIVE
    return aggregate, details


def hazard_trend(model, probe=DEFAULT_PROBE, return_values=False):
    """Monotonicity of f/F̄ on the tail grid."""
    t = probe.tail_grid(model)
    h = np.asarray(model.hazard(t), dtype=float)
    diff = np.diff(h)
    scale = probe.hazard_rtol * np.abs(h).max()
    if np.all(np.abs(h - h[0]) <= scale):
        trend = HazardTrend.CONSTANT
    elif np.all(diff > scale):
        trend = HazardTrend.INCREASING
    elif np.all(diff < -scale):
        trend = HazardTrend.DECREASING
    else:
        trend = HazardTrend.MIXED
    return (trend, t, h) if return_values else trend


def tail_class(model, probe=DEFAULT_PROBE):
    """Light if log f(t) + s·t eventually decreases for some probed s > 0.

    The slope of that log-integrand is ``ρ(t) + s``.  It is probed on a far
    tail window where every s in ``probe.tail_s`` has settled; Heavy when the
    slope is positive there for every s.
    """
    t = np.geomspace(*probe.tail_window, 8)
    t = t[t > model.support_low]
    rho = np.asarray(model.score(t), dtype=float)
    signs = [np.sign(rho + s) for s in probe.tail_s]
    if any(np.all(sg < 0) for sg in signs):
        return TailClass.LIGHT
    if all(np.all(sg > 0) for sg in signs):
        return TailClass.HEAVY
    return TailClass.UNDETERMINED


@dataclass
class ClassificationReport:
    model: str
    L: LSign
    divergence: Divergence
    divergence_probes: list
    hazard_trend: HazardTrend
    tail_class: TailClass
    behaviour: Behaviour
    notes: list
    curvature_probes: dict = field(default_factory=dict)
    hazard_probes: dict = field(default_factory=dict)
    certificate: Certificate = None
    consistent: bool = True

    def to_dict(self):
        return {
            "model": self.model,
            "L": self.L.value,
            "divergence": {
                "aggregate": self.divergence.value,
                "probes": [{"x": p.x, "verdict": p.verdict.value, "d": p.d, "gap": p.gap}
                           for p in self.divergence_probes],
            },
            "hazard_trend": self.hazard_trend.value,
            "tail_class": self.tail_class.value,
            "behaviour": self.behaviour.value,
            "certificate": self.certificate.value if self.certificate else None,
            "consistent": self.consistent,
            "notes": list(self.notes),
            "curvature_probes": self.curvature_probes,
            "hazard_probes": self.hazard_probes,
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


_EXPECTED_HAZARD = {LSign.PLUS: HazardTrend.DECREASING, LSign.MINUS: HazardTrend.INCREASING,
                    LSign.ZERO: HazardTrend.CONSTANT}


def classify(model, probe=DEFAULT_PROBE, pointwise_certificate=None):
    """Combine the sub-verdicts into a behaviour type.

    ``pointwise_certificate`` is the result of
    :func:`bigjump.diagnostics.pointwise_vanishing`.  It is only consulted when
    the gap condition does not decide the case, and its use is recorded in
    ``notes``.
    """
    if pointwise_certificate is not None:
        pointwise_certificate = Certificate(getattr(pointwise_certificate, "value",
                                                    pointwise_certificate))
    L = estimate_L(model, probe)
    aggregate, details = check_divergence(model, probe)
    trend, t, h = hazard_trend(model, probe, return_values=True)
    tails = tail_class(model, probe)
    tgrid = probe.tail_grid(model)
    notes = []
    consistent = True

    expected = _EXPECTED_HAZARD.get(L)
    if expected is not None and trend is not expected:
        consistent = False
        notes.append(f"internal inconsistency: L={L.value} predicts hazard "
                     f"{expected.value}, observed {trend.value}")

    diverges = aggregate in (Divergence.TO_PLUS_INF, Divergence.TO_MINUS_INF)
    # L=+1 makes ρ increasing, so the gap is negative for x < 1/2; L=-1 the reverse
    if diverges and L is LSign.PLUS and aggregate is not Divergence.TO_MINUS_INF:
        consistent = False
        notes.append("internal inconsistency: log-convex tail with a positive gap")
    if diverges and L is LSign.MINUS and aggregate is not Divergence.TO_PLUS_INF:
        consistent = False
        notes.append("internal inconsistency: log-concave tail with a negative gap")

    if L is LSign.ZERO:
        behaviour = Behaviour.UNIFORM_LIMIT
        notes.append("L=0: exponential tail, Z_d is uniform on [0,1]; reported only "
                     "for exactly exponential tails")
    elif L is LSign.UNDETERMINED:
        behaviour = Behaviour.THEOREM_INAPPLICABLE
        notes.append("curvature sign not eventually constant on the probe grid; "
                     "no verdict without the limit L")
    elif diverges:
        behaviour = Behaviour.TYPE_I if L is LSign.PLUS else Behaviour.TYPE_II
        notes.append(f"gap condition holds ({aggregate.value}) with L={L.value}")
    elif pointwise_certificate is Certificate.VANISHING:
        behaviour = Behaviour.TYPE_I if L is LSign.PLUS else Behaviour.TYPE_II
        notes.append(f"gap condition {aggregate.value}; verdict via pointwise-vanishing "
                     "certificate for f_{Z_d} on (0,1/2)")
    else:
        behaviour = Behaviour.THEOREM_INAPPLICABLE
        if aggregate is Divergence.BOUNDED:
            notes.append("divergence condition bounded")
        else:
            notes.append(f"divergence condition {aggregate.value}")
        if model.family is Family.GAMMA:
            notes[-1] += (f"; law of Z_d is Beta({model.a:g},{model.a:g}), "
                          "d-independent")
        if pointwise_certificate is not None:
            notes.append(f"pointwise certificate: {pointwise_certificate.value}")

    return ClassificationReport(
        model=model.spec, L=L, divergence=aggregate, divergence_probes=details,
        hazard_trend=trend, tail_class=tails, behaviour=behaviour, notes=notes,
        curvature_probes={"t": [float(v) for v in tgrid],
                          "curvature": [float(v) for v in model.curvature(tgrid)]},
        hazard_probes={"t": [float(v) for v in t], "hazard": [float(v) for v in h]},
        certificate=pointwise_certificate, consistent=consistent,
    )
