"""Parametric densities on the half line, evaluated in log space.

Each family supplies a closed-form unnormalised log-density together with its
first two derivatives.  The normalising constant is obtained by quadrature the
first time something needs it (tails, hazards, sampling); the conditional law
of ``X1/d`` given ``X1 + X2 = d`` never does, because the constant cancels.

Model specs are short strings such as ``gamma:a=2`` or ``pareto:alpha=2,t0=1``;
see :func:`parse_model`.
"""

import enum
import math
import threading

import numpy as np

from . import quadrature
from .errors import OutsideSupport, ParamOutOfRange

# |curvature| below this counts as zero, so the exponential family is exact
CURVATURE_ZERO_TOL = 1e-12


class Family(enum.Enum):
    GAMMA = "gamma"
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"
    PARETO = "pareto"
    EXPSQRT_PLUS = "expsqrt:+"
    EXPSQRT_MINUS = "expsqrt:-"
    EXPONENTIAL = "exp"


def _short(v):
    # shortest form that parses back to the same float
    text = f"{v:g}"
    return text if float(text) == v else repr(v)


class DensityModel:
    """Base class.  Subclasses define ``_logu``, ``_score`` and ``_curv``.

    Instances are immutable and hashable; ``log_norm`` is computed at most
    once, under a lock.
    """

    family = None
    param_names = ()
    defaults = {}
    description = ""

    def __init__(self, **params):
        unknown = set(params) - set(self.param_names)
        if unknown:
            raise ParamOutOfRange(sorted(unknown)[0], params[sorted(unknown)[0]],
                                  f"known parameters {self.param_names}")
        values = dict(self.defaults)
        values.update(params)
        for name in self.param_names:
            if name not in values:
                raise ParamOutOfRange(name, None, "required parameter")
            v = values[name]
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise ParamOutOfRange(name, v, "a real number")
            values[name] = float(v)
            if not math.isfinite(values[name]):
                raise ParamOutOfRange(name, v, "finite")
        self._params = tuple((n, values[n]) for n in self.param_names)
        self._check()
        self._log_norm = None
        self._lock = threading.Lock()
        self._check_eventually_decreasing()

    # -- identity -------------------------------------------------------
    @property
    def params(self):
        return dict(self._params)

    def __getattr__(self, name):
        # parameter access as attributes: model.alpha, model.t0, ...
        params = self.__dict__.get("_params", ())
        for n, v in params:
            if n == name:
                return v
        raise AttributeError(name)

    def __setattr__(self, name, value):
        if not name.startswith("_") or name in self.param_names:
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, name, value)

    def __eq__(self, other):
        return type(self) is type(other) and self._params == other._params

    def __hash__(self):
        return hash((type(self).__name__, self._params))

    def __repr__(self):
        args = ", ".join(f"{n}={v!r}" for n, v in self._params)
        return f"{type(self).__name__}({args})"

    @property
    def spec(self):
        """Canonical spec string, parseable by :func:`parse_model`."""
        name = self.family.value
        if not self._params:
            return name
        return name + ":" + ",".join(f"{n}={_short(v)}" for n, v in self._params)

    @property
    def support_low(self):
        return 0.0

    def _check(self):
        pass

    def _check_eventually_decreasing(self):
        probes = max(self.support_low, 1.0) * np.geomspace(10.0, 1e8, 16)
        if not np.all(self._score(probes) < 0):
            raise ParamOutOfRange(self.param_names[0] if self.param_names else "family",
                                  None, "an eventually decreasing density")

    # -- log-density and derivatives ------------------------------------
    def _in_support(self, t):
        lo = self.support_low
        # grid points like d*(t0/d) can land one ulp below t0
        return t >= lo * (1.0 - 1e-12)

    def log_unnormalized(self, t):
        """Closed-form log-density without the normalising constant."""
        t = np.asarray(t, dtype=float)
        inside = self._in_support(t)
        tt = np.where(inside, np.maximum(t, self.support_low), 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(inside, self._logu(tt), -np.inf)
        return out if out.ndim else float(out)

    @property
    def log_norm(self):
        """log C with C·∫ unnormalised density = 1."""
        if self._log_norm is None:
            with self._lock:
                if self._log_norm is None:
                    self._log_norm = -quadrature.log_integrate_tail(
                        self.log_unnormalized, self.support_low)
        return self._log_norm

    def log_density(self, t):
        return self.log_unnormalized(t) + self.log_norm

    def _interior(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(~(t > self.support_low)):
            raise OutsideSupport(f"{self.spec}: need t > {self.support_low}")
        return t

    def score(self, t):
        """f'(t)/f(t)."""
        out = self._score(self._interior(t))
        return out if np.ndim(out) else float(out)

    def curvature(self, t):
        """(log f)''(t)."""
        out = self._curv(self._interior(t))
        return out if np.ndim(out) else float(out)

    # -- tails ----------------------------------------------------------
    def _check_tail_arg(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~(x >= self.support_low * (1.0 - 1e-12))):
            raise OutsideSupport(f"{self.spec}: need x >= {self.support_low}")
        return x

    def log_sf(self, x):
        """log P(X > x), by log-space quadrature of the upper tail."""
        x = self._check_tail_arg(x)
        if x.ndim == 0:
            return self._log_sf_scalar(float(x))
        return log_sf_many(self, x)

    def _log_sf_scalar(self, x):
        if x <= self.support_low:
            return 0.0
        return min(0.0, quadrature.log_integrate_tail(self.log_unnormalized, x) + self.log_norm)

    def hazard(self, x):
        """Failure rate f(x)/P(X > x)."""
        x = self._check_tail_arg(x)
        out = np.exp(self.log_density(x) - self.log_sf(x))
        return out if np.ndim(out) else float(out)

    # -- sampling hooks ---------------------------------------------------
    def inverse_sf(self, q):
        """Closed-form quantile of the upper tail, or None if unavailable."""
        return None


def log_sf_many(model, x):
    """Vectorised log P(X > x).

    Points are sorted; the tail above the largest is integrated once and the
    gaps between neighbours are accumulated from the top down, so no value is
    obtained by subtracting two nearly equal numbers.
    """
    x = np.asarray(x, dtype=float)
    flat = np.maximum(x.ravel(), model.support_low)
    order = np.argsort(flat, kind="stable")
    xs = flat[order]
    uniq, inverse = np.unique(xs, return_inverse=True)
    logu = model.log_unnormalized
    top = quadrature.log_integrate_tail(logu, uniq[-1])
    if uniq.size > 1:
        gaps = _gap_integrals(logu, uniq)
        tail = np.logaddexp.accumulate(np.concatenate([[top], gaps[::-1]]))[::-1]
    else:
        tail = np.array([top])
    vals = tail[inverse] + model.log_norm
    vals = np.where(uniq[inverse] <= model.support_low, 0.0, np.minimum(vals, 0.0))
    out = np.empty_like(flat)
    out[order] = vals
    return out.reshape(x.shape)


def _gap_integrals(logu, pts):
    # one adaptive run over all gaps, leaves summed back per gap
    leaves = quadrature.adaptive_leaves(logu, pts, per_panel=True)
    idx = np.searchsorted(pts, leaves.lo, side="right") - 1
    starts = np.searchsorted(idx, np.arange(pts.size - 1))
    with np.errstate(invalid="ignore"):
        return np.logaddexp.reduceat(leaves.log_int, starts)


class Gamma(DensityModel):
    family = Family.GAMMA
    param_names = ("a",)
    description = "f(t) ∝ t^(a-1) e^(-t), t > 0"

    def _check(self):
        if not self.a > 0:
            raise ParamOutOfRange("a", self.a, "a > 0")

    def _logu(self, t):
        a = self.a
        if a == 1.0:
            return -t
        return (a - 1.0) * np.log(t) - t

    def _score(self, t):
        return (self.a - 1.0) / t - 1.0

    def _curv(self, t):
        return -(self.a - 1.0) / t ** 2


class WeibullType(DensityModel):
    family = Family.WEIBULL
    param_names = ("alpha",)
    description = "f(t) ∝ e^(-t^alpha), t > 0"

    def _check(self):
        if not self.alpha > 0:
            raise ParamOutOfRange("alpha", self.alpha, "alpha > 0")

    def _logu(self, t):
        return -t ** self.alpha

    def _score(self, t):
        a = self.alpha
        return -a * t ** (a - 1.0)

    def _curv(self, t):
        a = self.alpha
        return -a * (a - 1.0) * t ** (a - 2.0)


class LognormalType(DensityModel):
    family = Family.LOGNORMAL
    param_names = ("t0",)
    defaults = {"t0": 0.01}
    description = "f(t) ∝ t^-1 e^(-(log t)^2), t > t0"

    def _check(self):
        if not self.t0 > 0:
            raise ParamOutOfRange("t0", self.t0, "t0 > 0")

    @property
    def support_low(self):
        return self.t0

    def _logu(self, t):
        lt = np.log(t)
        return -lt - lt * lt

    def _score(self, t):
        return -(1.0 + 2.0 * np.log(t)) / t

    def _curv(self, t):
        return (2.0 * np.log(t) - 1.0) / t ** 2


class ParetoTail(DensityModel):
    family = Family.PARETO
    param_names = ("alpha", "t0")
    defaults = {"t0": 1.0}
    description = "f(t) = (alpha-1) t0^(alpha-1) t^-alpha, t >= t0"

    def _check(self):
        if not self.alpha > 1:
            raise ParamOutOfRange("alpha", self.alpha, "alpha > 1")
        if not self.t0 > 0:
            raise ParamOutOfRange("t0", self.t0, "t0 > 0")

    @property
    def support_low(self):
        return self.t0

    def _logu(self, t):
        return -self.alpha * np.log(t)

    def _score(self, t):
        return -self.alpha / t

    def _curv(self, t):
        return self.alpha / t ** 2

    def inverse_sf(self, q):
        return self.t0 * q ** (-1.0 / (self.alpha - 1.0))


class ExpSqrtPlus(DensityModel):
    family = Family.EXPSQRT_PLUS
    description = "f(t) ∝ e^(-t + sqrt t), t > 0 (log-concave, light)"

    def _logu(self, t):
        return -t + np.sqrt(t)

    def _score(self, t):
        return -1.0 + 0.5 / np.sqrt(t)

    def _curv(self, t):
        return -0.25 * t ** -1.5


class ExpSqrtMinus(DensityModel):
    family = Family.EXPSQRT_MINUS
    description = "f(t) ∝ e^(-t - sqrt t), t > 0 (log-convex, light)"

    def _logu(self, t):
        return -t - np.sqrt(t)

    def _score(self, t):
        return -1.0 - 0.5 / np.sqrt(t)

    def _curv(self, t):
        return 0.25 * t ** -1.5


class Exponential(DensityModel):
    family = Family.EXPONENTIAL
    description = "f(t) = e^(-t), t > 0"

    def _logu(self, t):
        return -t

    def _score(self, t):
        return np.full(np.shape(t), -1.0) if np.ndim(t) else -1.0

    def _curv(self, t):
        return np.zeros(np.shape(t)) if np.ndim(t) else 0.0

    def inverse_sf(self, q):
        return -np.log(q)


FAMILIES = {cls.family: cls for cls in
            (Gamma, WeibullType, LognormalType, ParetoTail, ExpSqrtPlus, ExpSqrtMinus,
             Exponential)}

_ALIASES = {"expsqrt+": Family.EXPSQRT_PLUS, "expsqrt-": Family.EXPSQRT_MINUS,
            "exponential": Family.EXPONENTIAL}


def make_model(family, params=None):
    """Build a validated model from a :class:`Family` (or its name) and params."""
    if not isinstance(family, Family):
        key = str(family).lower()
        family = _ALIASES.get(key) or Family(key)
    return FAMILIES[family](**(params or {}))


def parse_model(spec):
    """Parse ``family:key=val,...`` (or ``expsqrt:+`` / ``expsqrt:-``)."""
    spec = spec.strip()
    if spec in ("expsqrt:+", "expsqrt:-"):
        return make_model(Family(spec))
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {item!r} in model spec {spec!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise ValueError(f"parameter {key!r} is not a number: {val!r}") from None
    try:
        return make_model(name, params)
    except ValueError as exc:
        if isinstance(exc, ParamOutOfRange):
            raise
        raise ValueError(f"unknown model family {name!r}") from None


def model_schema():
    """Machine-readable description of the built-in families."""
    rows = []
    for fam, cls in FAMILIES.items():
        rows.append({
            "name": fam.value,
            "class": cls.__name__,
            "params": list(cls.param_names),
            "defaults": dict(cls.defaults),
            "support": "[t0, inf)" if "t0" in cls.param_names else "(0, inf)",
            "density": cls.description,
        })
    return rows


# functional aliases
def log_density(model, t):
    return model.log_density(t)


def score(model, t):
    return model.score(t)


def curvature(model, t):
    return model.curvature(t)


def log_sf(model, x):
    return model.log_sf(x)


def hazard(model, x):
    return model.hazard(x)
