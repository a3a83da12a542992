"""Log-space Gauss-Legendre quadrature.

Every routine here takes a vectorised callable returning ``log g(t)`` and
returns ``log ∫ g``.  Values are never exponentiated without first
subtracting the panel maximum, so integrands of size ``exp(-1e8)`` are fine.

The adaptive driver works on a whole batch of panels at once and keeps the
accepted leaf panels; :class:`LogCumulative` turns those leaves into a
cumulative table that can be evaluated at arbitrary points.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

NEG_INF = -np.inf


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nodes and log-weights of the ``order``-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    lw = np.log(w)
    lw.setflags(write=False)
    return x, lw


def _lse(a, axis=None):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = logsumexp(a, axis=axis)
    return out


def panel_log_integrals(logf, a, b, order=8):
    """Fixed-order rule on each panel ``[a[i], b[i]]``; returns log integrals."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return np.empty(0)
    x, lw = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid[:, None] + half[:, None] * x[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(logf(t), dtype=float)
        vals = np.where(np.isnan(vals), NEG_INF, vals)
        out = _lse(vals + lw[None, :], axis=1) + np.log(half)
    return out


@dataclass(frozen=True)
class Leaves:
    """Accepted panels of an adaptive run, sorted and contiguous."""

    lo: np.ndarray
    hi: np.ndarray
    log_int: np.ndarray

    @property
    def log_total(self):
        return float(_lse(self.log_int)) if self.log_int.size else NEG_INF

    def __len__(self):
        return self.lo.size


def _log_abs_diff(lw, lh):
    # log |exp(lw) - exp(lh)| without overflow; both -inf means no error
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        delta = lw - lh
        out = lh + np.log(np.abs(np.expm1(delta)))
    both_empty = np.isneginf(lw) & np.isneginf(lh)
    out = np.where(both_empty, NEG_INF, out)
    return np.where(np.isnan(out), np.inf, out)


def adaptive_leaves(logf, edges, order=8, rtol=1e-11, atol_rel=1e-14, max_depth=60,
                    per_panel=False, max_pending=1 << 21):
    """Adaptive bisection over the panels defined by ``edges``.

    A panel is accepted when its one-panel estimate agrees with the sum over
    its two halves to ``rtol`` relative, or when the disagreement is below
    ``atol_rel`` times a reference mass: the whole integral by default, or the
    initial panel the piece descends from when ``per_panel`` is set (for
    callers that need every initial panel to relative accuracy).  Accepted
    panels are stored as their two halves.
    """
    edges = np.unique(np.asarray(edges, dtype=float))
    if edges.size < 2:
        return Leaves(np.empty(0), np.empty(0), np.empty(0))
    a = edges[:-1]
    b = edges[1:]
    group = np.arange(a.size) if per_panel else np.zeros(a.size, dtype=int)
    n_groups = a.size if per_panel else 1
    whole = panel_log_integrals(logf, a, b, order)
    done_lo, done_hi, done_val = [], [], []
    log_rtol = np.log(rtol)
    log_atol_rel = np.log(atol_rel) if atol_rel > 0 else NEG_INF
    log_done = np.full(n_groups, NEG_INF)
    for depth in range(max_depth + 1):
        m = 0.5 * (a + b)
        left = panel_log_integrals(logf, a, m, order)
        right = panel_log_integrals(logf, m, b, order)
        halves = np.logaddexp(left, right)
        ref = log_done.copy()
        with np.errstate(invalid="ignore"):
            np.logaddexp.at(ref, group, halves)
        err = _log_abs_diff(whole, halves)
        tol = np.maximum(log_rtol + halves, log_atol_rel + ref[group])
        last = depth == max_depth or a.size > max_pending
        ok = (err <= tol) | last | (m <= a) | (m >= b)
        if ok.any():
            done_lo += [a[ok], m[ok]]
            done_hi += [m[ok], b[ok]]
            done_val += [left[ok], right[ok]]
            with np.errstate(invalid="ignore"):
                np.logaddexp.at(log_done, group[ok], halves[ok])
        bad = ~ok
        if not bad.any():
            break
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        whole = np.concatenate([left[bad], right[bad]])
        group = np.concatenate([group[bad], group[bad]])
    lo = np.concatenate(done_lo)
    hi = np.concatenate(done_hi)
    val = np.concatenate(done_val)
    # bisecting a one-ulp panel leaves an empty half; it carries no mass
    keep = hi > lo
    lo, hi, val = lo[keep], hi[keep], val[keep]
    order_idx = np.argsort(lo, kind="stable")
    return Leaves(lo[order_idx], hi[order_idx], val[order_idx])


def log_integrate(logf, edges, **kw):
    """log ∫ over ``[edges[0], edges[-1]]``, with ``edges`` as initial panels."""
    return adaptive_leaves(logf, edges, **kw).log_total


def geometric_offsets(levels, base=2.0):
    """``base**-k`` for k = levels..1, plus 0 and 1; used to grade panels."""
    return np.concatenate([[0.0], base ** -np.arange(levels, 0, -1.0), [1.0]])


def tail_leaves(logf, x, scale=None, rel_cut=1e-12, levels=200, block=8,
                max_blocks=1100, **kw):
    """Leaves covering ``[x, T]`` with ``T`` large enough that ``∫_T^∞ < rel_cut``.

    Panels are ``x + w*2**k``: graded down to ``w*2**-levels`` near ``x`` and
    growing geometrically above it, so both very sharp and very slow decay are
    resolved without knowing the scale in advance.  Blocks of ``block``
    doublings are added until the newest block contributes less than
    ``rel_cut`` of the running total while the integrand is decreasing.
    """
    w = float(scale) if scale is not None else max(1.0, abs(float(x)))
    first = x + w * geometric_offsets(levels)
    parts = [adaptive_leaves(logf, first, **kw)]
    total = parts[0].log_total
    k = 0
    log_cut = np.log(rel_cut)
    while k < max_blocks:
        edges = x + w * 2.0 ** np.arange(k, k + block + 1, dtype=float)
        if not np.isfinite(edges[-1]) or edges[-1] > 1e300:
            break
        leaves = adaptive_leaves(logf, edges, **kw)
        parts.append(leaves)
        block_total = leaves.log_total
        total = np.logaddexp(total, block_total)
        k += block
        ends = np.asarray(logf(edges[-2:]), dtype=float)
        decreasing = ends[1] < ends[0] or np.all(np.isneginf(ends))
        if decreasing and (np.isneginf(block_total) or block_total - total < log_cut):
            break
    return Leaves(
        np.concatenate([p.lo for p in parts]),
        np.concatenate([p.hi for p in parts]),
        np.concatenate([p.log_int for p in parts]),
    )


def log_integrate_tail(logf, x, **kw):
    """log ∫_x^∞ of ``exp(logf)``."""
    return tail_leaves(logf, x, **kw).log_total


class LogCumulative:
    """Cumulative integrals over a set of contiguous leaves.

    ``log_below(z)`` is ``log ∫_start^z`` and ``log_above(z)`` is
    ``log ∫_z^end``; the part of a leaf cut by ``z`` uses a 16-point rule,
    which is accurate because the adaptive leaves are already small where
    the integrand varies quickly.
    """

    partial_order = 16

    def __init__(self, logf, leaves):
        self.logf = logf
        self.lo = leaves.lo
        self.hi = leaves.hi
        self.log_int = leaves.log_int
        self.start = float(self.lo[0])
        self.end = float(self.hi[-1])
        zero = np.array([NEG_INF])
        self.cum_left = np.concatenate([zero, np.logaddexp.accumulate(self.log_int)])
        rev = np.logaddexp.accumulate(self.log_int[::-1])[::-1]
        self.cum_right = np.concatenate([rev, zero])
        self.log_total = float(self.cum_left[-1])

    def _locate(self, z):
        i = np.searchsorted(self.lo, z, side="right") - 1
        return np.clip(i, 0, self.lo.size - 1)

    def log_below(self, z):
        z = np.asarray(z, dtype=float)
        flat = np.clip(z.ravel(), self.start, self.end)
        i = self._locate(flat)
        part = panel_log_integrals(self.logf, self.lo[i], flat, self.partial_order)
        part = np.where(flat > self.lo[i], part, NEG_INF)
        out = np.logaddexp(self.cum_left[i], part)
        out = np.where(z.ravel() <= self.start, NEG_INF, out)
        out = np.where(z.ravel() >= self.end, self.log_total, out)
        return out.reshape(z.shape)

    def log_above(self, z):
        z = np.asarray(z, dtype=float)
        flat = np.clip(z.ravel(), self.start, self.end)
        i = self._locate(flat)
        part = panel_log_integrals(self.logf, flat, self.hi[i], self.partial_order)
        part = np.where(flat < self.hi[i], part, NEG_INF)
        out = np.logaddexp(self.cum_right[i + 1], part)
        out = np.where(z.ravel() >= self.end, NEG_INF, out)
        out = np.where(z.ravel() <= self.start, self.log_total, out)
        return out.reshape(z.shape)
