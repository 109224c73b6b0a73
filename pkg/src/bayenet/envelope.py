"""Piecewise-exponential upper hulls for log-concave densities.

Two entry points:

* build_envelope: a fixed hull from tangents at knots placed around a
  known mode using the local curvature scale s = |c''(mode)|^{-1/2}
  (knots at mode, mode +- s/2 and mode +- k*s for k = 1..K).  Sampling
  then loops propose/accept against the unchanged hull.
* ars_sample: adaptive rejection sampling for targets where only a
  rough bracket of the mode is known; the hull is refined with a tangent
  at every rejected point, with a chordal squeeze to avoid most target
  evaluations.

Both work on a support of (0, inf) or the whole line.  Hull masses and
segment inverse CDFs are computed in log space so far-out tangents never
overflow.
"""

import bisect
import math

import numpy as np


class EnvelopeError(ValueError):
    """A valid finite-mass hull cannot be built from the given inputs."""


class LogDensityTarget:
    """An unnormalized log density with derivative on (support_lower, inf)."""

    def __init__(self, log_f, dlog_f, support_lower=0.0, mode=None,
                 curvature=None):
        self.log_f = log_f
        self.dlog_f = dlog_f
        self.support_lower = float(support_lower)
        self.mode = mode
        self.curvature = curvature


def _segment_log_mass(lo, hi, slope, intercept):
    """log integral of exp(intercept + slope*x) over (lo, hi)."""
    if slope == 0.0:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise EnvelopeError("flat tangent on an unbounded segment")
        return intercept + math.log(hi - lo) if hi > lo else -math.inf
    if slope > 0.0:
        if not math.isfinite(hi):
            raise EnvelopeError("rising tangent on a right-unbounded segment")
        d = slope * (lo - hi)
        tail = math.log(-math.expm1(d)) if d < 0.0 else -math.inf
        return intercept + slope * hi + tail - math.log(slope)
    if not math.isfinite(lo):
        raise EnvelopeError("falling tangent on a left-unbounded segment")
    d = slope * (hi - lo)
    tail = math.log(-math.expm1(d)) if d < 0.0 else -math.inf
    return intercept + slope * lo + tail - math.log(-slope)


def _segment_inverse_cdf(lo, hi, slope, v):
    """Quantile v in (0, 1) of the normalized exponential on (lo, hi)."""
    if slope == 0.0:
        return lo + v * (hi - lo)
    d = slope * (hi - lo)
    if d > 1.0:
        # right-anchored form; exp(-d) < 1/e so no absorption into 1.0
        return hi + math.log(v + (1.0 - v) * math.exp(-d)) / slope
    # exact down to one-ulp slopes, where the tangent at the mode lands
    return lo + math.log1p(v * math.expm1(d)) / slope


class PiecewiseExpEnvelope:
    """Tangent hull: segment i carries exp(intercepts[i] + slopes[i]*x)."""

    def __init__(self, knots, slopes, intercepts, bounds, log_masses):
        self.knots = np.asarray(knots, dtype=float)
        self.slopes = np.asarray(slopes, dtype=float)
        self.intercepts = np.asarray(intercepts, dtype=float)
        self.bounds = np.asarray(bounds, dtype=float)
        self.log_masses = np.asarray(log_masses, dtype=float)
        m = self.log_masses.max()
        w = np.exp(self.log_masses - m)
        tot = w.sum()
        self.log_total_mass = m + math.log(tot)
        self._cum = np.cumsum(w / tot)

    def log_value(self, x):
        i = int(np.searchsorted(self.bounds, x, side="right")) - 1
        i = min(max(i, 0), len(self.slopes) - 1)
        return self.intercepts[i] + self.slopes[i] * x

    def propose(self, rng):
        """One draw from the normalized hull; returns (x, hull log value)."""
        u = rng.gen.random()
        i = int(np.searchsorted(self._cum, u, side="right"))
        i = min(i, len(self.slopes) - 1)
        v = rng.gen.random()
        while v <= 0.0:
            v = rng.gen.random()
        x = _segment_inverse_cdf(self.bounds[i], self.bounds[i + 1],
                                 self.slopes[i], v)
        return x, self.intercepts[i] + self.slopes[i] * x


def _hull_from_points(points, support_lower):
    """Assemble the hull from (x, log_f(x), dlog_f(x)) triples."""
    pts = sorted(points)
    kept = []
    for x, h, dh in pts:
        if not (math.isfinite(x) and math.isfinite(h) and math.isfinite(dh)):
            continue
        if kept and dh >= kept[-1][2] - 1e-12 * (1.0 + abs(kept[-1][2])):
            # log-concavity makes slopes nonincreasing; merge numerical ties
            continue
        kept.append((x, h, dh))
    if not kept:
        raise EnvelopeError("no usable knots")
    if kept[-1][2] >= 0.0:
        raise EnvelopeError("rightmost tangent slope must be negative")
    if not math.isfinite(support_lower) and kept[0][2] <= 0.0:
        raise EnvelopeError(
            "leftmost tangent slope must be positive on an unbounded support")
    xs = np.array([p[0] for p in kept])
    hs = np.array([p[1] for p in kept])
    ms = np.array([p[2] for p in kept])
    bs = hs - ms * xs
    bounds = [support_lower]
    for i in range(len(kept) - 1):
        z = (bs[i + 1] - bs[i]) / (ms[i] - ms[i + 1])
        bounds.append(min(max(z, xs[i]), xs[i + 1]))
    bounds.append(math.inf)
    masses = [_segment_log_mass(bounds[i], bounds[i + 1], ms[i], bs[i])
              for i in range(len(kept))]
    return PiecewiseExpEnvelope(xs, ms, bs, bounds, masses)


def build_envelope(target, K=2):
    """Fixed hull with knots placed from the mode and curvature.

    Needs target.mode finite and target.curvature < 0.  On a positive
    support, nonpositive knots are dropped and a knot at mode/2 is added
    if none remains below the mode.
    """
    x0 = target.mode
    c2 = target.curvature
    if x0 is None or not math.isfinite(x0):
        raise EnvelopeError("mode must be finite")
    if c2 is None or not c2 < 0.0:
        raise EnvelopeError("curvature at the mode must be negative")
    s = 1.0 / math.sqrt(-c2)
    knots = [x0, x0 - 0.5 * s, x0 + 0.5 * s]
    for k in range(1, K + 1):
        knots += [x0 - k * s, x0 + k * s]
    if math.isfinite(target.support_lower):
        knots = [k for k in knots if k > target.support_lower]
        if not any(k < x0 for k in knots):
            knots.append(target.support_lower + 0.5 * (x0 - target.support_lower))
    pts = [(x, target.log_f(x), target.dlog_f(x)) for x in sorted(set(knots))]
    return _hull_from_points(pts, target.support_lower)


def sample_from_envelope(target, env, rng, max_iter=100000, tally=None):
    """Rejection-sample the target under a fixed dominating hull.

    tally, when given, is a two-slot list accumulating [accepted,
    proposed] across calls; proposals falling outside the support count
    as rejections.
    """
    for _ in range(max_iter):
        x, ux = env.propose(rng)
        if tally is not None:
            tally[1] += 1
        if not x > target.support_lower:
            continue
        u = rng.gen.random()
        while u <= 0.0:
            u = rng.gen.random()
        if math.log(u) <= target.log_f(x) - ux:
            if tally is not None:
                tally[0] += 1
            return x
    raise RuntimeError("envelope sampler failed to accept")


def _squeeze(xs, hs, x):
    """Chordal lower bound of the log density; -inf outside the knot span."""
    if x <= xs[0] or x >= xs[-1]:
        return -math.inf
    i = bisect.bisect_right(xs, x) - 1
    t = (x - xs[i]) / (xs[i + 1] - xs[i])
    return hs[i] + t * (hs[i + 1] - hs[i])


def _step_out(points, target, max_steps=60):
    """Extend the knot set until the hull has integrable tails."""
    def add(x):
        h = target.log_f(x)
        dh = target.dlog_f(x)
        if math.isfinite(h) and math.isfinite(dh):
            points.append((x, h, dh))
            points.sort()
            return True
        return False

    for _ in range(max_steps):
        if points and points[-1][2] < 0.0:
            break
        x = points[-1][0]
        step = 1.0 + abs(x)
        if not add(x + step):
            break
    if not math.isfinite(target.support_lower):
        for _ in range(max_steps):
            if points and points[0][2] > 0.0:
                break
            x = points[0][0]
            if not add(x - (1.0 + abs(x))):
                break
    return points


def ars_sample(target, init_knots, rng, max_knots=64, max_iter=10000):
    """Adaptive rejection sampling (tangent hull with chordal squeeze)."""
    sl = target.support_lower
    points = []
    for x in sorted(set(float(k) for k in init_knots)):
        if not x > sl:
            continue
        h = target.log_f(x)
        dh = target.dlog_f(x)
        if math.isfinite(h) and math.isfinite(dh):
            points.append((x, h, dh))
    if not points:
        raise EnvelopeError("no usable initial knots")
    points = _step_out(points, target)

    env = None
    for _ in range(max_iter):
        if env is None:
            env = _hull_from_points(points, sl)
            xs = [p[0] for p in points]
            hs = [p[1] for p in points]
        x, ux = env.propose(rng)
        if not x > sl:
            continue
        u = rng.gen.random()
        while u <= 0.0:
            u = rng.gen.random()
        logw = math.log(u)
        if logw <= _squeeze(xs, hs, x) - ux:
            return x
        hx = target.log_f(x)
        if logw <= hx - ux:
            return x
        if len(points) < max_knots and math.isfinite(hx):
            dhx = target.dlog_f(x)
            if math.isfinite(dhx):
                points.append((x, hx, dhx))
                points.sort()
                env = None
    raise RuntimeError("adaptive rejection sampler failed to accept")
