"""The tail-tilted density family used by the penalty-rate conditionals.

Members have unnormalized density

    f(x) = Phi(-x)^(-q) x^(a-1) exp(-b x^2 - c x - d/x),    x > 0,

with integer q >= 0.  The reciprocal normal tail makes f heavier than
its power-exponential factor, so naive Gaussian-style envelopes fail;
instead:

* is_logconcave gives sufficient conditions under which f is integrable
  and log-concave (for q >= 1: a >= 1, b >= q/2, c > 0, d = 0; for
  q = 0 the classical power-exponential conditions).
* mode_bounds returns a closed-form bracket of the mode built from the
  two-sided hazard inequality x < phi(x)/Phi(-x) < x + 1/x.
* sample_tilted draws exactly, dispatching q = 0 members to the matching
  named sampler and q >= 1 members to adaptive rejection sampling seeded
  with knots at the mode bracket.
"""

import math
from dataclasses import dataclass

from .distributions import sample_gamma, sample_gig, sample_mhn
from .envelope import (
    LogDensityTarget,
    ars_sample,
    build_envelope,
    sample_from_envelope,
)
from .special import log_std_normal_cdf, mills_ratio


@dataclass(frozen=True)
class TiltedParams:
    q: int
    a: float
    b: float
    c: float
    d: float = 0.0

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 0:
            raise ValueError("q must be a nonnegative integer")
        if not self.a > 0.0:
            raise ValueError("a must be positive")
        if self.b < 0.0 or self.d < 0.0:
            raise ValueError("b and d must be nonnegative")


def log_density(p, x):
    if x <= 0.0:
        return -math.inf
    val = (p.a - 1.0) * math.log(x) - p.b * x * x - p.c * x
    if p.q:
        val -= p.q * log_std_normal_cdf(-x)
    if p.d:
        val -= p.d / x
    return val


def dlog_density(p, x):
    val = (p.a - 1.0) / x - 2.0 * p.b * x - p.c
    if p.q:
        val += p.q * mills_ratio(x)
    if p.d:
        val += p.d / (x * x)
    return val


def d2log_density(p, x):
    val = -(p.a - 1.0) / (x * x) - 2.0 * p.b
    if p.q:
        m = mills_ratio(x)
        val += p.q * m * (m - x)
    if p.d:
        val -= 2.0 * p.d / (x * x * x)
    return val


def is_logconcave(p):
    """Sufficient conditions for integrability plus log-concavity."""
    if p.q == 0:
        return p.a >= 1.0 and (p.b > 0.0 or p.c > 0.0)
    return p.a >= 1.0 and p.b >= 0.5 * p.q and p.c > 0.0 and p.d == 0.0


def mode_bounds(p):
    """Closed-form (lower, upper) bracket of the mode for q >= 1 members.

    A zero lower bound means the hazard inequality gives no positive
    lower bound (a = 1 with quadratic slack).
    """
    if p.q < 1 or not is_logconcave(p):
        raise ValueError("mode_bounds needs a log-concave member with q >= 1")
    t = 2.0 * p.b - p.q
    if t <= 1e-12 * p.q:
        return (p.a - 1.0) / p.c, (p.a - 1.0 + p.q) / p.c
    lo = (math.sqrt(p.c * p.c + 4.0 * (p.a - 1.0) * t) - p.c) / (2.0 * t)
    hi = (math.sqrt(p.c * p.c + 4.0 * (p.a - 1.0 + p.q) * t) - p.c) / (2.0 * t)
    return lo, hi


def _bisect_root(f, lo, hi, tol=1e-10, max_iter=200):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            return mid
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_mode(p, tol=1e-10):
    """Mode of the density; 0.0 when the density decreases from x = 0+.

    Bisection of the log-derivative inside the closed-form bracket for
    q >= 1 members, or inside a geometrically expanded bracket for q = 0.
    """
    df = lambda x: dlog_density(p, x)
    if p.q >= 1:
        lo, hi = mode_bounds(p)
        if lo <= 0.0:
            lo = min(hi, 1.0) * 1e-12
            if df(lo) <= 0.0:
                return 0.0
        return _bisect_root(df, lo, hi, tol)
    lo = hi = 1.0
    for _ in range(200):
        if df(lo) > 0.0:
            break
        lo /= 8.0
    else:
        return 0.0
    for _ in range(200):
        if df(hi) < 0.0:
            break
        hi *= 8.0
    return _bisect_root(df, lo, hi, tol)


def sample_tilted(p, rng):
    """One exact draw from a log-concave member of the family."""
    if not is_logconcave(p):
        raise ValueError(
            "density not certified log-concave for these parameters")
    if p.q == 0:
        if p.d == 0.0:
            if p.b == 0.0:
                return sample_gamma(p.a, p.c, rng)
            return sample_mhn(p.a, p.b, p.c, rng)
        if p.b == 0.0:
            return sample_gig(p.a, 2.0 * p.c, 2.0 * p.d, rng)
        mode = find_mode(p)
        target = LogDensityTarget(
            lambda x: log_density(p, x), lambda x: dlog_density(p, x),
            support_lower=0.0, mode=mode, curvature=d2log_density(p, mode))
        return sample_from_envelope(target, build_envelope(target, K=2), rng)
    lo, hi = mode_bounds(p)
    knots = [hi] if lo <= 0.0 else [lo, hi]
    target = LogDensityTarget(
        lambda x: log_density(p, x), lambda x: dlog_density(p, x),
        support_lower=0.0)
    return ars_sample(target, knots, rng)
