"""Hull construction, masses, and adaptive rejection sampling."""

import math

import mpmath as mp
import numpy as np
import pytest

from bayenet.envelope import (
    EnvelopeError,
    LogDensityTarget,
    _segment_inverse_cdf,
    _segment_log_mass,
    ars_sample,
    build_envelope,
    sample_from_envelope,
)
from bayenet.rng import RngStream

from helpers import cdf_table, ks_statistic, ks_threshold

mp.mp.dps = 30


def _mhn_322_target():
    a, b, c = 3.0, 2.0, 2.0

    def log_f(x):
        return (a - 1.0) * math.log(x) - b * x * x - c * x

    def dlog_f(x):
        return (a - 1.0) / x - 2.0 * b * x - c

    # mode 0.5, curvature -(a-1)/mode^2 - 2b = -12
    return LogDensityTarget(log_f, dlog_f, 0.0, mode=0.5, curvature=-12.0)


def test_segment_log_mass_against_mpmath():
    cases = [
        (0.0, 2.0, -1.5, 0.3),
        (1.0, math.inf, -0.7, -2.0),
        (-math.inf, 0.5, 1.2, 0.0),
        (0.2, 0.9, 0.0, 1.0),
        (0.1, 4.0, 3.0, -1.0),
    ]
    for lo, hi, m, b in cases:
        want = float(mp.log(mp.quad(
            lambda t: mp.e ** (b + m * t),
            [mp.mpf(lo) if math.isfinite(lo) else mp.ninf,
             mp.mpf(hi) if math.isfinite(hi) else mp.inf])))
        got = _segment_log_mass(lo, hi, m, b)
        assert got == pytest.approx(want, abs=1e-10)


def test_segment_log_mass_rejects_divergent():
    with pytest.raises(EnvelopeError):
        _segment_log_mass(0.0, math.inf, 0.5, 0.0)
    with pytest.raises(EnvelopeError):
        _segment_log_mass(-math.inf, 1.0, -0.5, 0.0)
    with pytest.raises(EnvelopeError):
        _segment_log_mass(-math.inf, math.inf, 0.0, 0.0)


def test_segment_inverse_cdf_roundtrip():
    for lo, hi, m in [(0.0, 3.0, -2.0), (1.0, math.inf, -0.5),
                      (-math.inf, 2.0, 1.5), (0.5, 4.5, 0.0),
                      (0.0, 1.0, 2.0)]:
        for v in [1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-9]:
            x = _segment_inverse_cdf(lo, hi, m, v)
            assert (lo <= x <= hi) or math.isclose(x, lo) or math.isclose(x, hi)
            # forward CDF of the exponential segment at x recovers v
            num = _segment_log_mass(lo, x, m, 0.0) if x > lo else -math.inf
            den = _segment_log_mass(lo, hi, m, 0.0)
            got = math.exp(num - den) if num > -math.inf else 0.0
            assert got == pytest.approx(v, abs=1e-9)


def test_segment_inverse_cdf_one_ulp_slope():
    # the tangent at a numerically located mode has slope of order one
    # ulp, either sign; the quantile map must stay essentially uniform
    lo, hi = 0.571683454564243, 0.7234650413979169
    for m in (4.440892098500626e-16, -4.440892098500626e-16, 1e-300):
        for v in [1e-6, 0.2, 0.5, 0.8, 1.0 - 1e-9]:
            x = _segment_inverse_cdf(lo, hi, m, v)
            assert abs(x - (lo + v * (hi - lo))) < 1e-9


def test_knot_rule_frozen():
    env = build_envelope(_mhn_322_target(), K=2)
    s = 1.0 / math.sqrt(12.0)
    want = sorted([0.5 - s / 2, 0.5 + s / 2, 0.5 - s, 0.5 + s, 0.5, 0.5 + 2 * s])
    # the 0.5 - 2s knot is negative and must have been dropped
    assert len(env.knots) == 6
    assert np.allclose(env.knots, want, atol=1e-12)


def test_halfmode_knot_added_when_all_left_knots_trimmed():
    # curvature scale s = 1 with mode 0.4: every below-mode knot is
    # nonpositive and gets trimmed, so a knot at mode/2 must appear
    env = build_envelope(LogDensityTarget(
        lambda x: math.log(x) - x, lambda x: 1.0 / x - 1.0,
        0.0, mode=0.4, curvature=-1.0), K=2)
    assert any(np.isclose(env.knots, 0.2))


def test_hull_dominates_target():
    t = _mhn_322_target()
    env = build_envelope(t, K=2)
    for x in np.linspace(1e-6, 10.0, 4001):
        assert env.log_value(x) >= t.log_f(x) - 1e-9


def test_hull_acceptance_matches_mass_ratio():
    # target mass / hull mass, the exact acceptance probability
    t = _mhn_322_target()
    env = build_envelope(t, K=2)
    target_mass = float(mp.quad(
        lambda x: x ** 2 * mp.e ** (-2 * x ** 2 - 2 * x), [0, mp.inf]))
    ratio = target_mass / math.exp(env.log_total_mass)
    assert ratio == pytest.approx(0.9541, abs=0.002)


def test_hull_empirical_acceptance():
    t = _mhn_322_target()
    env = build_envelope(t, K=2)
    rng = RngStream(20260814, 1)
    n, acc = 30000, 0
    for _ in range(n):
        x, ux = env.propose(rng)
        if math.log(1.0 - rng.gen.random()) <= t.log_f(x) - ux:
            acc += 1
    assert acc / n == pytest.approx(0.9541, abs=0.01)


def test_envelope_sample_distribution():
    t = _mhn_322_target()
    env = build_envelope(t, K=2)
    rng = RngStream(7, 2)
    draws = [sample_from_envelope(t, env, rng) for _ in range(20000)]
    xs, c = cdf_table(t.log_f, 1e-9, 6.0)
    assert ks_statistic(draws, xs, c) < ks_threshold(len(draws))


def test_build_envelope_validates_inputs():
    t = _mhn_322_target()
    with pytest.raises(EnvelopeError):
        build_envelope(LogDensityTarget(t.log_f, t.dlog_f, 0.0,
                                        mode=math.nan, curvature=-1.0))
    with pytest.raises(EnvelopeError):
        build_envelope(LogDensityTarget(t.log_f, t.dlog_f, 0.0,
                                        mode=0.5, curvature=0.0))
    with pytest.raises(EnvelopeError):
        build_envelope(LogDensityTarget(t.log_f, t.dlog_f, 0.0,
                                        mode=0.5, curvature=None))


def test_ars_standard_normal_whole_line():
    t = LogDensityTarget(lambda x: -0.5 * x * x, lambda x: -x,
                         support_lower=-math.inf)
    rng = RngStream(11, 0)
    draws = [ars_sample(t, [-1.0, 2.0], rng) for _ in range(20000)]
    xs, c = cdf_table(lambda x: -0.5 * x * x, -8.0, 8.0)
    assert ks_statistic(draws, xs, c) < ks_threshold(len(draws))


def test_ars_gamma_positive_support():
    t = LogDensityTarget(lambda x: 2.0 * math.log(x) - x,
                         lambda x: 2.0 / x - 1.0)
    rng = RngStream(11, 1)
    draws = [ars_sample(t, [0.5, 4.0], rng) for _ in range(20000)]
    xs, c = cdf_table(lambda x: 2.0 * math.log(x) - x, 1e-9, 40.0)
    assert ks_statistic(draws, xs, c) < ks_threshold(len(draws))


def test_ars_steps_out_from_one_sided_knots():
    # both initial knots sit left of the mode (positive slopes)
    t = LogDensityTarget(lambda x: 5.0 * math.log(x) - x,
                         lambda x: 5.0 / x - 1.0)
    rng = RngStream(11, 2)
    draws = [ars_sample(t, [0.2, 0.4], rng) for _ in range(5000)]
    xs, c = cdf_table(lambda x: 5.0 * math.log(x) - x, 1e-9, 60.0)
    assert ks_statistic(draws, xs, c) < ks_threshold(len(draws))


def test_ars_rejects_nonintegrable_target():
    t = LogDensityTarget(lambda x: x, lambda x: 1.0)
    with pytest.raises(EnvelopeError):
        ars_sample(t, [1.0], RngStream(11, 3))
