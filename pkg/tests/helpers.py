"""Shared oracle helpers for the test suite.

The CDF tables here are built directly from explicit log-density
formulas by dense trapezoid integration (error far below the KS
resolution used), independently of the package's own quadrature module.
"""

import numpy as np


def cdf_table(logpdf, lo, hi, n=20001):
    """Normalized CDF of exp(logpdf) tabulated on [lo, hi]."""
    xs = np.linspace(lo, hi, n)
    ls = np.array([float(logpdf(x)) for x in xs])
    ps = np.exp(ls - ls.max())
    c = np.concatenate(
        [[0.0], np.cumsum(0.5 * (ps[1:] + ps[:-1]) * np.diff(xs))])
    c /= c[-1]
    return xs, c


def ks_statistic(draws, xs, c):
    """Kolmogorov-Smirnov distance of draws from the tabulated CDF."""
    s = np.sort(np.asarray(draws, dtype=float))
    F = np.interp(s, xs, c, left=0.0, right=1.0)
    n = len(s)
    i = np.arange(1, n + 1)
    return max((i / n - F).max(), (F - (i - 1) / n).max())


def ks_threshold(n):
    """Asymptotic 1% critical value."""
    return 1.63 / np.sqrt(n)
