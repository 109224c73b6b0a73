"""Chain output container and effective-sample-size diagnostics.

ESS uses the batch-means estimator with batch size floor(sqrt(N)):
ESS = N * s^2 / sigma2_bm, where s^2 is the sample variance and
sigma2_bm = b / (a - 1) * sum_k (mean_k - grand_mean)^2 over the a
complete trailing batches.  The estimate is clipped to [1, N].

Besides the raw parameters, chains carry two derived penalty
parameterizations, labeled by formula:

* lambda_total = lambda1 + sqrt(lambda2),
  alpha_share = lambda1 / (lambda1 + sqrt(lambda2))
* lambda_sum = lambda1 + lambda2,
  alpha_ridge_share = lambda2 / (lambda1 + lambda2)
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

DERIVED_NAMES = ("lambda_total", "alpha_share", "lambda_sum",
                 "alpha_ridge_share")

QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)


def derived_penalty_columns(lambda1, lambda2):
    """The four derived penalty columns, in DERIVED_NAMES order."""
    lambda1 = np.asarray(lambda1, dtype=float)
    lambda2 = np.asarray(lambda2, dtype=float)
    root = np.sqrt(lambda2)
    return [lambda1 + root,
            lambda1 / (lambda1 + root),
            lambda1 + lambda2,
            lambda2 / (lambda1 + lambda2)]


@dataclass
class ChainOutput:
    draws: np.ndarray
    parameter_names: list
    kind_label: str
    acceptance: dict = field(default_factory=dict)
    wall_ms: float = 0.0

    def column(self, name):
        try:
            idx = self.parameter_names.index(name)
        except ValueError:
            raise KeyError(f"no parameter named {name!r}") from None
        return self.draws[:, idx]

    def acceptance_rate(self, name):
        """Metropolis acceptance fraction for a scale kernel, else None."""
        if name in self.acceptance:
            acc, tot = self.acceptance[name]
            return acc / tot if tot else None
        return None


def ess_batch_means(series):
    """Effective sample size; N for a constant series (with a warning)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 100:
        raise ValueError("need at least 100 draws for a batch-means ESS")
    s2 = float(x.var(ddof=1))
    if not math.isfinite(s2):
        raise ValueError("series contains non-finite values")
    if x.min() == x.max():
        warnings.warn("constant series: returning ESS = N", RuntimeWarning)
        return float(n)
    b = math.isqrt(n)
    a = n // b
    tail = x[n - a * b:]
    means = tail.reshape(a, b).mean(axis=1)
    var_bm = b * float(np.sum((means - tail.mean()) ** 2)) / (a - 1)
    if var_bm <= 0.0:
        warnings.warn("degenerate batch variance: returning ESS = N",
                      RuntimeWarning)
        return float(n)
    return float(min(max(n * s2 / var_bm, 1.0), float(n)))


def percent_improvement(candidate_ess, baseline_ess):
    """(candidate - baseline) / baseline, in percent."""
    if not baseline_ess > 0.0:
        raise ValueError("baseline ESS must be positive")
    return 100.0 * (candidate_ess - baseline_ess) / baseline_ess


def summarize(chain):
    """Per-parameter rows: moments, quantiles, ESS, kernel acceptance."""
    rows = []
    for name in chain.parameter_names:
        x = chain.column(name)
        qs = np.quantile(x, QUANTILES)
        rows.append({
            "parameter": name,
            "mean": float(x.mean()),
            "sd": float(x.std(ddof=1)),
            **{f"q{int(1000 * q)}": float(v) for q, v in zip(QUANTILES, qs)},
            "ess": ess_batch_means(x),
            "acceptance_rate": chain.acceptance_rate(name),
        })
    return rows
