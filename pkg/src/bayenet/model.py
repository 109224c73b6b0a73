"""Model state, priors and log densities for the Bayesian elastic net.

Two prior forms are supported, differing in how the l1 penalty scales
with the noise variance:

* "common":       pi(beta) propto exp(-(lam2 b'b + lam1 |b|_1) / (2 sigma^2))
* "differential": pi(beta) propto exp(-lam2 b'b / (2 sigma^2) - lam1 |b|_1 / sigma)

Each form has a direct representation (independent two-piece truncated
normals per coordinate) and a data-augmented one (a normal scale mixture
with one latent tau_j^2 per coordinate).  The response and predictors
are mean-centered, and the intercept is integrated out of the
likelihood, which contributes an extra factor n^(-1/2) and reduces the
exponent to (n-1)/2.

The sampler state carries both the natural parameters (sigma2, lambda1,
lambda2) and the transformed ones (u1, u2, theta) the rejection kernels
update:

* common:       u1 = sigma^2, u2 = sqrt(lam2)/sigma, theta = lam1/(2 sigma sqrt(lam2))
* differential: u1 = sigma^2, u2 = sqrt(lam2),       theta = lam1/sqrt(lam2)

Hyperpriors: lam1 ~ gamma(L, rate nu1/2), lam2 ~ gamma(R, rate nu2/2),
sigma^2 ~ inverse-gamma(nu_a/2, nu_b/2), with the improper limit
nu_a = nu_b = 0 allowed.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import sample_truncated_normal
from .special import log_std_normal_cdf

FORMS = ("common", "differential")
REPRESENTATIONS = ("direct", "da")

PRIOR_PRESETS = {
    "weak": dict(L=1.0, nu1=1.0, R=1.0, nu2=1.0),
    "strong": dict(L=6.0, nu1=4.0, R=2.0, nu2=4.0),
}

_LOG_2PI = math.log(2.0 * math.pi)


class RegressionData:
    """Centered response/predictors with the cross products kernels reuse."""

    def __init__(self, y, X):
        y = np.asarray(y, dtype=float)
        X = np.asarray(X, dtype=float)
        if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError("y must be (n,), X must be (n, p)")
        if y.shape[0] < 3:
            raise ValueError("need at least 3 observations")
        self.y = y - y.mean()
        self.X = X - X.mean(axis=0)
        self.n, self.p = X.shape
        self.xtx = self.X.T @ self.X
        self.xty = self.X.T @ self.y
        self.yty = float(self.y @ self.y)
        self.col_sq_norms = np.diag(self.xtx).copy()
        self.zero_variance_cols = [
            j for j in range(self.p) if self.col_sq_norms[j] <= 0.0]


@dataclass(frozen=True)
class PriorSpec:
    form: str
    representation: str
    L: float
    nu1: float
    R: float
    nu2: float
    nu_a: float = 1.0
    nu_b: float = 1.0

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")
        if self.representation not in REPRESENTATIONS:
            raise ValueError(
                f"representation must be one of {REPRESENTATIONS}")
        for name in ("L", "nu1", "R", "nu2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.nu_a < 0.0 or self.nu_b < 0.0:
            raise ValueError("nu_a and nu_b must be nonnegative")


def make_prior(form, representation, preset=None, **params):
    """PriorSpec from a named preset ('weak'/'strong') or explicit values."""
    if preset is not None:
        if preset not in PRIOR_PRESETS:
            raise ValueError(f"unknown preset {preset!r}")
        merged = dict(PRIOR_PRESETS[preset])
        merged.update(params)
        return PriorSpec(form, representation, **merged)
    return PriorSpec(form, representation, **params)


def to_transformed(form, sigma2, lambda1, lambda2):
    if form == "common":
        u2 = math.sqrt(lambda2 / sigma2)
        return sigma2, u2, lambda1 / (2.0 * sigma2 * u2)
    u2 = math.sqrt(lambda2)
    return sigma2, u2, lambda1 / u2


def from_transformed(form, u1, u2, theta):
    if form == "common":
        return u1, 2.0 * theta * u2 * u1, u1 * u2 * u2
    return u1, theta * u2, u2 * u2


@dataclass
class ModelState:
    beta: np.ndarray
    sigma2: float
    lambda1: float
    lambda2: float
    tau2: np.ndarray = None
    u1: float = field(init=False, default=0.0)
    u2: float = field(init=False, default=0.0)
    theta: float = field(init=False, default=0.0)

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        if not (self.sigma2 > 0 and self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("sigma2, lambda1, lambda2 must be positive")

    def refresh_transformed(self, form):
        self.u1, self.u2, self.theta = to_transformed(
            form, self.sigma2, self.lambda1, self.lambda2)

    def set_transformed(self, form, u1=None, u2=None, theta=None):
        if u1 is not None:
            self.u1 = u1
        if u2 is not None:
            self.u2 = u2
        if theta is not None:
            self.theta = theta
        self.sigma2, self.lambda1, self.lambda2 = from_transformed(
            form, self.u1, self.u2, self.theta)

    def copy_with(self, **kw):
        st = replace(self, **kw)
        st.u1, st.u2, st.theta = self.u1, self.u2, self.theta
        return st


def initial_state(data, prior):
    """Published warm start: beta = 0, sigma2 = var(y), rates at 1."""
    state = ModelState(
        beta=np.zeros(data.p),
        sigma2=float(np.var(data.y, ddof=1)),
        lambda1=1.0,
        lambda2=1.0,
    )
    if prior.representation == "da":
        state.tau2 = np.full(data.p, 0.5 if prior.form == "common" else 1.0)
    state.refresh_transformed(prior.form)
    return state


def rss(data, beta):
    return float(data.yty - 2.0 * beta @ data.xty + beta @ data.xtx @ beta)


def log_integrated_likelihood(data, beta, sigma2):
    """Likelihood with the flat intercept integrated out."""
    if not sigma2 > 0.0:
        raise ValueError("sigma2 must be positive")
    return (-0.5 * (data.n - 1) * (_LOG_2PI + math.log(sigma2))
            - 0.5 * math.log(data.n)
            - 0.5 * rss(data, beta) / sigma2)


def log_prior_beta(form, beta, sigma2, lambda1, lambda2):
    """Normalized log density of beta under either prior form."""
    beta = np.asarray(beta, dtype=float)
    p = beta.size
    bb = float(beta @ beta)
    b1 = float(np.abs(beta).sum())
    sigma = math.sqrt(sigma2)
    if form == "common":
        r = lambda1 / (2.0 * sigma * math.sqrt(lambda2))
        penalty = -(lambda2 * bb + lambda1 * b1) / (2.0 * sigma2)
    elif form == "differential":
        r = lambda1 / math.sqrt(lambda2)
        penalty = -lambda2 * bb / (2.0 * sigma2) - lambda1 * b1 / sigma
    else:
        raise ValueError(f"unknown form {form!r}")
    return (-p * math.log(2.0)
            - 0.5 * p * (_LOG_2PI + math.log(sigma2 / lambda2))
            - 0.5 * p * r * r
            - p * log_std_normal_cdf(-r)
            + penalty)


def tau2_conditional_var(form, tau2, sigma2, lambda2):
    """Var(beta_j | tau_j^2) for the scale-mixture representation."""
    tau2 = np.asarray(tau2, dtype=float)
    if form == "common":
        return (sigma2 / lambda2) * (1.0 - tau2)
    return sigma2 * tau2 / (1.0 + lambda2 * tau2)


def log_prior_tau2(form, tau2, sigma2, lambda1, lambda2):
    """Normalized log density of the latent scales, summed over j."""
    tau2 = np.asarray(tau2, dtype=float)
    p = tau2.size
    if form == "common":
        if np.any(tau2 <= 0.0) or np.any(tau2 >= 1.0):
            return -math.inf
        r = lambda1 / (2.0 * math.sqrt(sigma2) * math.sqrt(lambda2))
        const = (-math.log(2.0) - 0.5 * _LOG_2PI - log_std_normal_cdf(-r)
                 + math.log(r))
        return float(p * const
                     + np.sum(-1.5 * np.log(tau2) - 0.5 * r * r / tau2))
    if np.any(tau2 <= 0.0):
        return -math.inf
    th = lambda1 / math.sqrt(lambda2)
    const = (-math.log(2.0) - 0.5 * _LOG_2PI - log_std_normal_cdf(-th)
             + math.log(lambda1) + 0.5 * math.log(lambda2)
             - 0.5 * th * th)
    return float(p * const
                 + np.sum(-0.5 * np.log1p(lambda2 * tau2)
                          - 0.5 * lambda1 * lambda1 * tau2))


def log_prior_da(form, beta, tau2, sigma2, lambda1, lambda2):
    """Joint log density of (beta, tau2) in the augmented representation."""
    beta = np.asarray(beta, dtype=float)
    v = tau2_conditional_var(form, tau2, sigma2, lambda2)
    if np.any(v <= 0.0):
        return -math.inf
    log_norm = float(np.sum(-0.5 * (_LOG_2PI + np.log(v)) - 0.5 * beta * beta / v))
    return log_norm + log_prior_tau2(form, tau2, sigma2, lambda1, lambda2)


def log_hyperprior(prior, sigma2, lambda1, lambda2):
    if not (sigma2 > 0.0 and lambda1 > 0.0 and lambda2 > 0.0):
        raise ValueError("hyperparameters must be positive")
    half_nu1 = 0.5 * prior.nu1
    half_nu2 = 0.5 * prior.nu2
    val = (prior.L * math.log(half_nu1) - math.lgamma(prior.L)
           + (prior.L - 1.0) * math.log(lambda1) - half_nu1 * lambda1)
    val += (prior.R * math.log(half_nu2) - math.lgamma(prior.R)
            + (prior.R - 1.0) * math.log(lambda2) - half_nu2 * lambda2)
    a, b = 0.5 * prior.nu_a, 0.5 * prior.nu_b
    val += -(a + 1.0) * math.log(sigma2) - b / sigma2
    if a > 0.0 and b > 0.0:
        val += a * math.log(b) - math.lgamma(a)
    return val


def log_posterior_unnorm(data, prior, state):
    """Joint log posterior up to a constant, in the state's representation."""
    val = log_integrated_likelihood(data, state.beta, state.sigma2)
    if prior.representation == "da":
        if state.tau2 is None:
            raise ValueError("augmented state requires tau2")
        val += log_prior_da(prior.form, state.beta, state.tau2,
                            state.sigma2, state.lambda1, state.lambda2)
    else:
        val += log_prior_beta(prior.form, state.beta, state.sigma2,
                              state.lambda1, state.lambda2)
    val += log_hyperprior(prior, state.sigma2, state.lambda1, state.lambda2)
    return val


def log_posterior_transformed(data, prior, state):
    """Log posterior in (u1, u2, theta) coordinates, Jacobian included.

    This is the target the rejection kernels sample; the change of
    variables contributes 4 u1^2 u2^2 (common) or 2 u2^2 (differential).
    """
    val = log_posterior_unnorm(data, prior, state)
    if prior.form == "common":
        return val + math.log(4.0) + 2.0 * (math.log(state.u1)
                                            + math.log(state.u2))
    return val + math.log(2.0) + 2.0 * math.log(state.u2)


def sample_tau2_prior(form, p, sigma2, lambda1, lambda2, rng):
    """p draws of the latent scales from their prior."""
    out = np.empty(p)
    if form == "common":
        r = lambda1 / (2.0 * math.sqrt(sigma2) * math.sqrt(lambda2))
        for j in range(p):
            while True:
                z = r + sample_truncated_normal(-r, 1.0, "nonnegative", rng)
                v = (r / z) ** 2
                if 0.0 < v < 1.0:
                    out[j] = v
                    break
        return out
    rate = 0.5 * lambda1 * lambda1
    for j in range(p):
        while True:
            v = rng.gen.standard_exponential() / rate
            if v <= 0.0:
                continue
            if rng.gen.random() <= math.exp(-0.5 * math.log1p(lambda2 * v)):
                out[j] = v
                break
    return out


def sample_beta_prior_direct(form, p, sigma2, lambda1, lambda2, rng):
    """p draws of beta from the prior via the two-piece representation."""
    if form == "common":
        m = lambda1 / (2.0 * lambda2)
    else:
        m = math.sqrt(sigma2) * lambda1 / lambda2
    out = np.empty(p)
    for j in range(p):
        mag = sample_truncated_normal(-m, sigma2 / lambda2, "nonnegative", rng)
        out[j] = mag if rng.gen.random() < 0.5 else -mag
    return out


def sample_beta_prior_da(form, p, sigma2, lambda1, lambda2, rng):
    """p draws of beta from the prior via the scale-mixture route."""
    tau2 = sample_tau2_prior(form, p, sigma2, lambda1, lambda2, rng)
    v = tau2_conditional_var(form, tau2, sigma2, lambda2)
    return np.sqrt(v) * rng.gen.standard_normal(p)
