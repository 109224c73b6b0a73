"""Full-conditional updates and sweep drivers.

A sweep kind is (algorithm, form, representation):

* algorithm "rs": every block is drawn exactly by rejection sampling.
  The scale parameters are updated in the transformed coordinates
  (u1, u2, theta), whose full conditionals are generalized inverse
  Gaussian, modified half normal, and tail-tilted respectively.
* algorithm "mh": beta (and tau2 in the augmented representation) keep
  their exact updates; sigma2, lambda1, lambda2 move by random-walk
  Metropolis on the log scale with the Jacobian correction.

Update order within a sweep: beta, then tau2 where present, then the
scales.  Natural and transformed parameters are re-synchronized after
every scale move.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .diagnostics import ChainOutput, DERIVED_NAMES, derived_penalty_columns
from .distributions import (
    sample_gig,
    sample_inverse_gamma,
    sample_inverse_gaussian,
    sample_mhn,
    sample_truncated_normal,
)
from .model import initial_state, log_posterior_unnorm, rss
from .special import log_std_normal_cdf
from .tilted import TiltedParams, sample_tilted

ALGORITHMS = ("rs", "mh")


@dataclass(frozen=True)
class SweepKind:
    algorithm: str
    form: str
    representation: str

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.form not in ("common", "differential"):
            raise ValueError("form must be 'common' or 'differential'")
        if self.representation not in ("direct", "da"):
            raise ValueError("representation must be 'direct' or 'da'")

    @classmethod
    def from_string(cls, text):
        parts = text.strip().lower().split("-")
        if len(parts) != 3:
            raise ValueError(
                "sampler must look like 'rs-common-direct' or "
                "'mh-differential-da'")
        return cls(*parts)

    @property
    def label(self):
        return f"{self.algorithm}-{self.form}-{self.representation}"


ALL_KINDS = tuple(
    SweepKind(alg, form, rep)
    for alg in ALGORITHMS
    for form in ("common", "differential")
    for rep in ("direct", "da"))


def check_sweep_supported(kind, prior):
    """Reject combinations whose conditionals fall outside the certified
    log-concave family."""
    if prior.form != kind.form or prior.representation != kind.representation:
        raise ValueError(
            "prior and sweep kind disagree on form/representation")
    if (kind.algorithm == "rs" and kind.representation == "direct"
            and prior.L < 1.0):
        raise ValueError(
            "rejection sweeps in the direct representation need L >= 1 "
            "(the rate conditional is not certified log-concave); "
            "use the augmented representation instead")


def _log_uniform(rng):
    u = rng.gen.random()
    while u <= 0.0:
        u = rng.gen.random()
    return math.log(u)


def update_beta_coordinate(data, prior, state, j, rng):
    """Exact draw of beta_j from its two-piece truncated-normal conditional.

    The side weights are formed entirely in log space
    (log Phi(mu/s) + mu^2/(2 s^2)); the shared Gaussian constant cancels.
    """
    beta = state.beta
    lam1, lam2, s2 = state.lambda1, state.lambda2, state.sigma2
    t = 0.5 * lam1 if prior.form == "common" else math.sqrt(s2) * lam1
    prec = data.col_sq_norms[j] + lam2
    sj2 = s2 / prec
    sj = math.sqrt(sj2)
    r = data.xty[j] - (data.xtx[j] @ beta - data.xtx[j, j] * beta[j])
    mu_pos = (r - t) / prec
    mu_neg = (r + t) / prec
    lw_pos = log_std_normal_cdf(mu_pos / sj) + 0.5 * mu_pos * mu_pos / sj2
    lw_neg = log_std_normal_cdf(-mu_neg / sj) + 0.5 * mu_neg * mu_neg / sj2
    gap = min(lw_neg - lw_pos, 700.0)
    prob_pos = 1.0 / (1.0 + math.exp(gap))
    if rng.gen.random() < prob_pos:
        beta[j] = sample_truncated_normal(mu_pos, sj2, "nonnegative", rng)
    else:
        beta[j] = sample_truncated_normal(mu_neg, sj2, "negative", rng)


def update_beta_direct(data, prior, state, rng):
    """Coordinate scan of the two-piece conditional over all of beta."""
    for j in range(data.p):
        update_beta_coordinate(data, prior, state, j, rng)


def update_beta_block(data, prior, state, rng):
    """Joint Gaussian update of beta given the latent scales."""
    if prior.form == "common":
        om = np.maximum(1.0 - state.tau2, 1e-14)
        extra = state.lambda2 / om
    else:
        extra = 1.0 / state.tau2 + state.lambda2
    prec = data.xtx + np.diag(extra)
    chol = np.linalg.cholesky(prec)
    mean = np.linalg.solve(chol.T, np.linalg.solve(chol, data.xty))
    pert = np.linalg.solve(chol.T, rng.gen.standard_normal(data.p))
    state.beta = mean + math.sqrt(state.sigma2) * pert


def update_tau2(data, prior, state, rng):
    """Exact update of the latent scales via inverse-Gaussian draws.

    |beta_j| is clamped below at 1e-12 sigma so the inverse-Gaussian mean
    stays finite when a coefficient collapses onto zero.
    """
    beta, s2 = state.beta, state.sigma2
    lam1, lam2 = state.lambda1, state.lambda2
    sigma = math.sqrt(s2)
    tau2 = state.tau2
    if prior.form == "common":
        shape = lam1 * lam1 / (4.0 * lam2 * s2)
        for j in range(data.p):
            mag = max(abs(beta[j]), 1e-12 * sigma)
            z = sample_inverse_gaussian(lam1 / (2.0 * lam2 * mag), shape, rng)
            tau2[j] = min(z / (1.0 + z), 1.0 - 1e-15)
    else:
        shape = lam1 * lam1
        for j in range(data.p):
            mag = max(abs(beta[j]), 1e-12 * sigma)
            z = sample_inverse_gaussian(sigma * lam1 / mag, shape, rng)
            tau2[j] = 1.0 / z


def update_u1_common(data, prior, state, rng):
    """u1 = sigma^2 under the common scaling: generalized inverse Gaussian.

    Identical in both representations (the augmented beta and tau2 priors
    carry no u1 once written in the transformed coordinates).
    """
    order = prior.R + prior.L - 0.5 * (prior.nu_a + data.n - 1.0)
    psi = state.u2 ** 2 * prior.nu2 + 2.0 * state.u2 * state.theta * prior.nu1
    chi = rss(data, state.beta) + prior.nu_b
    state.set_transformed("common", u1=sample_gig(order, psi, chi, rng))


def update_u2_common(data, prior, state, rng):
    """u2 = sqrt(lam2)/sigma: modified half normal."""
    beta = state.beta
    alpha = 2.0 * prior.R + prior.L + data.p
    if state.tau2 is None:
        quad = 0.5 * (state.u1 * prior.nu2 + float(beta @ beta))
        lin = state.theta * (state.u1 * prior.nu1
                             + float(np.abs(beta).sum()))
    else:
        om = np.maximum(1.0 - state.tau2, 1e-14)
        quad = 0.5 * (state.u1 * prior.nu2
                      + float(np.sum(beta * beta / om)))
        lin = state.u1 * state.theta * prior.nu1
    state.set_transformed("common", u2=sample_mhn(alpha, quad, lin, rng))


def update_theta_common(data, prior, state, rng):
    """theta = lam1/(2 sigma sqrt(lam2)): tail-tilted conditional."""
    p = data.p
    if state.tau2 is None:
        tp = TiltedParams(
            p, prior.L, 0.5 * p,
            state.u2 * (state.u1 * prior.nu1 + float(np.abs(state.beta).sum())))
    else:
        tp = TiltedParams(
            p, p + prior.L, 0.5 * float(np.sum(1.0 / state.tau2)),
            state.u1 * state.u2 * prior.nu1)
    state.set_transformed("common", theta=sample_tilted(tp, rng))


def update_sigma2_differential_rs(data, prior, state, rng):
    """Exact sigma2 update for the differential scaling.

    Direct representation: 1/sigma has a modified-half-normal conditional
    with power n + p + nu_a - 1 (the change of variables from sigma2 to
    1/sigma contributes the extra cubic factor).  Augmented
    representation: inverse gamma.
    """
    beta = state.beta
    p, n = data.p, data.n
    if state.tau2 is None:
        quad = 0.5 * (rss(data, beta) + state.u2 ** 2 * float(beta @ beta)
                      + prior.nu_b)
        lin = state.theta * state.u2 * float(np.abs(beta).sum())
        x = sample_mhn(n + p + prior.nu_a - 1.0, quad, lin, rng)
        state.sigma2 = 1.0 / (x * x)
    else:
        shape = 0.5 * (p + prior.nu_a + n - 1.0)
        scale = 0.5 * (prior.nu_b + rss(data, beta)
                       + float(np.sum(beta * beta
                                      * (1.0 / state.tau2
                                         + state.u2 ** 2))))
        state.sigma2 = sample_inverse_gamma(shape, scale, rng)
    state.u1 = state.sigma2


def update_u2_differential(data, prior, state, rng):
    """u2 = sqrt(lam2) under the differential scaling: modified half normal."""
    beta = state.beta
    p = data.p
    bb = float(beta @ beta)
    if state.tau2 is None:
        alpha = 2.0 * prior.R + prior.L + p
        quad = 0.5 * (bb / state.sigma2 + prior.nu2)
        lin = state.theta * (float(np.abs(beta).sum())
                             / math.sqrt(state.sigma2) + 0.5 * prior.nu1)
    else:
        alpha = 2.0 * p + 2.0 * prior.R + prior.L
        quad = 0.5 * (bb / state.sigma2 + prior.nu2
                      + state.theta ** 2 * float(np.sum(state.tau2)))
        lin = 0.5 * state.theta * prior.nu1
    state.set_transformed("differential",
                          u2=sample_mhn(alpha, quad, lin, rng))


def update_theta_differential(data, prior, state, rng):
    """theta = lam1/sqrt(lam2): tail-tilted conditional."""
    p = data.p
    if state.tau2 is None:
        tp = TiltedParams(
            p, prior.L, 0.5 * p,
            state.u2 * (float(np.abs(state.beta).sum())
                        / math.sqrt(state.sigma2) + 0.5 * prior.nu1))
    else:
        tp = TiltedParams(
            p, p + prior.L,
            0.5 * (p + state.u2 ** 2 * float(np.sum(state.tau2))),
            0.5 * state.u2 * prior.nu1)
    state.set_transformed("differential", theta=sample_tilted(tp, rng))


@dataclass
class MhStepSizes:
    sigma2: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 1.0


def mh_update_scales(data, prior, state, steps, rng, counts):
    """Random-walk Metropolis on log sigma2, log lambda1, log lambda2."""
    cur_lp = log_posterior_unnorm(data, prior, state)
    for name, step in (("sigma2", steps.sigma2),
                       ("lambda1", steps.lambda1),
                       ("lambda2", steps.lambda2)):
        cur = getattr(state, name)
        prop = cur * math.exp(step * rng.gen.standard_normal())
        trial = state.copy_with(**{name: prop})
        trial_lp = log_posterior_unnorm(data, prior, trial)
        counts[name][1] += 1
        if _log_uniform(rng) < (trial_lp - cur_lp
                                + math.log(prop) - math.log(cur)):
            setattr(state, name, prop)
            cur_lp = trial_lp
            counts[name][0] += 1
    state.refresh_transformed(prior.form)


def run_sweep(kind, data, prior, state, rng, steps=None, counts=None):
    """One full scan over all blocks; mutates and returns the state."""
    if kind.representation == "direct":
        update_beta_direct(data, prior, state, rng)
    else:
        update_beta_block(data, prior, state, rng)
        update_tau2(data, prior, state, rng)
    if kind.algorithm == "rs":
        if kind.form == "common":
            update_u1_common(data, prior, state, rng)
            update_u2_common(data, prior, state, rng)
            update_theta_common(data, prior, state, rng)
        else:
            update_sigma2_differential_rs(data, prior, state, rng)
            update_u2_differential(data, prior, state, rng)
            update_theta_differential(data, prior, state, rng)
    else:
        if steps is None:
            steps = MhStepSizes()
        if counts is None:
            counts = {"sigma2": [0, 0], "lambda1": [0, 0], "lambda2": [0, 0]}
        mh_update_scales(data, prior, state, steps, rng, counts)
    return state


def run_chain(kind, data, prior, rng, iters=10000, burnin=100, thin=1,
              state=None, steps=None):
    """Run burnin + iters*thin sweeps and keep iters draws.

    Stored columns: beta_1..beta_p, sigma2, lambda1, lambda2, plus the
    derived penalty columns from the diagnostics module.
    """
    check_sweep_supported(kind, prior)
    if iters < 1 or burnin < 0 or thin < 1:
        raise ValueError("iters >= 1, burnin >= 0, thin >= 1 required")
    if state is None:
        state = initial_state(data, prior)
    state.refresh_transformed(prior.form)
    counts = ({"sigma2": [0, 0], "lambda1": [0, 0], "lambda2": [0, 0]}
              if kind.algorithm == "mh" else {})
    if steps is None:
        steps = MhStepSizes()
    p = data.p
    kept = np.empty((iters, p + 3))
    k = 0
    t0 = time.perf_counter()
    for it in range(burnin + iters * thin):
        run_sweep(kind, data, prior, state, rng, steps, counts)
        if it >= burnin and (it - burnin) % thin == 0 and k < iters:
            kept[k, :p] = state.beta
            kept[k, p] = state.sigma2
            kept[k, p + 1] = state.lambda1
            kept[k, p + 2] = state.lambda2
            k += 1
    wall_ms = 1e3 * (time.perf_counter() - t0)
    names = ([f"beta_{j + 1}" for j in range(p)]
             + ["sigma2", "lambda1", "lambda2"] + list(DERIVED_NAMES))
    derived = derived_penalty_columns(kept[:, p + 1], kept[:, p + 2])
    draws = np.column_stack([kept] + derived)
    return ChainOutput(
        draws=draws,
        parameter_names=names,
        kind_label=kind.label,
        acceptance={name: tuple(v) for name, v in counts.items()},
        wall_ms=wall_ms,
    )
