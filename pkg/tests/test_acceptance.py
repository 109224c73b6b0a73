"""Release gate: one test per headline guarantee, each printing a
PASS/FAIL line (visible with pytest -s) and asserting at its stated
tolerance.  Runtime bounds are asserted where a guarantee carries one.
"""

import math
import os
import statistics
import time

import numpy as np

from bayenet.cli import main as cli_main
from bayenet.diagnostics import ess_batch_means
from bayenet.envelope import (LogDensityTarget, build_envelope,
                              sample_from_envelope)
from bayenet.kernels import SweepKind, run_chain
from bayenet.model import (ModelState, RegressionData, log_posterior_unnorm,
                           make_prior)
from bayenet.oracle import (_gordon_check, _prior_equivalence_check,
                            _tilted_property_check, appendix_a_demonstration,
                            beta_kernel_ks_check, distribution_ks_checks,
                            full_conditional_checks)
from bayenet.rng import RngStream
from bayenet.simulate import design, generate_dataset, run_experiment


def _report(num, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} {num}: {detail}")
    assert ok, f"gate {num} failed: {detail}"


def test_01_fixed_envelope_acceptance_rate():
    # modified half-normal with exponent 3 and rate pair (2, 2):
    # log f(x) = 2 log x - 2 x^2 - 2 x, mode 1/2, curvature -12 there
    target = LogDensityTarget(
        lambda x: 2.0 * math.log(x) - 2.0 * x * x - 2.0 * x,
        lambda x: 2.0 / x - 4.0 * x - 2.0,
        mode=0.5, curvature=-12.0)
    env = build_envelope(target, K=2)
    rng = RngStream(0, 99)
    tally = [0, 0]
    t0 = time.perf_counter()
    while tally[1] < 100000:
        sample_from_envelope(target, env, rng, tally=tally)
    elapsed = time.perf_counter() - t0
    rate = tally[0] / tally[1]
    ok = abs(rate - 0.954) <= 0.01 and elapsed < 5.0
    _report(1, ok,
            f"two-piece envelope acceptance {rate:.4f} over {tally[1]}"
            f" proposals (want 0.954 +- 0.01) in {elapsed:.2f}s")


def test_02_sampler_exactness_battery():
    t0 = time.perf_counter()
    checks = list(distribution_ks_checks(10000, RngStream(0, 41)))
    checks.append(beta_kernel_ks_check(n=10000, seed=0, form="common"))
    checks.append(beta_kernel_ks_check(n=10000, seed=0,
                                       form="differential"))
    checks.extend(full_conditional_checks(n=10000, seed=0))
    elapsed = time.perf_counter() - t0
    failed = [c.name for c in checks if not c.passed]
    ok = not failed and elapsed < 300.0
    detail = (f"{len(checks) - len(failed)}/{len(checks)} KS checks at 1%"
              f" with N=10000 in {elapsed:.1f}s")
    if failed:
        detail += f"; failed: {failed}"
    _report(2, ok, detail)


def test_03_prior_representation_equivalence():
    results = [_prior_equivalence_check(form, 100000, RngStream(0, (42, i)))
               for i, form in enumerate(("common", "differential"))]
    ok = all(r.passed for r in results)
    _report(3, ok, "; ".join(f"{r.name}: {r.detail}" for r in results))


def test_04_tilted_density_shape_properties():
    shape = _tilted_property_check(100, RngStream(0, 43))
    gordon = _gordon_check(100, RngStream(0, 44))
    ok = shape.passed and gordon.passed
    _report(4, ok, f"{shape.name}: {shape.detail}; "
                   f"{gordon.name}: {gordon.detail}")


def test_05_penalized_objective_identity():
    y, X = generate_dataset(design(1), RngStream(0, (0, 1, 0)))
    data = RegressionData(y, X)
    prior = make_prior("common", "direct", preset="weak")
    s2, l1, l2 = 1.7, 1.3, 0.8
    gen = RngStream(11, 5).gen

    def log_post(b):
        return log_posterior_unnorm(
            data, prior,
            ModelState(beta=b, sigma2=s2, lambda1=l1, lambda2=l2))

    def objective(b):
        resid = data.y - data.X @ b
        return (float(resid @ resid) + l2 * float(b @ b)
                + l1 * float(np.abs(b).sum()))

    worst = 0.0
    for _ in range(100):
        b1 = gen.normal(0.0, 2.0, size=8)
        b2 = gen.normal(0.0, 2.0, size=8)
        lhs = -2.0 * s2 * (log_post(b1) - log_post(b2))
        rhs = objective(b1) - objective(b2)
        worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-9
    _report(5, ok, f"-2*sigma2 * log-posterior differences match"
                   f" RSS + l2|b|^2 + l1|b|_1 differences to {worst:.2e}"
                   f" over 100 coefficient pairs (tolerance 1e-9)")


def test_06_rejection_and_metropolis_chains_agree():
    y, X = generate_dataset(design(1), RngStream(0, (0, 1, 0)))
    data = RegressionData(y, X)
    t0 = time.perf_counter()
    outs = {}
    for label in ("rs-differential-da", "mh-differential-da"):
        kind = SweepKind.from_string(label)
        prior = make_prior(kind.form, kind.representation, preset="weak")
        outs[label] = run_chain(kind, data, prior,
                                RngStream(0, (6, label == "mh")),
                                iters=10000, burnin=500)
    elapsed = time.perf_counter() - t0

    names = [f"beta_{j}" for j in range(1, 9)] + ["sigma2", "lambda1",
                                                  "lambda2"]
    worst = ("", 0.0)
    for name in names:
        stats = []
        for label, out in outs.items():
            col = out.column(name)
            se = float(col.std(ddof=1)) / math.sqrt(ess_batch_means(col))
            stats.append((float(col.mean()), se))
        (m1, se1), (m2, se2) = stats
        z = abs(m1 - m2) / math.hypot(se1, se2)
        if z > worst[1]:
            worst = (name, z)
    ok = worst[1] <= 3.0 and elapsed < 180.0
    _report(6, ok,
            f"posterior means of {len(names)} parameters agree across"
            f" samplers; largest gap {worst[1]:.2f} combined standard"
            f" errors ({worst[0]}, limit 3) at 10000 kept draws each"
            f" in {elapsed:.1f}s")


def test_07_always_accept_sampler_is_not_exact():
    rep = appendix_a_demonstration(14.0, 3.0, 1.0, 1.0, 8,
                                   n_draws=100000, seed=0)
    ok = (rep.acceptance_fraction == 1.0 and rep.ratio_increasing
          and rep.log_ratio[-1] > 700.0 and rep.ks_rejects_target)
    _report(7, ok,
            f"acceptance fraction {rep.acceptance_fraction} over"
            f" {rep.n_draws} proposals; target/proposal log-ratio grows to"
            f" {rep.log_ratio[-1]:.0f} as the variance shrinks;"
            f" KS D={rep.ks_d:.4f} > {rep.ks_threshold:.4f} rejects the"
            f" accepted draws")


def test_08_rejection_sweeps_beat_metropolis_on_ess():
    t0 = time.perf_counter()
    rows, failures = run_experiment(
        (1, 2), ("rs-differential-da", "mh-differential-da"), ("strong",),
        replicates=5, iters=10000, burnin=100, seed=0, workers=2)
    elapsed = time.perf_counter() - t0
    pcts = [row["pct_improvement"] for row in rows
            if row["parameter"] == "lambda1"
            and row["pct_improvement"] is not None]
    med = statistics.median(pcts) if pcts else float("nan")
    ok = (not failures and len(pcts) == 10 and med > 0.0
          and elapsed < 1800.0)
    _report(8, ok,
            f"median ESS improvement of the rejection sweep over the"
            f" Metropolis baseline for lambda1 is {med:.1f}% across"
            f" {len(pcts)} strong-prior replicates in {elapsed:.1f}s")


def test_09_reruns_are_bit_identical(tmp_path):
    args = ["fit", "--sim", "1", "--iters", "400", "--burnin", "100",
            "--seed", "3"]
    blobs = []
    for sub in ("one", "two"):
        out = tmp_path / sub
        code = cli_main(args + ["--out", str(out)])
        assert code == 0
        blobs.append((out / "draws.csv").read_bytes())
    ok = blobs[0] == blobs[1]
    _report(9, ok, f"two runs with one config and seed wrote identical"
                   f" draws.csv ({len(blobs[0])} bytes)")
