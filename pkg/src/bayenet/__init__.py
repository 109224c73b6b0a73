"""Bayesian elastic net: priors, Gibbs/Metropolis samplers and diagnostics.

The package implements two scalings of the elastic net prior (a common
scaling where both penalties share sigma^2, and a differential scaling
where the l1 term is scaled by sigma), each in a direct representation
(orthant-wise truncated normals for beta) and a data-augmented one
(normal scale mixtures with latent tau^2), together with the rejection
samplers for every full conditional, a Metropolis baseline, batch-means
effective sample size diagnostics, the simulation harness that compares
the samplers, and quadrature/Kolmogorov-Smirnov validation oracles.
"""

__version__ = "0.1.0"
