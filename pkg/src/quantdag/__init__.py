"""quantdag: individualized covariate-dependent quantile DAG inference.

Fits per-observation directed acyclic graphs at a chosen quantile level by
MCMC under an asymmetric-Laplace working likelihood, with spline-based
covariate-varying edge strengths, hard-thresholding sparsity and a
parameter-expanded horseshoe prior. Includes the synthetic benchmark
generator, selection/metric post-processing and population aggregation.
"""

__version__ = "0.1.0"
