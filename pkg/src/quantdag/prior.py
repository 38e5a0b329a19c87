"""Parameter-expanded horseshoe prior and the covariate-varying edge function.

One edge's coefficient surface is built from a shared intercept, a
reduced-spline block per covariate and a plain linear term per covariate:

    theta_i = mu + sum_k design_reduced_k[i] @ (eta_k * xi_k)
                 + sum_k X[i, k] * (eta0_k * xi0_k)

and the edge strength applies a hard threshold, beta_i = theta_i whenever
|theta_i| > t and exactly zero otherwise. Each coefficient family (nonlinear
spline blocks, linear terms) carries one global scale T shared across
covariates and per-covariate local scales L, with the half-Cauchy priors on
T and L expressed through their inverse-gamma expansion so every scale
update is conjugate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError

DEFAULT_SIGMA_M = 0.1
DEFAULT_SIGMA_MU = 0.5
DEFAULT_GAMMA_SHAPE = 10.0
DEFAULT_GAMMA_RATE = 10.0


@dataclass(frozen=True)
class PriorHyper:
    """Fixed hyperparameters of the edge-parameter prior.

    sigma_m : std of each xi entry around its +/-1 anchor.
    sigma_mu : prior std of the intercept mu.
    a, b : shape and rate of the Gamma prior on the hard threshold.
    """

    sigma_m: float = DEFAULT_SIGMA_M
    sigma_mu: float = DEFAULT_SIGMA_MU
    a: float = DEFAULT_GAMMA_SHAPE
    b: float = DEFAULT_GAMMA_RATE

    def __post_init__(self):
        if min(self.sigma_m, self.sigma_mu, self.a, self.b) <= 0:
            raise ValueError("all prior hyperparameters must be positive")


@dataclass
class PxhsGroup:
    """One coefficient family of an edge under the expanded horseshoe.

    The global scale ``T`` (with auxiliary ``c``) is shared by all q
    covariates of the family; ``L``/``zeta``/``eta`` are per covariate and
    ``xi``/``m`` are per covariate blocks of length B*_k (length 1 for the
    linear family). The implied coefficient block is ``eta[k] * xi[k]``.
    """

    T: float
    c: float
    eta: np.ndarray            # (q,)
    L: np.ndarray              # (q,)
    zeta: np.ndarray           # (q,)
    xi: list = field(default_factory=list)   # q arrays (B*_k,)
    m: list = field(default_factory=list)    # q arrays of +/-1

    @property
    def q(self):
        return self.eta.size

    def coef(self, k):
        """Coefficient block for covariate k: eta_k * xi_k."""
        return self.eta[k] * self.xi[k]

    def copy(self):
        return PxhsGroup(
            T=self.T, c=self.c, eta=self.eta.copy(), L=self.L.copy(),
            zeta=self.zeta.copy(), xi=[v.copy() for v in self.xi],
            m=[v.copy() for v in self.m],
        )


@dataclass
class EdgeParamBlock:
    """All parameters of one edge's covariate-varying coefficient."""

    mu: float
    nonlinear: PxhsGroup
    linear: PxhsGroup
    threshold: float

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")

    def copy(self):
        return EdgeParamBlock(mu=self.mu, nonlinear=self.nonlinear.copy(),
                              linear=self.linear.copy(), threshold=self.threshold)


def compute_theta(bases, raw_covariates, params):
    """Smooth edge surface theta over all observations.

    ``bases`` supplies one reduced spline design per covariate (aligned with
    the columns of ``raw_covariates``). Intercept-only models (q = 0) are
    allowed and return a constant vector.
    """
    X = np.asarray(raw_covariates, dtype=float)
    if X.ndim != 2:
        raise DimensionError("raw_covariates must be n x q")
    n, q = X.shape
    if len(bases) != q or params.nonlinear.q != q or params.linear.q != q:
        raise DimensionError("bases, covariates and parameter blocks disagree on q")
    theta = np.full(n, params.mu, dtype=float)
    for k in range(q):
        design = bases[k].design_reduced
        if design.shape != (n, params.nonlinear.xi[k].size):
            raise DimensionError(f"reduced design of covariate {k} has wrong shape")
        theta += design @ params.nonlinear.coef(k)
        theta += X[:, k] * params.linear.coef(k)[0]
    return theta


def compute_beta(theta, threshold):
    """Hard thresholding: beta = theta * 1(|theta| > t), exact zeros below."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    theta = np.asarray(theta, dtype=float)
    return np.where(np.abs(theta) > threshold, theta, 0.0)


def invgamma_draw(rng, shape, rate):
    """One draw from InverseGamma(shape, rate) via the reciprocal gamma."""
    return 1.0 / rng.gamma(shape, 1.0 / rate)


def _sample_group(rng, dims, hyper):
    """Joint prior draw of one coefficient family with block sizes ``dims``."""
    q = len(dims)
    c = invgamma_draw(rng, 0.5, 1.0)
    T = math.sqrt(invgamma_draw(rng, 0.5, 1.0 / c))
    zeta = np.array([invgamma_draw(rng, 0.5, 1.0) for _ in range(q)])
    L = np.array([math.sqrt(invgamma_draw(rng, 0.5, 1.0 / z)) for z in zeta])
    eta = np.array([rng.normal(0.0, T * L[k]) for k in range(q)])
    m = [np.where(rng.random(d) < 0.5, 1.0, -1.0) for d in dims]
    xi = [m[k] + hyper.sigma_m * rng.standard_normal(dims[k]) for k in range(q)]
    return PxhsGroup(T=T, c=c, eta=eta, L=L, zeta=zeta, xi=xi, m=m)


def sample_prior(hyper, reduced_dims, rng):
    """One joint draw of a full :class:`EdgeParamBlock` from the prior.

    ``reduced_dims`` lists B*_k per covariate; ``rng`` may be a seed or a
    numpy Generator.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    dims = [int(d) for d in reduced_dims]
    if any(d < 1 for d in dims):
        raise ValueError("reduced dimensions must be >= 1")
    nonlinear = _sample_group(rng, dims, hyper)
    linear = _sample_group(rng, [1] * len(dims), hyper)
    mu = rng.normal(0.0, hyper.sigma_mu)
    threshold = rng.gamma(hyper.a, 1.0 / hyper.b)
    return EdgeParamBlock(mu=mu, nonlinear=nonlinear, linear=linear,
                          threshold=threshold)


def nonlocal_mass_profile(hyper, n_draws, bins, rng=None):
    """Monte-Carlo profile of the marginal edge-strength prior.

    Uses the scalar reduction of the hierarchy: theta drawn from a unit
    horseshoe, t from Gamma(a, b), beta = theta * 1(|theta| > t). Returns
    ``(zero_fraction, bin_fractions)`` where ``bin_fractions[i]`` is the
    fraction of all draws whose nonzero |beta| falls in the i-th histogram
    bin of ``bins``.
    """
    if n_draws < 10_000:
        raise ValueError("profile needs at least 1e4 draws")
    rng = np.random.default_rng(rng)
    bins = np.asarray(bins, dtype=float)
    u = np.abs(rng.standard_cauchy(n_draws))
    theta = rng.normal(0.0, 1.0, n_draws) * u
    t = rng.gamma(hyper.a, 1.0 / hyper.b, n_draws)
    beta = np.where(np.abs(theta) > t, theta, 0.0)
    nonzero = beta != 0
    zero_fraction = 1.0 - nonzero.mean()
    counts, _ = np.histogram(np.abs(beta[nonzero]), bins=bins)
    return float(zero_fraction), counts / n_draws
