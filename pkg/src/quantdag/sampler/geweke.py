"""Joint-distribution test of the sampler's transition kernel.

Compares two simulators of the joint (parameters, data) law: the
marginal-conditional one (fresh prior draw, then data given parameters) and
the successive-conditional one (one MCMC sweep holding data, then data
regenerated given the current parameters). For a correct kernel both draw
from the same joint distribution, so the means of any test function agree up
to Monte-Carlo error; a deliberately corrupted conjugate update shows up as
a large z-score.

Heavy-tailed components (the horseshoe scales and their normal mixtures)
have no raw moments, so the test functions use bounded or log transforms.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..prior import PriorHyper, sample_prior
from ..quantile_loss import al_noise
from ..splines import build_bases
from .chain import Chain
from .config import SamplerConfig
from .draws import INTERCEPT

_BATCHES = 100


@dataclass
class GewekeReport:
    """Per-test-function comparison of the two simulators."""

    test_functions: list
    z_scores: np.ndarray
    mc_means: np.ndarray
    sc_means: np.ndarray
    mc_se: np.ndarray
    sc_se: np.ndarray
    n_rounds: int
    corrupt: str = None

    @property
    def max_abs_z(self):
        return float(np.max(np.abs(self.z_scores)))

    def summary(self):
        lines = [f"geweke joint test: {len(self.test_functions)} test functions, "
                 f"{self.n_rounds} rounds, corrupt={self.corrupt}"]
        for name, z in zip(self.test_functions, self.z_scores):
            lines.append(f"  {name:<24s} z = {z:+.3f}")
        return "\n".join(lines)


def _block_functions(h, j):
    tag = f"int{h}" if j == INTERCEPT else f"e{h}{j}"

    def on_block(fn):
        return lambda chain: fn(chain.block(h, j))

    specs = [
        ("atan_eta_nl", lambda b: math.atan(b.params.nonlinear.eta[0])),
        ("log_T2_nl", lambda b: math.log(b.params.nonlinear.T ** 2)),
        ("log_L2_nl", lambda b: math.log(b.params.nonlinear.L[0] ** 2)),
        ("log_zeta_nl", lambda b: math.log(b.params.nonlinear.zeta[0])),
        ("xi_nl_first", lambda b: b.params.nonlinear.xi[0][0]),
        ("atan_eta_lin", lambda b: math.atan(b.params.linear.eta[0])),
        ("log_T2_lin", lambda b: math.log(b.params.linear.T ** 2)),
        ("threshold", lambda b: b.params.threshold),
        ("mu", lambda b: b.params.mu),
    ]
    return [(f"{name}[{tag}]", on_block(fn)) for name, fn in specs]


def _data_functions(p):
    fns = []
    for h in range(p):
        fns.append((f"atan_mean_y{h}",
                    lambda c, h=h: math.atan(float(np.mean(c.ycols[h])))))
        fns.append((f"atan_var_y{h}",
                    lambda c, h=h: math.atan(float(np.var(c.ycols[h])))))
    if p >= 2:
        fns.append(("atan_mean_y0y1",
                    lambda c: math.atan(float(np.mean(c.ycols[0] * c.ycols[1])))))
    return fns


def _regenerate_data(chain, rng, tau):
    # parents appear later in the ordering, so fill nodes back to front
    for h in chain.cfg.ordering[::-1]:
        fitted = chain.compute_fitted(int(h))
        chain.set_node_data(int(h), fitted + al_noise(rng, tau, chain.n))
    chain.refresh_likelihood()


def _prior_reset(chain, rng, hyper, dims):
    for block in list(chain.blocks()):
        chain.set_block_params(block.h, block.j, sample_prior(hyper, dims, rng))
    chain.refresh_all()


def _batch_se(samples):
    """Mean and batch-means standard error for autocorrelated rows."""
    size = samples.shape[0] // _BATCHES
    trimmed = samples[: _BATCHES * size].reshape(_BATCHES, size, -1)
    means = trimmed.mean(axis=1)
    return means.mean(axis=0), means.std(axis=0, ddof=1) / math.sqrt(_BATCHES)


def geweke_joint_test(p=2, q=1, n=20, n_rounds=50_000, seed=0, tau=0.5,
                      corrupt=None, hyper=None, num_basis=20):
    """Run both simulators and return per-test-function z-scores.

    ``corrupt`` names one conjugate rate term ('t2_rate', 'c_rate',
    'l2_rate', 'zeta_rate') to scale inside the successive-conditional
    sampler, for verifying the harness detects a broken update.
    """
    hyper = hyper or PriorHyper()
    root = np.random.SeedSequence([int(seed), 0x6E3E])
    rng_x, rng_mc, rng_sc = (np.random.default_rng(s) for s in root.spawn(3))

    X = rng_x.standard_normal((n, q))
    bases = build_bases(X, num_basis=num_basis)
    dims = [b.reduced_dim for b in bases]
    ordering = np.arange(p)
    cfg = SamplerConfig(mode="oracle", ordering=ordering, iters=2, burnin=1,
                        hyper=hyper, num_basis=num_basis)

    y0 = np.zeros((n, p))
    mc_chain = Chain(y0, X, bases, tau, cfg, rng=rng_mc, nodes=list(range(p)))
    sc_chain = Chain(y0, X, bases, tau, cfg, rng=rng_sc, nodes=list(range(p)),
                     corrupt=corrupt)

    fns = []
    for block in mc_chain.blocks():
        fns.extend(_block_functions(block.h, block.j))
    fns.extend(_data_functions(p))
    names = [name for name, _ in fns]

    def evaluate(chain, out):
        for i, (_, fn) in enumerate(fns):
            out[i] = fn(chain)

    mc_samples = np.empty((n_rounds, len(fns)))
    for r in range(n_rounds):
        _prior_reset(mc_chain, rng_mc, hyper, dims)
        _regenerate_data(mc_chain, rng_mc, tau)
        evaluate(mc_chain, mc_samples[r])

    _prior_reset(sc_chain, rng_sc, hyper, dims)
    _regenerate_data(sc_chain, rng_sc, tau)
    sc_samples = np.empty((n_rounds, len(fns)))
    for r in range(n_rounds):
        sc_chain.sweep()
        _regenerate_data(sc_chain, rng_sc, tau)
        evaluate(sc_chain, sc_samples[r])

    mc_mean = mc_samples.mean(axis=0)
    mc_se = mc_samples.std(axis=0, ddof=1) / math.sqrt(n_rounds)
    sc_mean, sc_se = _batch_se(sc_samples)
    z = (mc_mean - sc_mean) / np.sqrt(mc_se ** 2 + sc_se ** 2)
    return GewekeReport(test_functions=names, z_scores=z, mc_means=mc_mean,
                        sc_means=sc_mean, mc_se=mc_se, sc_se=sc_se,
                        n_rounds=n_rounds, corrupt=corrupt)
