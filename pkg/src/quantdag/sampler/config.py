"""Sampler configuration and the threshold step-size adaptation rule."""

from dataclasses import dataclass, field

import numpy as np

from ..prior import PriorHyper
from ..splines import DEFAULT_NUM_BASIS, DEFAULT_VAR_THRESHOLD

MODES = ("oracle", "qdagx", "misspecified")

# Default chain lengths by mode: the factorized (given-ordering) chains run
# 20000/10000 and the joint unknown-ordering chain 5000/2500, both thinned
# by 10.
DEFAULT_ITERS = {"oracle": 20_000, "misspecified": 20_000, "qdagx": 5_000}
DEFAULT_BURNIN = {"oracle": 10_000, "misspecified": 10_000, "qdagx": 2_500}
DEFAULT_THIN = 10

# Random-walk proposal scales; sigma_t = step_t_base * 2**z with the integer
# exponent z adapted inside step_t_exponent_range during burn-in.
DEFAULT_STEP_ETA = 0.1
DEFAULT_STEP_XI = 0.1
DEFAULT_STEP_MU = 0.5
DEFAULT_STEP_T_BASE = 0.1
STEP_T_EXPONENT_RANGE = (-4, 4)
ADAPT_WINDOW = 100
ADAPT_BAND = (0.2, 0.4)


@dataclass
class SamplerConfig:
    """Everything a chain needs besides the data.

    ``iters``/``burnin`` default per mode when left as None. ``ordering`` is
    required for the oracle and misspecified modes and holds the node
    ordering actually used (children before parents).
    """

    mode: str = "qdagx"
    iters: int = None
    burnin: int = None
    thin: int = DEFAULT_THIN
    step_eta: float = DEFAULT_STEP_ETA
    step_xi: float = DEFAULT_STEP_XI
    step_mu: float = DEFAULT_STEP_MU
    step_t_base: float = DEFAULT_STEP_T_BASE
    step_t_exponent_range: tuple = STEP_T_EXPONENT_RANGE
    adapt_window: int = ADAPT_WINDOW
    seed: int = 0
    ordering: np.ndarray = None
    hyper: PriorHyper = field(default_factory=PriorHyper)
    num_basis: int = DEFAULT_NUM_BASIS
    var_threshold: float = DEFAULT_VAR_THRESHOLD

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.iters is None:
            self.iters = DEFAULT_ITERS[self.mode]
        if self.burnin is None:
            self.burnin = DEFAULT_BURNIN[self.mode]
        if not 0 <= self.burnin < self.iters:
            raise ValueError("need 0 <= burnin < iters")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if min(self.step_eta, self.step_xi, self.step_mu, self.step_t_base) <= 0:
            raise ValueError("step sizes must be positive")
        if self.mode != "qdagx" and self.ordering is None:
            raise ValueError(f"mode {self.mode!r} requires an ordering")
        if self.ordering is not None:
            self.ordering = np.asarray(self.ordering, dtype=np.int64)

    @property
    def draw_count(self):
        return (self.iters - self.burnin) // self.thin


def adapt_threshold_step(acceptance_window_rate, current_z,
                         band=ADAPT_BAND, z_range=STEP_T_EXPONENT_RANGE):
    """Burn-in adaptation of the threshold proposal exponent.

    Decrements z when the window acceptance rate falls below the band,
    increments when above, and clamps to ``z_range``.
    """
    z = current_z
    if acceptance_window_rate < band[0]:
        z -= 1
    elif acceptance_window_rate > band[1]:
        z += 1
    return max(z_range[0], min(z_range[1], z))
