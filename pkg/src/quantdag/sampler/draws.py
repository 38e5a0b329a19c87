"""Posterior draw containers and the flat parameter layout.

Each edge block is serialized to a flat float64 vector with a fixed field
layout shared by the in-memory archive, the on-disk binary files and the
post-processing code. Field order:

    mu, t,
    nl_T, nl_c, nl_eta[q], nl_L[q], nl_zeta[q], nl_xi[sum B*], nl_m[sum B*],
    lin_T, lin_c, lin_eta[q], lin_L[q], lin_zeta[q], lin_xi[q], lin_m[q]

``m`` entries are stored as +/-1.0. Intercept blocks use parent index -1.
"""

from dataclasses import dataclass, field

import numpy as np

from ..prior import EdgeParamBlock, PxhsGroup

INTERCEPT = -1


@dataclass(frozen=True)
class ParamLayout:
    """Field offsets of the flat edge-parameter vector."""

    q: int
    dims: tuple

    fields: tuple = field(init=False)
    size: int = field(init=False)

    def __post_init__(self):
        q, dims = self.q, tuple(int(d) for d in self.dims)
        if len(dims) != q:
            raise ValueError("need one reduced dimension per covariate")
        object.__setattr__(self, "dims", dims)
        total_xi = sum(dims)
        spec = [
            ("mu", 1), ("t", 1),
            ("nl_T", 1), ("nl_c", 1), ("nl_eta", q), ("nl_L", q),
            ("nl_zeta", q), ("nl_xi", total_xi), ("nl_m", total_xi),
            ("lin_T", 1), ("lin_c", 1), ("lin_eta", q), ("lin_L", q),
            ("lin_zeta", q), ("lin_xi", q), ("lin_m", q),
        ]
        offsets = {}
        pos = 0
        for name, width in spec:
            offsets[name] = slice(pos, pos + width)
            pos += width
        object.__setattr__(self, "fields", tuple((n, w) for n, w in spec))
        object.__setattr__(self, "_offsets", offsets)
        object.__setattr__(self, "size", pos)

    def sl(self, name):
        """Slice of a named field within the flat vector."""
        return self._offsets[name]

    def xi_slice(self, family, k):
        """Slice of covariate k's xi (or m) block within its family field."""
        if family == "lin":
            start = self.sl("lin_xi").start + k
            return slice(start, start + 1)
        start = self.sl("nl_xi").start + sum(self.dims[:k])
        return slice(start, start + self.dims[k])

    def pack(self, block, out=None):
        vec = out if out is not None else np.empty(self.size)
        vec[self.sl("mu")] = block.mu
        vec[self.sl("t")] = block.threshold
        for tag, grp in (("nl", block.nonlinear), ("lin", block.linear)):
            vec[self.sl(f"{tag}_T")] = grp.T
            vec[self.sl(f"{tag}_c")] = grp.c
            vec[self.sl(f"{tag}_eta")] = grp.eta
            vec[self.sl(f"{tag}_L")] = grp.L
            vec[self.sl(f"{tag}_zeta")] = grp.zeta
            vec[self.sl(f"{tag}_xi")] = np.concatenate(grp.xi) if grp.xi else []
            vec[self.sl(f"{tag}_m")] = np.concatenate(grp.m) if grp.m else []
        return vec

    def unpack(self, vec):
        vec = np.asarray(vec, dtype=float)
        groups = {}
        for tag, dims in (("nl", self.dims), ("lin", (1,) * self.q)):
            xi_flat = vec[self.sl(f"{tag}_xi")]
            m_flat = vec[self.sl(f"{tag}_m")]
            xi, m, pos = [], [], 0
            for d in dims:
                xi.append(xi_flat[pos:pos + d].copy())
                m.append(m_flat[pos:pos + d].copy())
                pos += d
            groups[tag] = PxhsGroup(
                T=float(vec[self.sl(f"{tag}_T")][0]),
                c=float(vec[self.sl(f"{tag}_c")][0]),
                eta=vec[self.sl(f"{tag}_eta")].copy(),
                L=vec[self.sl(f"{tag}_L")].copy(),
                zeta=vec[self.sl(f"{tag}_zeta")].copy(),
                xi=xi, m=m,
            )
        return EdgeParamBlock(
            mu=float(vec[self.sl("mu")][0]),
            nonlinear=groups["nl"], linear=groups["lin"],
            threshold=float(vec[self.sl("t")][0]),
        )


@dataclass
class QuantileDagDraw:
    """One saved posterior state.

    ``edge_params`` maps (child, parent) to the flat parameter vector, with
    parent == INTERCEPT for the node intercept block. ``indicators`` is the
    implied per-individual adjacency and ``union`` its OR-reduction.
    """

    sweep_index: int
    edge_params: dict
    indicators: np.ndarray  # (n, p, p) bool
    union: np.ndarray       # (p, p) bool


@dataclass
class PosteriorDraws:
    """Thinned post-burn-in archive of one chain."""

    tau: float
    mode: str
    config: object
    layout: ParamLayout
    draws: list
    acceptance_rates: dict
    n: int
    p: int
    q: int
    ordering: np.ndarray = None

    def __post_init__(self):
        expected = self.config.draw_count
        if len(self.draws) != expected:
            raise ValueError(
                f"draw count {len(self.draws)} != (iters-burnin)//thin = {expected}")

    @property
    def edge_keys(self):
        return sorted(self.draws[0].edge_params) if self.draws else []

    def stacked(self, key):
        """(n_draws, layout.size) matrix of one edge's parameter series."""
        return np.stack([d.edge_params[key] for d in self.draws])

    def indicator_stack(self):
        """(n_draws, n, p, p) boolean stack of per-individual adjacencies."""
        return np.stack([d.indicators for d in self.draws])
