"""Three-level hierarchical sparsity: supports, thresholding, projection.

A lifted vector is admissible for a profile (s, sigma, mu) when at most mu
user blocks are nonzero, every nonzero user block has at most sigma active
delay taps, and every active tap block is s-sparse. Thresholding selects
the admissible support of largest captured energy level by level; ties
resolve toward the smallest index at every level, which makes the
selection a deterministic function of its input (an all-zero input yields
the lexicographically first admissible support).

Block and user scores are captured squared magnitudes. Scoring by plain
magnitude sums would pick the same entries inside a block but can rank
whole blocks differently, and only the squared form makes the level-wise
selection the exact energy-optimal admissible support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .measurement import ModelDims, as_blocks

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class SparsityProfile:
    """Sparsity levels: s entries per tap block, sigma taps per user, mu
    active users, within the given model dimensions."""

    s: int
    sigma: int
    mu: int
    dims: ModelDims

    def __post_init__(self):
        if not 1 <= self.s <= self.dims.E:
            raise ValueError(f"s must be in [1, {self.dims.E}], got {self.s}")
        if not 1 <= self.sigma <= self.dims.N_d:
            raise ValueError(f"sigma must be in [1, {self.dims.N_d}], got {self.sigma}")
        if not 1 <= self.mu <= self.dims.N_r:
            raise ValueError(f"mu must be in [1, {self.dims.N_r}], got {self.mu}")

    @property
    def support_size(self) -> int:
        return self.mu * self.sigma * self.s

    def admits(self, support: "HierSupport") -> bool:
        """True when the support satisfies all three level bounds."""
        users = support.active_users
        if len(users) > self.mu:
            return False
        for p in users:
            taps = support.taps(p)
            if len(taps) > self.sigma:
                return False
            if any(len(support.entries(p, d)) > self.s for d in taps):
                return False
        return True


class HierSupport:
    """Canonically ordered set of (user, tap, entry) index triples.

    Equality and hashing go through the sorted triple tuple, so two
    supports built in different insertion orders compare equal.
    """

    __slots__ = ("triples",)

    def __init__(self, triples: Iterable[Triple]):
        canon = sorted({(int(p), int(d), int(e)) for p, d, e in triples})
        object.__setattr__(self, "triples", tuple(canon))

    def __setattr__(self, name, value):
        raise AttributeError("HierSupport is immutable")

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __contains__(self, triple) -> bool:
        return tuple(triple) in set(self.triples)

    def __eq__(self, other) -> bool:
        return isinstance(other, HierSupport) and self.triples == other.triples

    def __hash__(self) -> int:
        return hash(self.triples)

    def __repr__(self) -> str:
        return f"HierSupport({list(self.triples)!r})"

    @property
    def active_users(self) -> tuple[int, ...]:
        return tuple(sorted({p for p, _, _ in self.triples}))

    def taps(self, user: int) -> tuple[int, ...]:
        return tuple(sorted({d for p, d, _ in self.triples if p == user}))

    def entries(self, user: int, tap: int) -> tuple[int, ...]:
        return tuple(sorted(e for p, d, e in self.triples if p == user and d == tap))

    def flat_indices(self, dims: ModelDims) -> np.ndarray:
        """Flat lifted-vector positions, in canonical order."""
        return np.array(
            [(p * dims.N_d + d) * dims.E + e for p, d, e in self.triples], dtype=np.intp
        )

    def restricted_to(self, users: Iterable[int]) -> "HierSupport":
        keep = set(int(u) for u in users)
        return HierSupport(t for t in self.triples if t[0] in keep)


def support_equal(a: HierSupport, b: HierSupport) -> bool:
    """True iff both supports contain exactly the same triples."""
    return a == b


def top_s(g, s: int) -> np.ndarray:
    """Indices of the s largest magnitudes of g, ascending.

    Ties break toward the smallest index (stable ranking), so the result
    is a deterministic function of g.
    """
    g = np.asarray(g)
    if g.ndim != 1:
        raise ValueError(f"expected a vector, got shape {g.shape}")
    if not 0 <= s <= g.size:
        raise ValueError(f"s must be in [0, {g.size}], got {s}")
    if s == 0:
        return np.array([], dtype=np.intp)
    ranked = np.argsort(-np.abs(g), kind="stable")
    return np.sort(ranked[:s])


def hier_threshold(g, profile: SparsityProfile) -> HierSupport:
    """Best admissible support of g for the profile.

    Selection is nested: the s largest magnitudes inside every tap block,
    the sigma blocks of largest captured energy per user, the mu users of
    largest captured energy overall. The result maximizes the captured
    squared mass over all admissible supports.
    """
    dims = profile.dims
    mags = np.abs(as_blocks(g, dims))  # (N_r, N_d, E)
    ranked = np.argsort(-mags, axis=-1, kind="stable")
    picked = ranked[..., : profile.s]  # (N_r, N_d, s)
    block_score = np.take_along_axis(mags**2, picked, axis=-1).sum(axis=-1)
    tap_ranked = np.argsort(-block_score, axis=-1, kind="stable")
    taps = tap_ranked[..., : profile.sigma]  # (N_r, sigma)
    user_score = np.take_along_axis(block_score, taps, axis=-1).sum(axis=-1)
    users = np.argsort(-user_score, kind="stable")[: profile.mu]

    triples: list[Triple] = []
    for p in sorted(users.tolist()):
        for d in sorted(taps[p].tolist()):
            for e in sorted(picked[p, d].tolist()):
                triples.append((p, d, e))
    return HierSupport(triples)


def support_of(z, dims: ModelDims) -> HierSupport:
    """Support triples of the nonzero entries of a lifted vector."""
    z = np.asarray(z)
    if z.shape != (dims.lifted_dim,):
        raise ValueError(f"expected shape ({dims.lifted_dim},), got {z.shape}")
    flat = np.flatnonzero(z)
    entries = flat % dims.E
    taps = (flat // dims.E) % dims.N_d
    users = flat // (dims.E * dims.N_d)
    return HierSupport(zip(users.tolist(), taps.tolist(), entries.tolist()))


def project(g, support: HierSupport, dims: ModelDims) -> np.ndarray:
    """Zero g outside the support (idempotent)."""
    g = np.asarray(g)
    if g.shape != (dims.lifted_dim,):
        raise ValueError(f"expected shape ({dims.lifted_dim},), got {g.shape}")
    out = np.zeros_like(g)
    idx = support.flat_indices(dims)
    out[idx] = g[idx]
    return out
