"""Dense bitmask engine shared by propagation, dynamics, and analysis.

Users get indices 0..n-1 (id order), producers n..n+p-1. A configuration is a
list of sorted node-index tuples, one per user. Everything here is exact
integer arithmetic on subject bitmasks.
"""

from __future__ import annotations

from array import array
from typing import Optional, Sequence

from . import kernels
from .model import (
    MODE_EXPERTISE,
    UTILITY_NEAREST,
    Configuration,
    FlowGame,
    ValidationError,
)

DenseConfig = list  # list[tuple[int, ...]] indexed by user index


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class GameCore:
    """Precomputed dense tables for one immutable game."""

    def __init__(self, game: FlowGame):
        self.game = game
        self.n = game.n
        self.p = game.p
        self.uid_of = [u.id for u in game.users]
        self.sid_of = list(game.producers)
        self.uidx = {uid: i for i, uid in enumerate(self.uid_of)}
        self.sidx = {sid: i for i, sid in enumerate(self.sid_of)}
        self.id_of_node = self.uid_of + self.sid_of
        self.node_of_id = {eid: i for i, eid in enumerate(self.id_of_node)}
        self.budgets = [u.budget for u in game.users]

        self._impl = kernels.impl_for(self.p)
        self._arrays = self._impl.BACKEND_NAME == "cython"

        self.interest = [0] * self.n
        self.weights = [[0] * self.p for _ in range(self.n)]
        for i, u in enumerate(game.users):
            for sid, ticks in u.weights.items():
                s = self.sidx[sid]
                self.interest[i] |= 1 << s
                self.weights[i][s] = ticks
        self._interest_buf = array("Q", self.interest) if self._arrays else self.interest

        # endpoints available to each user, sorted by endpoint id
        nodes_by_id = sorted(range(self.n + self.p), key=lambda x: self.id_of_node[x])
        self._nodes_by_id = nodes_by_id
        self._endpoints_cache: dict[int, list[int]] = {}

        self.expertise = game.mode == MODE_EXPERTISE
        self.nearest = game.utility_mode == UTILITY_NEAREST
        self.dist: Optional[list[list[int]]] = None
        if game.metric is not None and all(u.ball is not None for u in game.users):
            self._build_metric_tables()

    # -- metric tables -------------------------------------------------------

    def _build_metric_tables(self) -> None:
        game = self.game
        space = game.metric
        self.dist = [
            [space.distance(u.ball.center, sid) for sid in self.sid_of] for u in game.users
        ]
        self.radius = [u.ball.radius for u in game.users]
        self.subject_order = [
            sorted(range(self.n), key=lambda u, s=s: (self.dist[u][s], u)) for s in range(self.p)
        ]
        self.closer = [
            [
                sum(1 << s for s in range(self.p) if self.dist[v][s] <= self.dist[u][s])
                for u in range(self.n)
            ]
            for v in range(self.n)
        ]
        # per-user (distance, subject mask) groups within the interest radius
        self.groups: list[list[tuple[int, int]]] = []
        for u in range(self.n):
            by_d: dict[int, int] = {}
            for s in range(self.p):
                d = self.dist[u][s]
                if d <= self.radius[u]:
                    by_d[d] = by_d.get(d, 0) | (1 << s)
            self.groups.append(sorted(by_d.items()))
        all_dists = sorted({v for row in space.matrix for v in row})
        self.distance_index = {d: i for i, d in enumerate(all_dists)}
        self.distance_count = len(all_dists)
        dist_flat = [self.dist[u][s] for u in range(self.n) for s in range(self.p)]
        order_flat = [u for s in range(self.p) for u in self.subject_order[s]]
        if self._arrays:
            self._dist_buf = array("i", dist_flat)
            self._order_buf = array("i", order_flat)
        else:
            self._dist_buf = dist_flat
            self._order_buf = order_flat

    def _require_metric(self) -> None:
        if self.dist is None:
            raise ValidationError("operation requires a metric with per-user interest balls")

    # -- configuration plumbing ----------------------------------------------

    def to_dense(self, config: Configuration) -> DenseConfig:
        dense: DenseConfig = []
        for uid in self.uid_of:
            try:
                nodes = tuple(sorted(self.node_of_id[e] for e in config.strategy(uid)))
            except KeyError as exc:
                raise ValidationError(f"user {uid}: unknown endpoint {exc.args[0]}") from None
            dense.append(nodes)
        return dense

    def to_config(self, dense: DenseConfig) -> Configuration:
        return Configuration(
            {
                self.uid_of[u]: frozenset(self.id_of_node[x] for x in dense[u])
                for u in range(self.n)
            }
        )

    def endpoints_for(self, u: int) -> list[int]:
        """All followable nodes for user index u, sorted by endpoint id."""
        cached = self._endpoints_cache.get(u)
        if cached is None:
            cached = [x for x in self._nodes_by_id if x != u]
            self._endpoints_cache[u] = cached
        return cached

    def _csr(self, pairs: Sequence[Sequence[int]], n_rows: int):
        counts = [0] * (n_rows + 1)
        for row in pairs:
            for dst in row:
                counts[dst + 1] += 1
        for i in range(n_rows):
            counts[i + 1] += counts[i]
        indices = [0] * counts[n_rows]
        fill = counts[:-1].copy()
        for src, row in enumerate(pairs):
            for dst in row:
                indices[fill[dst]] = src
                fill[dst] += 1
        return counts, indices

    # -- reachability ----------------------------------------------------------

    def received_masks(self, dense: DenseConfig, skip: int = -1) -> list[int]:
        """Subject mask each user receives; ``skip`` removes one user entirely."""
        n_nodes = self.n + self.p
        indptr, indices = self._csr(dense, n_nodes)
        if self._arrays:
            indptr = array("i", indptr)
            indices = array("i", indices)
        if self.expertise:
            self._require_metric()
            f_counts = [0] * (self.n + 1)
            for u in range(self.n):
                f_counts[u + 1] = f_counts[u] + len(dense[u])
            f_indices = [x for u in range(self.n) for x in dense[u]]
            if self._arrays:
                f_counts = array("i", f_counts)
                f_indices = array("i", f_indices)
            return self._impl.expertise_received(
                indptr,
                indices,
                f_counts,
                f_indices,
                self._interest_buf,
                self._dist_buf,
                self._order_buf,
                self.n,
                self.p,
                skip,
            )
        return self._impl.plain_received(
            indptr, indices, self._interest_buf, self.n, self.p, skip
        )

    def delivery_masks(self, dense: DenseConfig, u: int) -> list[int]:
        """Per-node mask of subjects the node would deliver to user u if followed."""
        rec = self.received_masks(dense, skip=u)
        masks = [0] * (self.n + self.p)
        for v in range(self.n):
            if v == u:
                continue
            m = rec[v] & self.interest[v]
            if self.expertise and m:
                m &= self.closer[v][u]
            masks[v] = m
        for s in range(self.p):
            masks[self.n + s] = 1 << s
        return masks

    def mask_of_strategy(self, delivery: list[int], nodes: Sequence[int]) -> int:
        m = 0
        for x in nodes:
            m |= delivery[x]
        return m

    # -- utilities --------------------------------------------------------------

    def weighted_utility(self, u: int, mask: int) -> int:
        w = self.weights[u]
        total = 0
        for s in iter_bits(mask):
            total += w[s]
        return total

    def nearest_utility(self, u: int, mask: int) -> int:
        """Largest fully received radius around the user's center, capped at R_u."""
        self._require_metric()
        last = 0
        for d, group_mask in self.groups[u]:
            if group_mask & ~mask:
                return last
            last = d
        return self.radius[u]

    def utility_of_mask(self, u: int, mask: int) -> int:
        if self.nearest:
            return self.nearest_utility(u, mask)
        return self.weighted_utility(u, mask)

    def reconnection_ok(self, u: int, old_mask: int, new_mask: int) -> bool:
        """Nearest-subject priority: nothing strictly closer than the closest gain is lost."""
        lost = old_mask & ~new_mask
        if not lost:
            return True
        gained = new_mask & ~old_mask
        if not gained:
            return False
        d = self.dist[u]
        min_gained = min(d[s] for s in iter_bits(gained))
        min_lost = min(d[s] for s in iter_bits(lost))
        return min_lost >= min_gained

    # -- potentials ---------------------------------------------------------------

    def reception_counts(self, dense: DenseConfig) -> tuple[int, ...]:
        """(n_0..n_p): how many users receive exactly i subjects."""
        counts = [0] * (self.p + 1)
        for mask in self.received_masks(dense):
            counts[mask.bit_count()] += 1
        return tuple(counts)

    def distance_pair_counts(self, dense: DenseConfig) -> tuple[int, ...]:
        """Received (user, subject) pairs bucketed by center-to-subject distance."""
        self._require_metric()
        counts = [0] * self.distance_count
        rec = self.received_masks(dense)
        for u in range(self.n):
            d = self.dist[u]
            for s in iter_bits(rec[u]):
                counts[self.distance_index[d[s]]] += 1
        return tuple(counts)
