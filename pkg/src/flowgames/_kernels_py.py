"""Pure-Python reachability and subset-search kernels (fallback backend).

All three functions have compiled twins in ``flowgames._speedups``; inputs and
outputs must stay bit-identical between the two backends. Subjects are bits of
an integer mask, nodes are dense indices (users 0..n-1, producers n..n+p-1),
and adjacency is CSR-style (indptr/indices).
"""

from __future__ import annotations

from itertools import combinations
from typing import Optional, Sequence

BACKEND_NAME = "python"


def plain_received(indptr, indices, interest, n: int, p: int, skip: int) -> list[int]:
    """Per-user received-subject masks under plain social filtering.

    ``indptr``/``indices`` map each node to the users following it. A subject
    spreads from its producer node through users interested in it; the final
    hop to an uninterested follower still delivers. ``skip`` (or -1) removes
    one user from the graph entirely.
    """
    received = [0] * n
    for s in range(p):
        bit = 1 << s
        visited = bytearray(n)
        if 0 <= skip < n:
            visited[skip] = 1
        stack = [n + s]
        while stack:
            node = stack.pop()
            for k in range(indptr[node], indptr[node + 1]):
                w = indices[k]
                if visited[w]:
                    continue
                visited[w] = 1
                received[w] |= bit
                if interest[w] & bit:
                    stack.append(w)
    return received


def expertise_received(
    indptr, indices, f_indptr, f_indices, interest, dist, order, n: int, p: int, skip: int
) -> list[int]:
    """Per-user received masks under expertise filtering.

    A hop from user v to user u carries subject s only when v is interested in
    s and sits at least as close to s as u. Users are processed per subject in
    non-decreasing distance order (``order``), with a fixpoint inside each
    equal-distance group; ``f_indptr``/``f_indices`` give each user's followed
    nodes. ``dist`` is row-major n*p.
    """
    received = [0] * n
    for s in range(p):
        bit = 1 << s
        prod = n + s
        base = s * n
        retrans = bytearray(n)
        rec = bytearray(n)
        i = 0
        while i < n:
            d = dist[order[base + i] * p + s]
            j = i
            group = []
            while j < n:
                u = order[base + j]
                if dist[u * p + s] != d:
                    break
                if u != skip:
                    group.append(u)
                j += 1
            changed = True
            while changed:
                changed = False
                for u in group:
                    if rec[u]:
                        continue
                    for k in range(f_indptr[u], f_indptr[u + 1]):
                        e = f_indices[k]
                        if e == prod or (
                            e < n
                            and (
                                retrans[e]
                                or (rec[e] and (interest[e] & bit) and dist[e * p + s] == d)
                            )
                        ):
                            rec[u] = 1
                            received[u] |= bit
                            changed = True
                            break
            for u in group:
                if rec[u] and (interest[u] & bit):
                    retrans[u] = 1
            i = j
    return received


def best_weighted_subset(
    delivery: Sequence[int], weights: Sequence[int], p: int, k_max: int
) -> tuple[int, Optional[tuple[int, ...]]]:
    """Exhaustive search for the max-utility endpoint subset of size 1..k_max.

    ``delivery[i]`` is the subject mask endpoint i contributes; utility is the
    weight sum over the union mask. Ties prefer the lexicographically smallest
    index tuple (endpoints must be passed sorted by endpoint id).
    """
    n_endpoints = len(delivery)
    best_util = -1
    best: Optional[tuple[int, ...]] = None
    for k in range(1, min(k_max, n_endpoints) + 1):
        for combo in combinations(range(n_endpoints), k):
            mask = 0
            for i in combo:
                mask |= delivery[i]
            util = 0
            mm = mask
            s = 0
            while mm:
                if mm & 1:
                    util += weights[s]
                mm >>= 1
                s += 1
            if util > best_util or (util == best_util and combo < best):
                best_util = util
                best = combo
    return best_util, best
