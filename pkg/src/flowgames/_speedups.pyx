# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled reachability and subset-search kernels.

Bit-identical twins of flowgames._kernels_py; subjects are bits of a 64-bit
word, so callers route games with more than 64 producers to the fallback.
"""

from libc.stdlib cimport free, malloc

BACKEND_NAME = "cython"


def plain_received(int[:] indptr, int[:] indices, unsigned long long[:] interest,
                   int n, int p, int skip):
    """Per-user received-subject masks under plain social filtering."""
    cdef unsigned long long* received
    cdef char* visited
    cdef int* stack
    cdef int s, node, k, w, top
    cdef unsigned long long bit
    received = <unsigned long long*> malloc(n * sizeof(unsigned long long))
    visited = <char*> malloc(n if n else 1)
    stack = <int*> malloc((n + 1) * sizeof(int))
    if received == NULL or visited == NULL or stack == NULL:
        free(received); free(visited); free(stack)
        raise MemoryError()
    try:
        for w in range(n):
            received[w] = 0
        for s in range(p):
            bit = (<unsigned long long> 1) << s
            for w in range(n):
                visited[w] = 0
            if 0 <= skip < n:
                visited[skip] = 1
            top = 0
            stack[top] = n + s
            top += 1
            while top:
                top -= 1
                node = stack[top]
                for k in range(indptr[node], indptr[node + 1]):
                    w = indices[k]
                    if visited[w]:
                        continue
                    visited[w] = 1
                    received[w] |= bit
                    if interest[w] & bit:
                        stack[top] = w
                        top += 1
        return [received[w] for w in range(n)]
    finally:
        free(received); free(visited); free(stack)


def expertise_received(int[:] indptr, int[:] indices, int[:] f_indptr, int[:] f_indices,
                       unsigned long long[:] interest, int[:] dist, int[:] order,
                       int n, int p, int skip):
    """Per-user received masks under expertise filtering (distance-ordered groups)."""
    cdef unsigned long long* received
    cdef char* retrans
    cdef char* rec
    cdef int* group
    cdef int s, i, j, k, u, e, d, base, prod, g, gsize
    cdef bint changed, hit
    cdef unsigned long long bit
    received = <unsigned long long*> malloc(n * sizeof(unsigned long long))
    retrans = <char*> malloc(n if n else 1)
    rec = <char*> malloc(n if n else 1)
    group = <int*> malloc((n + 1) * sizeof(int))
    if received == NULL or retrans == NULL or rec == NULL or group == NULL:
        free(received); free(retrans); free(rec); free(group)
        raise MemoryError()
    try:
        for u in range(n):
            received[u] = 0
        for s in range(p):
            bit = (<unsigned long long> 1) << s
            prod = n + s
            base = s * n
            for u in range(n):
                retrans[u] = 0
                rec[u] = 0
            i = 0
            while i < n:
                d = dist[order[base + i] * p + s]
                j = i
                gsize = 0
                while j < n:
                    u = order[base + j]
                    if dist[u * p + s] != d:
                        break
                    if u != skip:
                        group[gsize] = u
                        gsize += 1
                    j += 1
                changed = True
                while changed:
                    changed = False
                    for g in range(gsize):
                        u = group[g]
                        if rec[u]:
                            continue
                        hit = False
                        for k in range(f_indptr[u], f_indptr[u + 1]):
                            e = f_indices[k]
                            if e == prod:
                                hit = True
                                break
                            if e < n and (retrans[e] or (rec[e] and (interest[e] & bit)
                                                         and dist[e * p + s] == d)):
                                hit = True
                                break
                        if hit:
                            rec[u] = 1
                            received[u] |= bit
                            changed = True
                for g in range(gsize):
                    u = group[g]
                    if rec[u] and (interest[u] & bit):
                        retrans[u] = 1
                i = j
        return [received[u] for u in range(n)]
    finally:
        free(received); free(retrans); free(rec); free(group)


cdef bint _lex_less(int* a, int ka, int* b, int kb):
    cdef int i
    cdef int m = ka if ka < kb else kb
    for i in range(m):
        if a[i] != b[i]:
            return a[i] < b[i]
    return ka < kb


def best_weighted_subset(delivery, weights, int p, int k_max):
    """Exhaustive max-utility endpoint subset of size 1..k_max (lex-min ties)."""
    cdef int ne = len(delivery)
    cdef unsigned long long* masks
    cdef long long* w
    cdef int* idx
    cdef int* best_idx
    cdef int best_len = 0
    cdef long long best_util = -1
    cdef long long util
    cdef unsigned long long mask
    cdef int k, i, s, kk
    masks = <unsigned long long*> malloc((ne if ne else 1) * sizeof(unsigned long long))
    w = <long long*> malloc((p if p else 1) * sizeof(long long))
    idx = <int*> malloc((k_max + 1) * sizeof(int))
    best_idx = <int*> malloc((k_max + 1) * sizeof(int))
    if masks == NULL or w == NULL or idx == NULL or best_idx == NULL:
        free(masks); free(w); free(idx); free(best_idx)
        raise MemoryError()
    try:
        for i in range(ne):
            masks[i] = <unsigned long long> delivery[i]
        for s in range(p):
            w[s] = <long long> weights[s]
        for k in range(1, (k_max if k_max < ne else ne) + 1):
            for i in range(k):
                idx[i] = i
            while True:
                mask = 0
                for i in range(k):
                    mask |= masks[idx[i]]
                util = 0
                for s in range(p):
                    if (mask >> s) & 1:
                        util += w[s]
                if util > best_util or (util == best_util and best_len
                                        and _lex_less(idx, k, best_idx, best_len)):
                    best_util = util
                    best_len = k
                    for i in range(k):
                        best_idx[i] = idx[i]
                i = k - 1
                while i >= 0 and idx[i] == ne - k + i:
                    i -= 1
                if i < 0:
                    break
                idx[i] += 1
                for kk in range(i + 1, k):
                    idx[kk] = idx[kk - 1] + 1
        if best_len == 0:
            return best_util, None
        return best_util, tuple(best_idx[i] for i in range(best_len))
    finally:
        free(masks); free(w); free(idx); free(best_idx)
