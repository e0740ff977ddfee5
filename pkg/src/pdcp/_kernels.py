"""Compiled inner loops for the persistence reduction."""
import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True, nogil=True)
def union_find_h0(n_vertices, edge_vertices):
    """Elder-rule union-find over edges given in filtration order.

    Vertex ids here are filtration ranks, so the smaller root is the elder.
    Returns (birth_vertex, death_edge) index arrays for every merge and a
    mask of the edges that merged two components.
    """
    parent = np.arange(n_vertices)
    n_edges = edge_vertices.shape[0]
    births = np.empty(n_vertices, np.int64)
    deaths = np.empty(n_vertices, np.int64)
    negative = np.zeros(n_edges, np.bool_)
    n_pairs = 0
    for e in range(n_edges):
        ru = _find(parent, edge_vertices[e, 0])
        rv = _find(parent, edge_vertices[e, 1])
        if ru == rv:
            continue
        if ru > rv:
            ru, rv = rv, ru
        parent[rv] = ru
        births[n_pairs] = rv
        deaths[n_pairs] = e
        n_pairs += 1
        negative[e] = True
    return births[:n_pairs], deaths[:n_pairs], negative


@numba.njit(cache=True, nogil=True)
def _symdiff(a, na, b, nb, out):
    # merge of two ascending index lists, dropping common entries (Z/2 sum)
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@numba.njit(cache=True, nogil=True)
def reduce_coboundary(indptr, indices, n_rows, skip):
    """Column reduction of the edge coboundary matrix over Z/2.

    Column ``e`` holds the (ascending) filtration positions of the triangles
    containing edge ``e``.  Columns are processed from the last edge to the
    first; the pivot of a column is its smallest entry.  Columns flagged in
    ``skip`` are cleared without reduction (their cohomology class is
    already accounted for by dimension 0).

    Returns (edge, triangle) pivot pairs and the edges whose column reduced
    to zero without being skipped.
    """
    n_cols = indptr.shape[0] - 1
    owner = np.full(n_rows, -1, np.int64)
    # reduced columns live in a flat pool addressed by (start, length)
    store_start = np.zeros(n_cols, np.int64)
    store_len = np.zeros(n_cols, np.int64)
    cap = max(16, 2 * indices.shape[0])
    pool = np.empty(cap, np.int64)
    used = 0

    # any Z/2 sum of columns is a subset of the rows
    buf_a = np.empty(n_rows + 1, np.int64)
    buf_b = np.empty(n_rows + 1, np.int64)

    pair_e = np.empty(n_cols, np.int64)
    pair_t = np.empty(n_cols, np.int64)
    n_pairs = 0
    essential = np.empty(n_cols, np.int64)
    n_ess = 0

    for e in range(n_cols - 1, -1, -1):
        if skip[e]:
            continue
        na = indptr[e + 1] - indptr[e]
        for i in range(na):
            buf_a[i] = indices[indptr[e] + i]
        cur = buf_a
        other = buf_b
        while na > 0:
            j = owner[cur[0]]
            if j < 0:
                break
            nb = store_len[j]
            s = store_start[j]
            na = _symdiff(cur, na, pool[s : s + nb], nb, other)
            cur, other = other, cur
        if na == 0:
            essential[n_ess] = e
            n_ess += 1
            continue
        if used + na > pool.shape[0]:
            bigger = np.empty(max(2 * pool.shape[0], used + na), np.int64)
            bigger[:used] = pool[:used]
            pool = bigger
        for i in range(na):
            pool[used + i] = cur[i]
        store_start[e] = used
        store_len[e] = na
        used += na
        owner[cur[0]] = e
        pair_e[n_pairs] = e
        pair_t[n_pairs] = cur[0]
        n_pairs += 1
    return pair_e[:n_pairs], pair_t[:n_pairs], essential[:n_ess]


@numba.njit(cache=True, nogil=True)
def face_lookup(n_ids, edge_vertices, tri_vertices):
    """Positions of each triangle's three edges among ``edge_vertices`` (-1 if absent).

    Edges are bucketed by their lower vertex (counting sort) and each bucket
    is sorted by upper vertex, so a face is found by binary search.
    """
    n_edges = edge_vertices.shape[0]
    start = np.zeros(n_ids + 1, np.int64)
    for e in range(n_edges):
        start[edge_vertices[e, 0] + 1] += 1
    for v in range(n_ids):
        start[v + 1] += start[v]
    fill = start[:-1].copy()
    upper = np.empty(n_edges, np.int64)
    pos = np.empty(n_edges, np.int64)
    for e in range(n_edges):
        slot = fill[edge_vertices[e, 0]]
        upper[slot] = edge_vertices[e, 1]
        pos[slot] = e
        fill[edge_vertices[e, 0]] += 1
    for v in range(n_ids):
        lo, hi = start[v], start[v + 1]
        if hi - lo > 32:
            order = np.argsort(upper[lo:hi])
            upper[lo:hi] = upper[lo:hi][order]
            pos[lo:hi] = pos[lo:hi][order]
        else:
            for i in range(lo + 1, hi):
                u, p = upper[i], pos[i]
                j = i - 1
                while j >= lo and upper[j] > u:
                    upper[j + 1] = upper[j]
                    pos[j + 1] = pos[j]
                    j -= 1
                upper[j + 1] = u
                pos[j + 1] = p

    n_tris = tri_vertices.shape[0]
    out = np.full((n_tris, 3), -1, np.int64)
    for t in range(n_tris):
        for f in range(3):
            # face f omits vertex 2 - f: (v0, v1), (v0, v2), (v1, v2)
            if f == 0:
                a, b = tri_vertices[t, 0], tri_vertices[t, 1]
            elif f == 1:
                a, b = tri_vertices[t, 0], tri_vertices[t, 2]
            else:
                a, b = tri_vertices[t, 1], tri_vertices[t, 2]
            if a < 0 or a >= n_ids:
                continue
            lo, hi = start[a], start[a + 1]
            while lo < hi:
                mid = (lo + hi) // 2
                if upper[mid] < b:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < start[a + 1] and upper[lo] == b:
                out[t, f] = pos[lo]
    return out


@numba.njit(cache=True, nogil=True)
def coboundary_csr(n_edges, tri_edges):
    """Edge -> containing triangles, each row in ascending triangle position."""
    indptr = np.zeros(n_edges + 1, np.int64)
    n_tris = tri_edges.shape[0]
    for t in range(n_tris):
        for f in range(3):
            indptr[tri_edges[t, f] + 1] += 1
    for e in range(n_edges):
        indptr[e + 1] += indptr[e]
    fill = indptr[:-1].copy()
    indices = np.empty(indptr[n_edges], np.int64)
    for t in range(n_tris):
        for f in range(3):
            e = tri_edges[t, f]
            indices[fill[e]] = t
            fill[e] += 1
    return indptr, indices


@numba.njit(cache=True, nogil=True)
def first_order_violation(values, dims, vertices):
    """First i where row i+1 does not follow row i in (value, dim, vertices) order.

    Returns (i, 1) for a descent, (i, 2) for a repeated row, (-1, 0) if sorted.
    """
    for i in range(values.shape[0] - 1):
        a, b = values[i], values[i + 1]
        if a != b:
            if a > b:
                return i, 1
            continue
        if dims[i] != dims[i + 1]:
            if dims[i] > dims[i + 1]:
                return i, 1
            continue
        decided = False
        for j in range(3):
            u, v = vertices[i, j], vertices[i + 1, j]
            if u != v:
                if u > v:
                    return i, 1
                decided = True
                break
        if not decided:
            return i, 2
    return -1, 0
