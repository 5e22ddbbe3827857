# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.intp_t idx_t


def scc(Py_ssize_t n, const idx_t[::1] indptr, const idx_t[::1] indices):
    cdef cnp.ndarray[idx_t, ndim=1] comp_arr = np.full(n, -1, dtype=np.intp)
    cdef idx_t[::1] comp = comp_arr
    cdef idx_t[::1] index = np.full(n, -1, dtype=np.intp)
    cdef idx_t[::1] low = np.zeros(n, dtype=np.intp)
    cdef idx_t[::1] nxt = np.zeros(n, dtype=np.intp)
    cdef idx_t[::1] stack = np.empty(n, dtype=np.intp)
    cdef idx_t[::1] call = np.empty(n, dtype=np.intp)
    cdef unsigned char[::1] onstack = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t sp = 0, cp = 0
    cdef idx_t counter = 0, ncomp = 0
    cdef idx_t root, v, w, u, i, end
    cdef bint descended

    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = 1
        nxt[root] = indptr[root]
        call[0] = root
        cp = 1
        while cp > 0:
            v = call[cp - 1]
            i = nxt[v]
            end = indptr[v + 1]
            descended = False
            while i < end:
                w = indices[i]
                i += 1
                if index[w] == -1:
                    nxt[v] = i
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = 1
                    nxt[w] = indptr[w]
                    call[cp] = w
                    cp += 1
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            nxt[v] = end
            if low[v] == index[v]:
                while True:
                    sp -= 1
                    w = stack[sp]
                    onstack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            cp -= 1
            if cp > 0:
                u = call[cp - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
    return ncomp, comp_arr


def bfs(Py_ssize_t n, const idx_t[::1] indptr, const idx_t[::1] indices, sources, idx_t max_depth=-1):
    cdef cnp.ndarray[idx_t, ndim=1] depth_arr = np.full(n, -1, dtype=np.intp)
    cdef idx_t[::1] depth = depth_arr
    cdef idx_t[::1] queue = np.empty(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t head = 0, tail = 0
    cdef idx_t v, w, i, s
    for s in sources:
        if depth[s] == -1:
            depth[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        if max_depth >= 0 and depth[v] >= max_depth:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            w = indices[i]
            if depth[w] == -1:
                depth[w] = depth[v] + 1
                queue[tail] = w
                tail += 1
    return depth_arr


def ft_sweep(Py_ssize_t n, const idx_t[::1] indptr, const idx_t[::1] indices,
             const idx_t[::1] rindptr, const idx_t[::1] rindices,
             const idx_t[::1] comp, Py_ssize_t ncomp, const idx_t[::1] qcode):
    cdef idx_t[::1] first = np.full(max(ncomp, 1), -1, dtype=np.intp)
    cdef idx_t[::1] cq = np.zeros(max(ncomp, 1), dtype=np.intp)
    cdef idx_t[::1] alt = np.full(max(ncomp, 1), -1, dtype=np.intp)
    cdef unsigned char[::1] mixed = np.zeros(max(ncomp, 1), dtype=np.uint8)
    cdef unsigned char[::1] dead = np.zeros(max(ncomp, 1), dtype=np.uint8)
    cdef unsigned char[::1] ftc = np.zeros(max(ncomp, 1), dtype=np.uint8)
    cdef idx_t[::1] witc = np.full(max(ncomp, 1), -1, dtype=np.intp)
    cdef idx_t[::1] mstart = np.zeros(ncomp + 1, dtype=np.intp)
    cdef idx_t[::1] members = np.empty(max(n, 1), dtype=np.intp)
    cdef idx_t[::1] fill
    cdef idx_t[::1] queue = np.empty(max(n, 1), dtype=np.intp)
    cdef unsigned char[::1] seen = np.zeros(max(n, 1), dtype=np.uint8)
    cdef Py_ssize_t head = 0, tail = 0
    cdef idx_t s, c, d, q, v, w, i, k, best

    for s in range(n):
        c = comp[s]
        if first[c] == -1:
            first[c] = s
            cq[c] = qcode[s]
        elif qcode[s] != cq[c] and not mixed[c]:
            mixed[c] = 1
            alt[c] = s

    # step 2: reverse BFS from mixed components
    for s in range(n):
        if mixed[comp[s]]:
            seen[s] = 1
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        dead[comp[v]] = 1
        for i in range(rindptr[v], rindptr[v + 1]):
            w = rindices[i]
            if not seen[w]:
                seen[w] = 1
                queue[tail] = w
                tail += 1

    # counting sort of states by component
    for s in range(n):
        mstart[comp[s] + 1] += 1
    for c in range(ncomp):
        mstart[c + 1] += mstart[c]
    fill = np.array(mstart, dtype=np.intp)
    for s in range(n):
        c = comp[s]
        members[fill[c]] = s
        fill[c] += 1

    # step 3: reverse topological sweep
    for c in range(ncomp):
        if mixed[c]:
            continue
        q = cq[c]
        best = -1
        for k in range(mstart[c], mstart[c + 1]):
            v = members[k]
            for i in range(indptr[v], indptr[v + 1]):
                d = comp[indices[i]]
                if d == c:
                    continue
                if mixed[d] or cq[d] != q or not ftc[d]:
                    if best == -1 or d < best:
                        best = d
        if best == -1:
            ftc[c] = not dead[c]
            continue
        if mixed[best]:
            witc[c] = first[best] if cq[best] != q else alt[best]
        elif cq[best] != q:
            witc[c] = first[best]
        else:
            witc[c] = witc[best]

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] is_ft = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[idx_t, ndim=1] witness = np.full(n, -1, dtype=np.intp)
    for s in range(n):
        c = comp[s]
        if mixed[c]:
            witness[s] = first[c] if qcode[s] != cq[c] else alt[c]
        elif ftc[c]:
            is_ft[s] = 1
        else:
            witness[s] = witc[c]
    return is_ft, witness
