"""Pure-Python graph kernels.

Reference implementation of the hot loops; ``_ckernels.pyx`` mirrors every
function here with identical signatures and results. Graphs are passed in
CSR form: the successors of ``v`` are ``indices[indptr[v]:indptr[v + 1]]``.
"""

import numpy as np


def scc(n, indptr, indices):
    """Iterative Tarjan. Returns ``(ncomp, comp)``.

    Components are numbered in completion order, which is a reverse
    topological order of the condensation: every edge ``u -> v`` between
    distinct components satisfies ``comp[v] < comp[u]``.
    """
    indptr = indptr.tolist() if hasattr(indptr, "tolist") else list(indptr)
    indices = indices.tolist() if hasattr(indices, "tolist") else list(indices)
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    comp = [-1] * n
    nxt = [0] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = True
        nxt[root] = indptr[root]
        call = [root]
        while call:
            v = call[-1]
            i = nxt[v]
            end = indptr[v + 1]
            descended = False
            while i < end:
                w = indices[i]
                i += 1
                if index[w] == -1:
                    nxt[v] = i
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    nxt[w] = indptr[w]
                    call.append(w)
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            nxt[v] = end
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            call.pop()
            if call:
                u = call[-1]
                if low[v] < low[u]:
                    low[u] = low[v]
    return ncomp, np.asarray(comp, dtype=np.intp)


def bfs(n, indptr, indices, sources, max_depth=-1):
    """Breadth-first depths from ``sources``; ``-1`` marks unreached states.

    A negative ``max_depth`` means unbounded.
    """
    indptr = indptr.tolist() if hasattr(indptr, "tolist") else list(indptr)
    indices = indices.tolist() if hasattr(indices, "tolist") else list(indices)
    depth = [-1] * n
    frontier = []
    for s in sources:
        s = int(s)
        if depth[s] == -1:
            depth[s] = 0
            frontier.append(s)
    d = 0
    while frontier and (max_depth < 0 or d < max_depth):
        d += 1
        nxt = []
        for v in frontier:
            for i in range(indptr[v], indptr[v + 1]):
                w = indices[i]
                if depth[w] == -1:
                    depth[w] = d
                    nxt.append(w)
        frontier = nxt
    return np.asarray(depth, dtype=np.intp)


def ft_sweep(n, indptr, indices, rindptr, rindices, comp, ncomp, qcode):
    """Free-termination flags and witnesses for every state.

    Step 1 (SCCs) is done by the caller and passed in as ``comp``. Step 2
    marks every state that can reach an SCC with mixed query values, by a
    reverse BFS over the state graph. Step 3 sweeps components in reverse
    topological order: a surviving component is FT iff all its successor
    components are FT with the same value.

    Returns ``(is_ft, witness)``; ``witness[s]`` is a reachable state whose
    value differs from ``qcode[s]``, or ``-1`` when ``s`` is FT.
    """
    indptr = indptr.tolist()
    indices = indices.tolist()
    comp = comp.tolist()
    qcode = qcode.tolist()

    # members of each component, ascending by state index
    first = [-1] * ncomp
    cq = [0] * ncomp
    mixed = [False] * ncomp
    alt = [-1] * ncomp
    for s in range(n):
        c = comp[s]
        if first[c] == -1:
            first[c] = s
            cq[c] = qcode[s]
        elif qcode[s] != cq[c] and not mixed[c]:
            mixed[c] = True
            alt[c] = s

    # step 2: states reaching a mixed component
    seeds = [s for s in range(n) if mixed[comp[s]]]
    dead_state = bfs(n, rindptr, rindices, seeds).tolist()
    dead = [False] * ncomp
    for s in range(n):
        if dead_state[s] != -1:
            dead[comp[s]] = True

    members = [[] for _ in range(ncomp)]
    for s in range(n):
        members[comp[s]].append(s)

    # step 3: reverse topological sweep
    ftc = [False] * ncomp
    witc = [-1] * ncomp
    for c in range(ncomp):
        if mixed[c]:
            continue
        q = cq[c]
        best = -1
        for v in members[c]:
            for i in range(indptr[v], indptr[v + 1]):
                d = comp[indices[i]]
                if d == c:
                    continue
                if mixed[d] or cq[d] != q or not ftc[d]:
                    if best == -1 or d < best:
                        best = d
        if best == -1:
            # no offending successor; dead uniform components always have one
            ftc[c] = not dead[c]
            continue
        if mixed[best]:
            witc[c] = first[best] if cq[best] != q else alt[best]
        elif cq[best] != q:
            witc[c] = first[best]
        else:
            witc[c] = witc[best]

    is_ft = np.zeros(n, dtype=np.uint8)
    witness = np.full(n, -1, dtype=np.intp)
    for s in range(n):
        c = comp[s]
        if mixed[c]:
            witness[s] = first[c] if qcode[s] != cq[c] else alt[c]
        elif ftc[c]:
            is_ft[s] = 1
        else:
            witness[s] = witc[c]
    return is_ft, witness
