# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as _kernels_py."""

from libc.stdlib cimport malloc, free

BACKEND = "cython"


cdef inline bint _holds(int u, int v, int nr, int[:] l_off, int[:] l_lab, int[:] l_dst,
                        int[:] r_off, int[:] r_lab, int[:] r_dst, unsigned char[:] rel) nogil:
    cdef int e, f, p, row
    cdef bint found
    for e in range(l_off[u], l_off[u + 1]):
        p = l_lab[e]
        row = l_dst[e] * nr
        found = False
        for f in range(r_off[v], r_off[v + 1]):
            if r_lab[f] == p and rel[row + r_dst[f]]:
                found = True
                break
        if not found:
            return False
    return True


def refine_simulation(int nl, int nr, int[:] l_off, int[:] l_lab, int[:] l_dst,
                      int[:] li_off, int[:] li_lab, int[:] li_src,
                      int[:] r_off, int[:] r_lab, int[:] r_dst,
                      int[:] ri_off, int[:] ri_lab, int[:] ri_src, rel_obj):
    cdef unsigned char[:] rel = rel_obj
    cdef Py_ssize_t total = <Py_ssize_t>nl * nr
    cdef int *stack
    cdef unsigned char *queued
    cdef Py_ssize_t top = 0, k, w, base
    cdef int u, v, e, f, p
    if total == 0:
        return rel_obj
    stack = <int *>malloc(total * sizeof(int))
    queued = <unsigned char *>malloc(total)
    if stack == NULL or queued == NULL:
        free(stack)
        free(queued)
        raise MemoryError()
    try:
        with nogil:
            for k in range(total):
                queued[k] = rel[k]
                if rel[k]:
                    stack[top] = <int>k
                    top += 1
            while top > 0:
                top -= 1
                k = stack[top]
                queued[k] = 0
                if not rel[k]:
                    continue
                u = <int>(k // nr)
                v = <int>(k % nr)
                if _holds(u, v, nr, l_off, l_lab, l_dst, r_off, r_lab, r_dst, rel):
                    continue
                rel[k] = 0
                for e in range(li_off[u], li_off[u + 1]):
                    p = li_lab[e]
                    base = <Py_ssize_t>li_src[e] * nr
                    for f in range(ri_off[v], ri_off[v + 1]):
                        if ri_lab[f] == p:
                            w = base + ri_src[f]
                            if rel[w] and not queued[w]:
                                queued[w] = 1
                                stack[top] = <int>w
                                top += 1
    finally:
        free(stack)
        free(queued)
    return rel_obj


def bisim_blocks(int n, int[:] off, int[:] lab, int[:] dst, init):
    cdef list block = list(init)
    cdef list new
    cdef dict ids
    cdef int u, e, count = len(set(block))
    while True:
        ids = {}
        new = [0] * n
        for u in range(n):
            sig = (block[u], frozenset([(lab[e], block[dst[e]]) for e in range(off[u], off[u + 1])]))
            new[u] = ids.setdefault(sig, len(ids))
        block = new
        if len(ids) == count:
            return block
        count = len(ids)
