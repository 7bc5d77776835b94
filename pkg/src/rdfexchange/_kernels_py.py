"""Pure-Python kernels over int-encoded graphs (fallback for _kernels).

Graphs arrive in CSR form: ``off[u]:off[u+1]`` indexes the out-edges of
``u`` in ``lab``/``dst``; the reverse CSR lists predecessors the same way.
"""

BACKEND = "python"


def refine_simulation(nl, nr, l_off, l_lab, l_dst, li_off, li_lab, li_src,
                      r_off, r_lab, r_dst, ri_off, ri_lab, ri_src, rel):
    """Shrink ``rel`` (bytearray, row-major nl x nr) to the largest simulation inside it."""

    def holds(u, v):
        for e in range(l_off[u], l_off[u + 1]):
            p = l_lab[e]
            row = l_dst[e] * nr
            for f in range(r_off[v], r_off[v + 1]):
                if r_lab[f] == p and rel[row + r_dst[f]]:
                    break
            else:
                return False
        return True

    queued = bytearray(rel)
    stack = [k for k in range(nl * nr) if rel[k]]
    while stack:
        k = stack.pop()
        queued[k] = 0
        if not rel[k]:
            continue
        u, v = divmod(k, nr)
        if holds(u, v):
            continue
        rel[k] = 0
        for e in range(li_off[u], li_off[u + 1]):
            p = li_lab[e]
            base = li_src[e] * nr
            for f in range(ri_off[v], ri_off[v + 1]):
                if ri_lab[f] == p:
                    w = base + ri_src[f]
                    if rel[w] and not queued[w]:
                        queued[w] = 1
                        stack.append(w)
    return rel


def bisim_blocks(n, off, lab, dst, init):
    """Coarsest partition refining ``init`` that is stable under successor signatures."""
    block = list(init)
    count = len(set(block))
    while True:
        ids = {}
        new = [0] * n
        for u in range(n):
            sig = (block[u], frozenset((lab[e], block[dst[e]]) for e in range(off[u], off[u + 1])))
            new[u] = ids.setdefault(sig, len(ids))
        block = new
        if len(ids) == count:
            return block
        count = len(ids)
