"""Kernel selection: the compiled extension when built, else pure Python."""

from array import array

try:
    from . import _kernels as _impl
except ImportError:  # extension not built
    from . import _kernels_py as _impl

from . import _kernels_py

BACKEND = _impl.BACKEND


def backends() -> dict:
    out = {"python": _kernels_py}
    if _impl is not _kernels_py:
        out[_impl.BACKEND] = _impl
    return out


def csr(n: int, edges, reverse: bool = False):
    """(offsets, labels, endpoints) as int arrays, grouped by source (or target)."""
    buckets = [[] for _ in range(n)]
    for s, p, o in edges:
        if reverse:
            buckets[o].append((p, s))
        else:
            buckets[s].append((p, o))
    off = array("i", [0])
    lab = array("i")
    end = array("i")
    for b in buckets:
        for p, x in b:
            lab.append(p)
            end.append(x)
        off.append(len(lab))
    return off, lab, end


def refine_simulation(nl, nr, left_edges, right_edges, rel: bytearray, impl=None):
    impl = impl or _impl
    return impl.refine_simulation(nl, nr, *csr(nl, left_edges), *csr(nl, left_edges, True),
                                  *csr(nr, right_edges), *csr(nr, right_edges, True), rel)


def bisim_blocks(n, edges, init, impl=None):
    impl = impl or _impl
    off, lab, dst = csr(n, edges)
    return impl.bisim_blocks(n, off, lab, dst, list(init))
