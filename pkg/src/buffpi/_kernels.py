"""Integer-array kernels behind the bisimulation checker.

Two interchangeable backends: numba-compiled loops and a pure numpy path.
``BUFFPI_USE_NUMBA=0`` selects numpy; any other value (or unset) selects
numba when it is importable.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

USE_NUMBA = numba is not None and os.environ.get("BUFFPI_USE_NUMBA", "1") != "0"

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xC2B2AE3D27D4EB4F)


def set_backend(name: str) -> None:
    """Switch between ``"numba"`` and ``"numpy"`` at run time."""
    global USE_NUMBA
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not installed")
    USE_NUMBA = name == "numba"


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def _mix_np(a, b, m):
    with np.errstate(over="ignore"):
        x = (a.astype(np.uint64) * m) ^ (b.astype(np.uint64) + np.uint64(0x632BE59BD9B4E019))
        x ^= x >> np.uint64(29)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(32)
    return x


# ------------------------------------------------------------- numpy path


def _signatures_np(n, src, lab, bdst):
    h1 = np.zeros(n, dtype=np.uint64)
    h2 = np.zeros(n, dtype=np.uint64)
    if len(src):
        trip = np.unique(np.stack([src, lab, bdst], axis=1), axis=0)
        s, lb, bd = trip[:, 0], trip[:, 1], trip[:, 2]
        with np.errstate(over="ignore"):
            np.add.at(h1, s, _mix_np(lb, bd, _M1))
            np.add.at(h2, s, _mix_np(bd, lb, _M2))
    return h1, h2


def _closure_np(n, tsrc, tdst):
    reach = np.eye(n, dtype=bool)
    if len(tsrc):
        reach[tsrc, tdst] = True
    while True:
        f = reach.astype(np.float32)  # BLAS path; path counts stay far below 2**24
        nxt = (f @ f) > 0
        if (nxt == reach).all():
            break
        reach = nxt
    return reach


def _saturate_np(n, src, lab, dst, tau):
    reach = _closure_np(n, src[lab == tau], dst[lab == tau])
    out_s, out_l, out_d = [], [], []
    s, d = np.nonzero(reach)
    out_s.append(s)
    out_l.append(np.full(len(s), tau, dtype=np.int64))
    out_d.append(d)
    r32 = reach.astype(np.float32)
    for a in np.unique(lab):
        if a == tau:
            continue
        m = lab == a
        step = (r32[:, src[m]] @ r32[dst[m], :]) > 0
        s, d = np.nonzero(step)
        out_s.append(s)
        out_l.append(np.full(len(s), a, dtype=np.int64))
        out_d.append(d)
    return (np.concatenate(out_s).astype(np.int64), np.concatenate(out_l).astype(np.int64),
            np.concatenate(out_d).astype(np.int64))


# ------------------------------------------------------------- numba path

if numba is not None:

    @njit(cache=True)
    def _mix_nb(a, b, m):
        x = (np.uint64(a) * m) ^ (np.uint64(b) + np.uint64(0x632BE59BD9B4E019))
        x ^= x >> np.uint64(29)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(32)
        return x

    @njit(cache=True)
    def _signatures_nb(n, src, lab, bdst, order):
        h1 = np.zeros(n, dtype=np.uint64)
        h2 = np.zeros(n, dtype=np.uint64)
        ps, pl, pb = -1, -1, -1
        for k in range(order.shape[0]):
            i = order[k]
            s, lb, bd = src[i], lab[i], bdst[i]
            if s == ps and lb == pl and bd == pb:
                continue
            ps, pl, pb = s, lb, bd
            h1[s] += _mix_nb(lb, bd, np.uint64(0x9E3779B97F4A7C15))
            h2[s] += _mix_nb(bd, lb, np.uint64(0xC2B2AE3D27D4EB4F))
        return h1, h2

    @njit(cache=True)
    def _closure_nb(n, indptr, targets):
        """Reflexive-transitive closure as CSR (indptr, indices)."""
        stamp = np.full(n, -1, dtype=np.int64)
        stack = np.empty(n, dtype=np.int64)
        counts = np.zeros(n + 1, dtype=np.int64)
        buf = np.empty(n * 4 + 16, dtype=np.int64)
        used = 0
        for s in range(n):
            top = 0
            stack[top] = s
            top += 1
            stamp[s] = s
            start = used
            while top > 0:
                top -= 1
                v = stack[top]
                if used >= buf.shape[0]:
                    nb = np.empty(buf.shape[0] * 2, dtype=np.int64)
                    nb[:used] = buf[:used]
                    buf = nb
                buf[used] = v
                used += 1
                for k in range(indptr[v], indptr[v + 1]):
                    w = targets[k]
                    if stamp[w] != s:
                        stamp[w] = s
                        stack[top] = w
                        top += 1
            counts[s + 1] = used - start
        for s in range(n):
            counts[s + 1] += counts[s]
        return counts, buf[:used].copy()

    @njit(cache=True)
    def _saturate_nb(n, cl_ptr, cl_idx, out_ptr, out_lab, out_dst, tau, nlabels):
        res_s = np.empty(16, dtype=np.int64)
        res_l = np.empty(16, dtype=np.int64)
        res_d = np.empty(16, dtype=np.int64)
        used = 0
        stamp = np.full(n * nlabels, -1, dtype=np.int64)
        for s in range(n):
            for k in range(cl_ptr[s], cl_ptr[s + 1]):
                mid = cl_idx[k]
                # tau-hat: s => mid
                key = mid * nlabels + tau
                if stamp[key] != s:
                    stamp[key] = s
                    if used >= res_s.shape[0]:
                        m = res_s.shape[0] * 2
                        a = np.empty(m, dtype=np.int64); a[:used] = res_s[:used]; res_s = a
                        b = np.empty(m, dtype=np.int64); b[:used] = res_l[:used]; res_l = b
                        c = np.empty(m, dtype=np.int64); c[:used] = res_d[:used]; res_d = c
                    res_s[used] = s; res_l[used] = tau; res_d[used] = mid
                    used += 1
                for e in range(out_ptr[mid], out_ptr[mid + 1]):
                    a_lab = out_lab[e]
                    if a_lab == tau:
                        continue
                    t1 = out_dst[e]
                    for j in range(cl_ptr[t1], cl_ptr[t1 + 1]):
                        t = cl_idx[j]
                        key = t * nlabels + a_lab
                        if stamp[key] == s:
                            continue
                        stamp[key] = s
                        if used >= res_s.shape[0]:
                            m = res_s.shape[0] * 2
                            a = np.empty(m, dtype=np.int64); a[:used] = res_s[:used]; res_s = a
                            b = np.empty(m, dtype=np.int64); b[:used] = res_l[:used]; res_l = b
                            c = np.empty(m, dtype=np.int64); c[:used] = res_d[:used]; res_d = c
                        res_s[used] = s; res_l[used] = a_lab; res_d[used] = t
                        used += 1
        return res_s[:used].copy(), res_l[:used].copy(), res_d[:used].copy()


def _csr(n, src, dst, extra=None):
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    if extra is None:
        return indptr, dst[order]
    return indptr, dst[order], extra[order]


# ---------------------------------------------------------------- interface


def signatures(n: int, src, lab, dst, blocks):
    """Per-state hashes of the set ``{(label, block[target])}``."""
    src = np.asarray(src, dtype=np.int64)
    lab = np.asarray(lab, dtype=np.int64)
    bdst = np.asarray(blocks, dtype=np.int64)[np.asarray(dst, dtype=np.int64)] if len(src) else src
    if USE_NUMBA:
        order = np.lexsort((bdst, lab, src))
        return _signatures_nb(n, src, lab, bdst, order)
    return _signatures_np(n, src, lab, bdst)


def refine_round(n: int, src, lab, dst, blocks):
    """One refinement round; block ids are numbered by first state occurrence."""
    h1, h2 = signatures(n, src, lab, dst, blocks)
    keys = np.stack([np.asarray(blocks, dtype=np.uint64), h1, h2], axis=1)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv]


def saturate(n: int, src, lab, dst, tau: int):
    """Edges of the weak system ``s =a^=> t`` (tau-hat includes the empty move)."""
    src = np.asarray(src, dtype=np.int64)
    lab = np.asarray(lab, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if USE_NUMBA:
        tm = lab == tau
        t_ptr, t_idx = _csr(n, src[tm], dst[tm])
        cl_ptr, cl_idx = _closure_nb(n, t_ptr, t_idx)
        o_ptr, o_dst, o_lab = _csr(n, src, dst, lab)
        nlabels = int(max(lab.max(initial=0), tau)) + 1
        s, a, t = _saturate_nb(n, cl_ptr, cl_idx, o_ptr, o_lab, o_dst, tau, nlabels)
    else:
        s, a, t = _saturate_np(n, src, lab, dst, tau)
    trip = np.unique(np.stack([s, a, t], axis=1), axis=0) if len(s) else np.zeros((0, 3), dtype=np.int64)
    return trip[:, 0], trip[:, 1], trip[:, 2]
