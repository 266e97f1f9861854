"""Compiled inner loops shared by every decoder.

Memory layout of one decoding tree (N = 2**n):

* alpha: float32[2N - 1]; stage ``lam`` occupies ``[2**lam - 1, 2**(lam+1) - 1)``.
  Stage n holds the channel LLRs.
* beta: uint8[2(2N - 1)]; stage ``lam`` occupies ``2**(lam+1)`` slots starting at
  ``2**(lam+1) - 2``; node ``(lam, phi)`` is stored in half ``phi & 1``.

Lazy-copy pools store one such tree per row; stage blocks are shared between paths
through per-stage handles and reference counts.
"""

import numpy as np
from numba import njit

OP_ALPHA = 0
OP_BETA = 1
OP_R0 = 2
OP_R1 = 3
OP_REP = 4
OP_SPC = 5
OP_LEAF = 6

_jit = njit(cache=True, nogil=True)
_inl = njit(cache=True, nogil=True, inline="always")


# ----------------------------------------------------------------------------
# scalar rules
# ----------------------------------------------------------------------------

@_jit
def f_min(a, b):
    m = min(abs(a), abs(b))
    if (a < 0) != (b < 0):
        return -m
    return m


@_jit
def g_sum(a0, a1, bit):
    if bit == 0:
        return a0 + a1
    return a0 - a1


@_jit
def hd(a):
    return 0 if a >= 0 else 1


@_jit
def log2i(N):
    n = 0
    while (1 << n) < N:
        n += 1
    return n


# ----------------------------------------------------------------------------
# encoding / CRC
# ----------------------------------------------------------------------------

@_jit
def polar_transform(x):
    N = x.shape[0]
    h = 1
    while h < N:
        for start in range(0, N, 2 * h):
            for i in range(start, start + h):
                x[i] ^= x[i + h]
        h *= 2


@_jit
def crc_register(bits, nbits, poly, crc_len):
    mask = (1 << crc_len) - 1
    top = crc_len - 1
    reg = 0
    for k in range(nbits):
        fb = ((reg >> top) & 1) ^ bits[k]
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return reg


@_jit
def crc_bits(bits, poly, crc_len, out):
    reg = crc_register(bits, bits.shape[0], poly, crc_len)
    for k in range(crc_len):
        out[k] = (reg >> (crc_len - 1 - k)) & 1


@_jit
def crc_ok(block, poly, crc_len):
    if crc_len == 0:
        return True
    m = block.shape[0] - crc_len
    reg = crc_register(block, m, poly, crc_len)
    for k in range(crc_len):
        if block[m + k] != ((reg >> (crc_len - 1 - k)) & 1):
            return False
    return True


@_jit
def block_from_u(u, info_set, systematic, scratch, block):
    if systematic:
        scratch[:] = u
        polar_transform(scratch)
        for k in range(info_set.shape[0]):
            block[k] = scratch[info_set[k]]
    else:
        for k in range(info_set.shape[0]):
            block[k] = u[info_set[k]]


@_jit
def block_from_codeword(cw, info_set, systematic, scratch, block):
    if systematic:
        for k in range(info_set.shape[0]):
            block[k] = cw[info_set[k]]
    else:
        scratch[:] = cw
        polar_transform(scratch)
        for k in range(info_set.shape[0]):
            block[k] = scratch[info_set[k]]


# ----------------------------------------------------------------------------
# single memory tree
# ----------------------------------------------------------------------------

@_jit
def alpha_node(alpha, beta, lam, phi):
    # slice views let the compiler vectorize the loops
    h = 1 << lam
    dst = alpha[h - 1:2 * h - 1]
    a0 = alpha[2 * h - 1:3 * h - 1]
    a1 = alpha[3 * h - 1:4 * h - 1]
    if phi & 1:
        bl = beta[2 * h - 2:3 * h - 2]
        for i in range(h):
            dst[i] = g_sum(a1[i], a0[i], bl[i])
    else:
        for i in range(h):
            dst[i] = f_min(a0[i], a1[i])


@_jit
def calc_alpha(alpha, beta, n, lam, phi):
    top = lam
    q = phi
    while top < n and (q & 1) == 0:
        top += 1
        q >>= 1
    if top == n:
        top = n - 1
    for s in range(top, lam - 1, -1):
        alpha_node(alpha, beta, s, phi >> (s - lam))


@_jit
def calc_alpha_from_root(alpha, beta, n, lam, phi):
    for s in range(n - 1, lam - 1, -1):
        alpha_node(alpha, beta, s, phi >> (s - lam))


@_jit
def beta_combine(beta, lam, phi):
    h = 1 << lam
    bl = beta[2 * h - 2:3 * h - 2]
    br = beta[3 * h - 2:4 * h - 2]
    v = 4 * h - 2 + ((phi >> 1) & 1) * 2 * h
    out = beta[v:v + 2 * h]
    for i in range(h):
        out[i] = bl[i] ^ br[i]
        out[h + i] = br[i]


@_jit
def update_beta(beta, n, lam, phi):
    while lam < n and (phi & 1):
        beta_combine(beta, lam, phi)
        lam += 1
        phi >>= 1


@_jit
def repopulate_beta(beta, n, u, length):
    for j in range(length):
        beta[j & 1] = u[j]
        update_beta(beta, n, 0, j)


@_jit
def sc_decode_tree(llr, frozen, alpha, beta, u):
    N = llr.shape[0]
    n = log2i(N)
    for i in range(N):
        alpha[N - 1 + i] = llr[i]
    for i in range(N):
        calc_alpha(alpha, beta, n, 0, i)
        b = 0 if frozen[i] else hd(alpha[0])
        u[i] = b
        beta[i & 1] = b
        update_beta(beta, n, 0, i)


# ----------------------------------------------------------------------------
# fast-node rules
# ----------------------------------------------------------------------------

@_jit
def rep_sum(a, scratch):
    """Sum in the same pairwise order SC uses to reach the last leaf."""
    h = a.shape[0]
    for i in range(h):
        scratch[i] = a[i]
    while h > 1:
        h >>= 1
        for i in range(h):
            scratch[i] = scratch[i + h] + scratch[i]
    return scratch[0]


@_jit
def node_decide(op, a, frozen_leaf, out, scratch):
    h = a.shape[0]
    if op == OP_R0 or (op == OP_LEAF and frozen_leaf):
        for i in range(h):
            out[i] = 0
    elif op == OP_R1 or op == OP_LEAF:
        for i in range(h):
            out[i] = hd(a[i])
    elif op == OP_REP:
        b = hd(rep_sum(a, scratch))
        for i in range(h):
            out[i] = b
    else:
        parity = 0
        j = 0
        best = abs(a[0])
        for i in range(h):
            out[i] = hd(a[i])
            parity ^= out[i]
            if abs(a[i]) < best:
                best = abs(a[i])
                j = i
        out[j] ^= parity


@_jit
def smallest_abs(a, k, idx):
    """Indices of the k smallest |a|, ordered by (|a|, index)."""
    cnt = 0
    for i in range(a.shape[0]):
        v = abs(a[i])
        if cnt < k:
            pos = cnt
            cnt += 1
        elif v < abs(a[idx[k - 1]]):
            pos = k - 1
        else:
            continue
        while pos > 0 and abs(a[idx[pos - 1]]) > v:
            idx[pos] = idx[pos - 1]
            pos -= 1
        idx[pos] = i
    return cnt


@_jit
def _parity4(mask):
    return (mask ^ (mask >> 1) ^ (mask >> 2) ^ (mask >> 3)) & 1


@_jit
def node_candidates(op, a, frozen_leaf, dpm, idx):
    """Penalties of the candidate words of one node; returns the candidate count.

    Candidate ordinals follow the enumeration order used by ``node_candidate_bits``.
    """
    h = a.shape[0]
    if op == OP_LEAF:
        neg = abs(a[0]) if a[0] < 0 else 0.0
        pos = abs(a[0]) if a[0] >= 0 else 0.0
        dpm[0] = neg
        if frozen_leaf:
            return 1
        dpm[1] = pos
        return 2
    if op == OP_R0 or op == OP_REP:
        neg = 0.0
        pos = 0.0
        for i in range(h):
            if a[i] < 0:
                neg += abs(a[i])
            else:
                pos += abs(a[i])
        dpm[0] = neg
        if op == OP_R0:
            return 1
        dpm[1] = pos
        return 2
    if op == OP_R1:
        k = smallest_abs(a, min(2, h), idx)
        for mask in range(1 << k):
            d = 0.0
            for j in range(k):
                if (mask >> j) & 1:
                    d += abs(a[idx[j]])
            dpm[mask] = d
        return 1 << k
    # SPC
    parity = 0
    for i in range(h):
        parity ^= hd(a[i])
    k = smallest_abs(a, min(4, h), idx)
    c = 0
    for mask in range(1 << k):
        if _parity4(mask) != parity:
            continue
        d = 0.0
        for j in range(k):
            if (mask >> j) & 1:
                d += abs(a[idx[j]])
        dpm[c] = d
        c += 1
    return c


@_jit
def node_candidate_bits(op, a, frozen_leaf, ordinal, idx, out):
    h = a.shape[0]
    if op == OP_LEAF:
        out[0] = 0 if (frozen_leaf or ordinal == 0) else 1
        return
    if op == OP_R0 or op == OP_REP:
        b = 0 if ordinal == 0 else 1
        for i in range(h):
            out[i] = b
        return
    for i in range(h):
        out[i] = hd(a[i])
    if op == OP_R1:
        k = smallest_abs(a, min(2, h), idx)
        for j in range(k):
            if (ordinal >> j) & 1:
                out[idx[j]] ^= 1
        return
    parity = 0
    for i in range(h):
        parity ^= out[i]
    k = smallest_abs(a, min(4, h), idx)
    c = 0
    for mask in range(1 << k):
        if _parity4(mask) != parity:
            continue
        if c == ordinal:
            for j in range(k):
                if (mask >> j) & 1:
                    out[idx[j]] ^= 1
            return
        c += 1


@_jit
def rank_candidates(dpm, count, order):
    """Stable order of candidate ordinals by penalty."""
    for c in range(count):
        pos = c
        while pos > 0 and dpm[order[pos - 1]] > dpm[c]:
            order[pos] = order[pos - 1]
            pos -= 1
        order[pos] = c


@_jit
def fssc_decode_tree(llr, frozen, ops, lams, phis, alpha, beta, scratch, cw):
    N = llr.shape[0]
    n = log2i(N)
    for i in range(N):
        alpha[N - 1 + i] = llr[i]
    for k in range(ops.shape[0]):
        op = ops[k]
        lam = lams[k]
        phi = phis[k]
        if op == OP_ALPHA:
            alpha_node(alpha, beta, lam, phi)
        elif op == OP_BETA:
            beta_combine(beta, lam, phi)
        else:
            h = 1 << lam
            off = 2 * h - 2 + (phi & 1) * h
            node_decide(op, alpha[h - 1:2 * h - 1], frozen[phi] if op == OP_LEAF else False,
                        beta[off:off + h], scratch)
    off = 2 * N - 2
    for i in range(N):
        cw[i] = beta[off + i]


# ----------------------------------------------------------------------------
# lazy-copy pool
#
# pool = (apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh)
#   apool float32[cap * (2N-1)] and bpool uint8[cap * (4N-2)]: one tree per row, flattened
#   aref/bref int32[n+1, cap] reference counts, afree/bfree int32[n+1, cap] free stacks,
#   atop/btop int64[n+1] free stack heights, ah/bh int32[paths, n+1] stage handles (rows).
# ----------------------------------------------------------------------------

@_inl
def row_width(n):
    return (2 << n) - 1


@_jit
def pool_reset(pool):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    cap = aref.shape[1]
    for s in range(aref.shape[0]):
        for b in range(cap):
            aref[s, b] = 0
            bref[s, b] = 0
            afree[s, b] = cap - 1 - b
            bfree[s, b] = cap - 1 - b
        atop[s] = cap
        btop[s] = cap


@_inl
def _alloc(ref, free, top, s):
    top[s] -= 1
    b = free[s, top[s]]
    ref[s, b] = 1
    return b


@_inl
def _release(ref, free, top, s, b):
    ref[s, b] -= 1
    if ref[s, b] == 0:
        free[s, top[s]] = b
        top[s] += 1


@_jit
def path_init(pool, p, llr):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    n = ah.shape[1] - 1
    N = llr.shape[0]
    for s in range(n + 1):
        ah[p, s] = _alloc(aref, afree, atop, s)
        bh[p, s] = _alloc(bref, bfree, btop, s)
    base = ah[p, n] * row_width(n) + N - 1
    for i in range(N):
        apool[base + i] = llr[i]


@_jit
def path_share(pool, src, dst):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    for s in range(ah.shape[1]):
        ah[dst, s] = ah[src, s]
        bh[dst, s] = bh[src, s]
        aref[s, ah[src, s]] += 1
        bref[s, bh[src, s]] += 1


@_jit
def path_release(pool, p):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    for s in range(ah.shape[1]):
        _release(aref, afree, atop, s, ah[p, s])
        _release(bref, bfree, btop, s, bh[p, s])


@_inl
def alpha_writable(aref, afree, atop, ah, p, s):
    """Row of a private alpha block for stage s of path p."""
    b = ah[p, s]
    if aref[s, b] > 1:
        aref[s, b] -= 1
        # a stage write overwrites every LLR of the block: no copy needed
        b = _alloc(aref, afree, atop, s)
        ah[p, s] = b
    return b


@_inl
def beta_writable(bpool, bref, bfree, btop, bh, wb, p, s):
    """Row of a private beta block for stage s of path p (copied when shared)."""
    b = bh[p, s]
    if bref[s, b] > 1:
        bref[s, b] -= 1
        nb = _alloc(bref, bfree, btop, s)
        off = (1 << (s + 1)) - 2
        m = 1 << (s + 1)
        bpool[nb * wb + off:nb * wb + off + m] = bpool[b * wb + off:b * wb + off + m]
        bh[p, s] = nb
        b = nb
    return b


@_inl
def p_alpha_node(pool, n, p, lam, phi):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    wa = row_width(n)
    h = 1 << lam
    o = alpha_writable(aref, afree, atop, ah, p, lam) * wa + h - 1
    q = ah[p, lam + 1] * wa + 2 * h - 1
    dst = apool[o:o + h]
    a0 = apool[q:q + h]
    a1 = apool[q + h:q + 2 * h]
    if phi & 1:
        u = bh[p, lam] * 2 * wa + 2 * h - 2
        bl = bpool[u:u + h]
        for i in range(h):
            dst[i] = g_sum(a1[i], a0[i], bl[i])
    else:
        for i in range(h):
            dst[i] = f_min(a0[i], a1[i])


@_inl
def p_calc_alpha(pool, n, p, lam, phi):
    top = lam
    q = phi
    while top < n and (q & 1) == 0:
        top += 1
        q >>= 1
    if top == n:
        top = n - 1
    for s in range(top, lam - 1, -1):
        p_alpha_node(pool, n, p, s, phi >> (s - lam))


@_inl
def p_beta_combine(pool, n, p, lam, phi):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    wb = 2 * row_width(n)
    h = 1 << lam
    v = beta_writable(bpool, bref, bfree, btop, bh, wb, p, lam + 1) * wb \
        + 4 * h - 2 + ((phi >> 1) & 1) * 2 * h
    lft = bh[p, lam] * wb + 2 * h - 2
    bl = bpool[lft:lft + h]
    br = bpool[lft + h:lft + 2 * h]
    out = bpool[v:v + 2 * h]
    for i in range(h):
        out[i] = bl[i] ^ br[i]
        out[h + i] = br[i]


@_inl
def p_update_beta(pool, n, p, lam, phi):
    while lam < n and (phi & 1):
        p_beta_combine(pool, n, p, lam, phi)
        lam += 1
        phi >>= 1


@_inl
def p_write_leaf(pool, n, p, i, bit):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    wb = 2 * row_width(n)
    bpool[beta_writable(bpool, bref, bfree, btop, bh, wb, p, 0) * wb + (i & 1)] = bit


@_jit
def p_write_node(pool, n, p, lam, phi, bits):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    wb = 2 * row_width(n)
    h = 1 << lam
    off = beta_writable(bpool, bref, bfree, btop, bh, wb, p, lam) * wb + 2 * h - 2 + (phi & 1) * h
    for i in range(h):
        bpool[off + i] = bits[i]


@_inl
def p_leaf_alpha(pool, n, p):
    return pool[0][pool[8][p, 0] * row_width(n)]


@_jit
def p_node_alpha(pool, n, p, lam):
    """View of the stage-lam LLRs of path p."""
    h = 1 << lam
    base = pool[8][p, lam] * row_width(n) + h - 1
    return pool[0][base:base + h]


@_jit
def p_codeword(pool, p, n, out):
    bpool = pool[4]
    bh = pool[9]
    N = 1 << n
    base = bh[p, n] * 2 * row_width(n) + 2 * N - 2
    for i in range(N):
        out[i] = bpool[base + i]


# ----------------------------------------------------------------------------
# list decoding
# ----------------------------------------------------------------------------

@_jit
def prune_keep(cpm, count, L, keep):
    """Indices of the L smallest penalties, ties to the lower candidate index,
    returned in ascending candidate-index order."""
    if count <= L:
        for c in range(count):
            keep[c] = c
        return count
    order = np.argsort(cpm[:count], kind="mergesort")
    sel = np.sort(order[:L])
    for c in range(L):
        keep[c] = sel[c]
    return L


@_jit
def _rebuild(pool, npaths, cpar, keep, nkeep, counts, nah, nbh):
    apool, aref, afree, atop, bpool, bref, bfree, btop, ah, bh = pool
    nst = ah.shape[1]
    for p in range(npaths):
        counts[p] = 0
    for j in range(nkeep):
        counts[cpar[keep[j]]] += 1
    for p in range(npaths):
        c = counts[p]
        if c == 0:
            path_release(pool, p)
        elif c > 1:
            for s in range(nst):
                aref[s, ah[p, s]] += c - 1
                bref[s, bh[p, s]] += c - 1
    for j in range(nkeep):
        par = cpar[keep[j]]
        for s in range(nst):
            nah[j, s] = ah[par, s]
            nbh[j, s] = bh[par, s]
    for j in range(nkeep):
        for s in range(nst):
            ah[j, s] = nah[j, s]
            bh[j, s] = nbh[j, s]


@_jit
def scl_kernel(llr, frozen, L, pool, out_cw, out_pm):
    N = llr.shape[0]
    n = log2i(N)
    nst = n + 1
    path_init(pool, 0, llr)
    npaths = 1
    pm = np.zeros(L)
    cpm = np.empty(2 * L)
    cpar = np.empty(2 * L, np.int64)
    cbit = np.empty(2 * L, np.int64)
    keep = np.empty(2 * L, np.int64)
    counts = np.empty(L, np.int64)
    nah = np.empty((L, nst), np.int32)
    nbh = np.empty((L, nst), np.int32)
    leaf = np.empty(L, np.float32)
    for i in range(N):
        for p in range(npaths):
            p_calc_alpha(pool, n, p, 0, i)
            leaf[p] = p_leaf_alpha(pool, n, p)
        if frozen[i]:
            for p in range(npaths):
                if leaf[p] < 0:
                    pm[p] += abs(leaf[p])
                p_write_leaf(pool, n, p, i, 0)
                p_update_beta(pool, n, p, 0, i)
            continue
        nc = 0
        for p in range(npaths):
            a = leaf[p]
            h = hd(a)
            for bit in range(2):
                cpm[nc] = pm[p] + (abs(a) if bit != h else 0.0)
                cpar[nc] = p
                cbit[nc] = bit
                nc += 1
        nkeep = prune_keep(cpm, nc, L, keep)
        _rebuild(pool, npaths, cpar, keep, nkeep, counts, nah, nbh)
        npaths = nkeep
        for j in range(npaths):
            c = keep[j]
            pm[j] = cpm[c]
            p_write_leaf(pool, n, j, i, cbit[c])
            p_update_beta(pool, n, j, 0, i)
    for p in range(npaths):
        p_codeword(pool, p, n, out_cw[p])
        out_pm[p] = pm[p]
        path_release(pool, p)
    return npaths


@_jit
def fsscl_kernel(llr, frozen, ops, lams, phis, L, pool, out_cw, out_pm):
    N = llr.shape[0]
    n = log2i(N)
    nst = n + 1
    path_init(pool, 0, llr)
    npaths = 1
    pm = np.zeros(L)
    cpm = np.empty(8 * L)
    cpar = np.empty(8 * L, np.int64)
    cord = np.empty(8 * L, np.int64)
    keep = np.empty(8 * L, np.int64)
    counts = np.empty(L, np.int64)
    nah = np.empty((L, nst), np.int32)
    nbh = np.empty((L, nst), np.int32)
    dpm = np.empty(16)
    idx = np.empty(4, np.int64)
    bits = np.empty(N, np.uint8)
    for k in range(ops.shape[0]):
        op = ops[k]
        lam = lams[k]
        phi = phis[k]
        if op == OP_ALPHA:
            for p in range(npaths):
                p_alpha_node(pool, n, p, lam, phi)
            continue
        if op == OP_BETA:
            for p in range(npaths):
                p_beta_combine(pool, n, p, lam, phi)
            continue
        h = 1 << lam
        fz = frozen[phi] if op == OP_LEAF else False
        nc = 0
        for p in range(npaths):
            c = node_candidates(op, p_node_alpha(pool, n, p, lam), fz, dpm, idx)
            for o in range(c):
                cpm[nc] = pm[p] + dpm[o]
                cpar[nc] = p
                cord[nc] = o
                nc += 1
        nkeep = prune_keep(cpm, nc, L, keep)
        _rebuild(pool, npaths, cpar, keep, nkeep, counts, nah, nbh)
        npaths = nkeep
        for j in range(npaths):
            c = keep[j]
            pm[j] = cpm[c]
            node_candidate_bits(op, p_node_alpha(pool, n, j, lam), fz, cord[c], idx, bits)
            p_write_node(pool, n, j, lam, phi, bits)
    for p in range(npaths):
        p_codeword(pool, p, n, out_cw[p])
        out_pm[p] = pm[p]
        path_release(pool, p)
    return npaths


@_jit
def crc_select(cws, pms, npaths, info_set, systematic, poly, crc_len, order, blocks):
    """Blocks of the final list in PM order; index (into order) of the first CRC pass or -1."""
    N = cws.shape[1]
    scratch = np.empty(N, np.uint8)
    srt = np.argsort(pms[:npaths], kind="mergesort")
    sel = -1
    for r in range(npaths):
        p = srt[r]
        order[r] = p
        block_from_codeword(cws[p], info_set, systematic, scratch, blocks[r])
        if sel < 0 and crc_ok(blocks[r], poly, crc_len):
            sel = r
    return sel


# ----------------------------------------------------------------------------
# stack bookkeeping
#
# stack = (spm, spl, sstate, sfree, meta)
#   slot state: 0 free, 1 stored on the stack, 2 the path being extended
#   meta = [free_top, occupancy, high_water, peak_occupancy, best_slot, best_valid]
#   The minimum-PM slot is cached; it is recomputed by a linear search over the PM
#   array whenever the cached entry leaves the stack.
# ----------------------------------------------------------------------------

@_jit
def stack_reset(stack):
    spm, spl, sstate, sfree, meta = stack
    S = sstate.shape[0]
    for s in range(S):
        sstate[s] = 0
        sfree[s] = S - 1 - s
    meta[0] = S
    meta[1] = 0
    meta[2] = 0
    meta[3] = 0
    meta[4] = -1
    meta[5] = 1


@_inl
def stack_take_slot(stack):
    spm, spl, sstate, sfree, meta = stack
    meta[0] -= 1
    s = sfree[meta[0]]
    if s + 1 > meta[2]:
        meta[2] = s + 1
    return s


@_inl
def _unstore(stack, s):
    spm, spl, sstate, sfree, meta = stack
    if sstate[s] == 1:
        meta[1] -= 1
        if meta[4] == s:
            meta[5] = 0
    sstate[s] = 0


@_inl
def stack_free_slot(stack, s):
    spm, spl, sstate, sfree, meta = stack
    _unstore(stack, s)
    sfree[meta[0]] = s
    meta[0] += 1


@_inl
def stack_mark_stored(stack, s):
    spm, spl, sstate, sfree, meta = stack
    sstate[s] = 1
    meta[1] += 1
    if meta[1] > meta[3]:
        meta[3] = meta[1]
    if meta[5]:
        b = meta[4]
        if b < 0 or spm[s] < spm[b] or (spm[s] == spm[b] and s < b):
            meta[4] = s


@_jit
def stack_best(stack):
    """Stored slot with the smallest PM (lowest slot on ties), or -1."""
    spm, spl, sstate, sfree, meta = stack
    if meta[5]:
        return meta[4]
    best = -1
    for s in range(meta[2]):
        if sstate[s] == 1 and (best < 0 or spm[s] < spm[best]):
            best = s
    meta[4] = best
    meta[5] = 1
    return best


@_inl
def stack_take_stored(stack, s):
    """Turn stored slot s into the path being extended."""
    spm, spl, sstate, sfree, meta = stack
    _unstore(stack, s)
    sstate[s] = 2


@_jit
def stack_worst(stack):
    spm, spl, sstate, sfree, meta = stack
    worst = -1
    for s in range(meta[2]):
        if sstate[s] == 1 and (worst < 0 or spm[s] > spm[worst]):
            worst = s
    return worst


@_jit
def stack_claim(stack, capacity, pm):
    """Slot for a new entry with metric pm.

    Returns (slot, evicted). slot is -1 when the stack is full and pm is not better
    than its worst entry; evicted is the slot whose entry was displaced (or -1), which
    the caller must release before reuse. The claimed slot is not yet marked stored.
    """
    spm, spl, sstate, sfree, meta = stack
    if meta[1] < capacity:
        return stack_take_slot(stack), -1
    w = stack_worst(stack)
    if pm < spm[w]:
        _unstore(stack, w)
        return w, w
    return -1, -1


# ----------------------------------------------------------------------------
# stack decoders
# stats = [iterations, path_switches, peak_occupancy, crc_failed, crc_failures]
# ----------------------------------------------------------------------------

@_jit
def _scs_store_current(stack, D, cur, pool, use_pool):
    """Put the extended path back on the stack; returns False when it was dropped."""
    spm, spl, sstate, sfree, meta = stack
    if meta[1] < D:
        stack_mark_stored(stack, cur)
        return True
    w = stack_worst(stack)
    if spm[cur] < spm[w]:
        if use_pool:
            path_release(pool, w)
        stack_free_slot(stack, w)
        stack_mark_stored(stack, cur)
        return True
    if use_pool:
        path_release(pool, cur)
    stack_free_slot(stack, cur)
    return False


@_jit
def _scs_prune(stack, omega, pool, use_pool):
    spm, spl, sstate, sfree, meta = stack
    for s in range(meta[2]):
        if sstate[s] == 1 and spl[s] <= omega:
            if use_pool:
                path_release(pool, s)
            stack_free_slot(stack, s)


@_jit
def _stack_store_plain(stack, D, cur):
    spm, spl, sstate, sfree, meta = stack
    if meta[1] < D:
        stack_mark_stored(stack, cur)
        return True
    w = stack_worst(stack)
    if spm[cur] < spm[w]:
        stack_free_slot(stack, w)
        stack_mark_stored(stack, cur)
        return True
    stack_free_slot(stack, cur)
    return False


@_jit
def _stack_prune_plain(stack, omega):
    spm, spl, sstate, sfree, meta = stack
    for s in range(meta[2]):
        if sstate[s] == 1 and spl[s] <= omega:
            stack_free_slot(stack, s)


@_jit
def scs_kernel(llr, frozen, L, D, reduced, pool, alpha, beta, stack, su, pend, counter,
               info_set, systematic, poly, crc_len, out_u, stats):
    """Successive-cancellation stack search.

    reduced=False keeps a lazy-copy memory tree per stack entry (pool);
    reduced=True keeps a single tree (alpha, beta) rebuilt on every path switch.
    """
    spm, spl, sstate, sfree, meta = stack
    N = llr.shape[0]
    n = log2i(N)
    K = info_set.shape[0]
    scratch = np.empty(N, np.uint8)
    block = np.empty(K, np.uint8)
    stack_reset(stack)
    for i in range(N + 1):
        counter[i] = 0
    for i in range(N):
        alpha[N - 1 + i] = llr[i]
    iterations = 0
    switches = 0
    fails = 0
    switched = False

    cur = stack_take_slot(stack)
    sstate[cur] = 2
    spm[cur] = 0.0
    spl[cur] = 0
    pend[cur] = False
    if not reduced:
        path_init(pool, cur, llr)

    while True:
        i = spl[cur]
        if not reduced and pend[cur]:
            p_write_leaf(pool, n, cur, i - 1, su[cur, i - 1])
            p_update_beta(pool, n, cur, 0, i - 1)
            pend[cur] = False
        if i == N:
            block_from_u(su[cur], info_set, systematic, scratch, block)
            if crc_ok(block, poly, crc_len):
                for j in range(N):
                    out_u[j] = su[cur, j]
                stats[3] = 0
                break
            fails += 1
            for j in range(N):
                out_u[j] = su[cur, j]
            if not reduced:
                path_release(pool, cur)
            stack_free_slot(stack, cur)
            # the CRC check is the final extension; L failures at length N end the search
            counter[N] += 1
            nxt = stack_best(stack) if counter[N] < L else -1
            if nxt < 0:
                stats[3] = 1
                break
            stack_take_stored(stack, nxt)
            cur = nxt
            switches += 1
            switched = True
            continue

        if reduced:
            if switched:
                repopulate_beta(beta, n, su[cur], i)
                calc_alpha_from_root(alpha, beta, n, 0, i)
            else:
                calc_alpha(alpha, beta, n, 0, i)
            a = alpha[0]
        else:
            p_calc_alpha(pool, n, cur, 0, i)
            a = p_leaf_alpha(pool, n, cur)
        switched = False
        iterations += 1

        if frozen[i]:
            bit = 0
            if a < 0:
                spm[cur] += abs(a)
        else:
            bit = hd(a)
            wpm = spm[cur] + abs(a)
            s, ev = stack_claim(stack, D, wpm)
            if s >= 0:
                if ev >= 0 and not reduced:
                    path_release(pool, ev)
                for j in range(i):
                    su[s, j] = su[cur, j]
                su[s, i] = 1 - bit
                spm[s] = wpm
                spl[s] = i + 1
                if not reduced:
                    path_share(pool, cur, s)
                    pend[s] = True
                stack_mark_stored(stack, s)
        su[cur, i] = bit
        spl[cur] = i + 1
        if reduced:
            beta[i & 1] = bit
            update_beta(beta, n, 0, i)
        else:
            p_write_leaf(pool, n, cur, i, bit)
            p_update_beta(pool, n, cur, 0, i)

        # count extensions by the length the path had before this step
        counter[i] += 1
        if counter[i] == L:
            _scs_prune(stack, i, pool, not reduced)

        if meta[1] > 0:
            b = stack_best(stack)
            if spm[b] < spm[cur]:
                _scs_store_current(stack, D, cur, pool, not reduced)
                b = stack_best(stack)
                stack_take_stored(stack, b)
                cur = b
                switches += 1
                switched = True

    if not reduced:
        for s in range(meta[2]):
            if sstate[s] != 0:
                path_release(pool, s)
    stats[0] = iterations
    stats[1] = switches
    stats[2] = meta[3]
    stats[4] = fails
    return spm[cur]


@_jit
def fsscs_rm_kernel(llr, frozen, ops, lams, phis, ends, L, D, alpha, stack, sbeta, sidx, counter,
                    info_set, systematic, poly, crc_len, out_cw, stats):
    """Fast simplified stack search with a single alpha tree and per-path flat bit arrays."""
    spm, spl, sstate, sfree, meta = stack
    N = llr.shape[0]
    n = log2i(N)
    K = info_set.shape[0]
    nops = ops.shape[0]
    scratch = np.empty(N, np.uint8)
    block = np.empty(K, np.uint8)
    dpm = np.empty(16)
    order = np.empty(16, np.int64)
    idx = np.empty(4, np.int64)
    bits = np.empty(N, np.uint8)
    stack_reset(stack)
    for i in range(N + 1):
        counter[i] = 0
    for i in range(N):
        alpha[N - 1 + i] = llr[i]
    iterations = 0
    switches = 0
    fails = 0
    switched = False

    cur = stack_take_slot(stack)
    sstate[cur] = 2
    spm[cur] = 0.0
    spl[cur] = 0
    sidx[cur] = 0
    for i in range(N):
        sbeta[cur, i] = 0

    while True:
        k = sidx[cur]
        if k == nops:
            block_from_codeword(sbeta[cur], info_set, systematic, scratch, block)
            for j in range(N):
                out_cw[j] = sbeta[cur, j]
            if crc_ok(block, poly, crc_len):
                stats[3] = 0
                break
            fails += 1
            stack_free_slot(stack, cur)
            counter[N] += 1
            nxt = stack_best(stack) if counter[N] < L else -1
            if nxt < 0:
                stats[3] = 1
                break
            stack_take_stored(stack, nxt)
            cur = nxt
            switches += 1
            switched = True
            continue

        op = ops[k]
        lam = lams[k]
        phi = phis[k]
        fb = sbeta[cur]
        if op == OP_BETA:
            h = 1 << lam
            bl = fb[(phi - 1) * h:phi * h]
            br = fb[phi * h:(phi + 1) * h]
            for i in range(h):
                bl[i] ^= br[i]
            sidx[cur] = k + 1
            continue
        if op == OP_ALPHA:
            if switched:
                for s in range(n - 1, lam, -1):
                    _flat_alpha_node(alpha, fb, s, phi >> (s - lam))
                switched = False
            _flat_alpha_node(alpha, fb, lam, phi)
            sidx[cur] = k + 1
            continue

        # constituent node
        h = 1 << lam
        a = alpha[h - 1:2 * h - 1]
        fz = frozen[phi] if op == OP_LEAF else False
        c = node_candidates(op, a, fz, dpm, idx)
        rank_candidates(dpm, c, order)
        base = spm[cur]
        end = ends[k]
        start = phi * h
        for r in range(1, c):
            o = order[r]
            wpm = base + dpm[o]
            s, ev = stack_claim(stack, D, wpm)
            if s < 0:
                continue
            node_candidate_bits(op, a, fz, o, idx, bits)
            row = sbeta[s]
            for i in range(N):
                row[i] = fb[i]
            for i in range(h):
                row[start + i] = bits[i]
            spm[s] = wpm
            spl[s] = end
            sidx[s] = k + 1
            stack_mark_stored(stack, s)
        o = order[0]
        node_candidate_bits(op, a, fz, o, idx, bits)
        for i in range(h):
            fb[start + i] = bits[i]
        spm[cur] = base + dpm[o]
        spl[cur] = end
        sidx[cur] = k + 1
        iterations += h

        counter[start] += 1
        if counter[start] == L:
            _stack_prune_plain(stack, start)

        if meta[1] > 0:
            b = stack_best(stack)
            if spm[b] < spm[cur]:
                _stack_store_plain(stack, D, cur)
                b = stack_best(stack)
                stack_take_stored(stack, b)
                cur = b
                switches += 1
                switched = True

    stats[0] = iterations
    stats[1] = switches
    stats[2] = meta[3]
    stats[4] = fails
    return spm[cur]


@_jit
def _flat_alpha_node(alpha, fb, lam, phi):
    h = 1 << lam
    dst = alpha[h - 1:2 * h - 1]
    a0 = alpha[2 * h - 1:3 * h - 1]
    a1 = alpha[3 * h - 1:4 * h - 1]
    if phi & 1:
        bl = fb[(phi - 1) * h:phi * h]
        for i in range(h):
            dst[i] = g_sum(a1[i], a0[i], bl[i])
    else:
        for i in range(h):
            dst[i] = f_min(a0[i], a1[i])


@_jit
def flat_beta_propagate(fb, n, lam, phi):
    while lam < n and (phi & 1):
        h = 1 << lam
        lft = (phi - 1) * h
        for i in range(h):
            fb[lft + i] ^= fb[lft + h + i]
        lam += 1
        phi >>= 1
