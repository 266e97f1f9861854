"""Slow, independent reference implementations used as test oracles.

Nothing here shares code with the compiled kernels: encoding multiplies by an explicit
generator matrix, the CRC is long division by the full polynomial, and every LLR is
recomputed from the channel by plain recursion over the decoding tree.  Arithmetic is
float32 in the same operand order as the fast decoders so results can be compared
bit-exactly.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "generator_matrix", "matrix_encode", "crc_long_division",
    "f_vec", "g_vec", "leaf_llr", "node_llrs", "sc_oracle", "path_metric",
    "node_candidates_ref", "NaiveSCL", "NaiveFSSCL", "NaiveSCS", "NaiveFSSCS", "brute_force_ml_pm", "golden_vectors",
]


@lru_cache(maxsize=None)
def generator_matrix(N: int) -> np.ndarray:
    """F^{(x)n} with entry [i, j] = 1 iff the bits of j are a subset of the bits of i."""
    i = np.arange(N)[:, None]
    j = np.arange(N)[None, :]
    G = ((i & j) == j).astype(np.uint8)
    G.setflags(write=False)
    return G


def matrix_encode(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    return ((u @ generator_matrix(len(u))) % 2).astype(np.uint8)


def crc_long_division(bits, poly: int, crc_len: int) -> np.ndarray:
    """Remainder of bits * x^crc_len modulo x^crc_len + poly, by schoolbook division."""
    full = [1] + [(poly >> (crc_len - 1 - k)) & 1 for k in range(crc_len)]
    work = [int(b) for b in bits] + [0] * crc_len
    for k in range(len(bits)):
        if work[k]:
            for d in range(crc_len + 1):
                work[k + d] ^= full[d]
    return np.array(work[len(bits):], dtype=np.uint8)


# ----------------------------------------------------------------------------
# LLR recursion
# ----------------------------------------------------------------------------

def f_vec(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    m = np.minimum(np.abs(a), np.abs(b))
    return np.where((a < 0) != (b < 0), -m, m).astype(np.float32)


def g_vec(right, left, bits) -> np.ndarray:
    """LLR of the right half given the left half's codeword bits."""
    right = np.asarray(right, dtype=np.float32)
    left = np.asarray(left, dtype=np.float32)
    return np.where(np.asarray(bits) == 0, right + left, right - left).astype(np.float32)


def _hd(x) -> int:
    return 0 if x >= 0 else 1


def node_llrs(llr, u_prefix, lam: int, phi: int) -> np.ndarray:
    """LLRs of node (lam, phi) given every bit decided before it."""
    a = np.asarray(llr, dtype=np.float32)
    u = [int(b) for b in u_prefix]
    start = 0
    size = len(a)
    target = phi << lam
    while size > (1 << lam):
        h = size // 2
        if target < start + h:
            a = f_vec(a[:h], a[h:])
        else:
            left = matrix_encode(u[start:start + h])
            a = g_vec(a[h:], a[:h], left)
            start += h
        size = h
    return a


def leaf_llr(llr, u_prefix, i: int) -> np.float32:
    return node_llrs(llr, u_prefix[:i], 0, i)[0]


def sc_oracle(llr, frozen_mask) -> np.ndarray:
    """Whole-tree recursive SC without any memory reuse."""

    def rec(a, fz):
        if len(a) == 1:
            b = 0 if fz[0] else _hd(a[0])
            return [b], np.array([b], dtype=np.uint8)
        h = len(a) // 2
        ul, xl = rec(f_vec(a[:h], a[h:]), fz[:h])
        ur, xr = rec(g_vec(a[h:], a[:h], xl), fz[h:])
        return ul + ur, np.concatenate([xl ^ xr, xr])

    u, _ = rec(np.asarray(llr, dtype=np.float32), list(frozen_mask))
    return np.array(u, dtype=np.uint8)


def path_metric(llr, u) -> float:
    """Min-sum path metric of a complete bit sequence, replayed leaf by leaf."""
    pm = 0.0
    for i, b in enumerate(u):
        a = leaf_llr(llr, u, i)
        if int(b) != _hd(a):
            pm += abs(float(a))
    return pm


# ----------------------------------------------------------------------------
# fast-node candidates
# ----------------------------------------------------------------------------

def _k_smallest(a, k):
    order = sorted(range(len(a)), key=lambda i: (abs(float(a[i])), i))
    return order[:k]


def node_candidates_ref(kind: str, a, frozen_leaf: bool = False) -> list[tuple[np.ndarray, float]]:
    """Candidate words and metric increments of one node, in enumeration order."""
    a = np.asarray(a, dtype=np.float32)
    h = len(a)
    hdw = np.array([_hd(x) for x in a], dtype=np.uint8)
    if kind == "LEAF":
        out = [(np.zeros(1, np.uint8), abs(float(a[0])) if a[0] < 0 else 0.0)]
        if not frozen_leaf:
            out.append((np.ones(1, np.uint8), abs(float(a[0])) if a[0] >= 0 else 0.0))
        return out
    if kind in ("R0", "REP"):
        neg = sum(abs(float(x)) for x in a if x < 0)
        pos = sum(abs(float(x)) for x in a if x >= 0)
        out = [(np.zeros(h, np.uint8), neg)]
        if kind == "REP":
            out.append((np.ones(h, np.uint8), pos))
        return out
    k = min(2 if kind == "R1" else 4, h)
    m = _k_smallest(a, k)
    parity = int(hdw.sum() % 2)
    out = []
    for mask in range(1 << k):
        chosen = [m[j] for j in range(k) if (mask >> j) & 1]
        if kind == "SPC" and len(chosen) % 2 != parity:
            continue
        w = hdw.copy()
        w[chosen] ^= 1
        out.append((w, sum(abs(float(a[c])) for c in chosen)))
    return out


# ----------------------------------------------------------------------------
# naive path-search decoders (every path owns a full copy of its state)
# ----------------------------------------------------------------------------

def _crc_pass(block, crc_len, poly) -> bool:
    if crc_len == 0:
        return True
    m = len(block) - crc_len
    return np.array_equal(crc_long_division(block[:m], poly, crc_len), block[m:])


def _block(cfg, u, systematic):
    word = matrix_encode(u) if systematic else np.asarray(u, dtype=np.uint8)
    return word[np.asarray(cfg.info_set)]


def _prune(cands, L):
    ranked = sorted(cands, key=lambda c: (c[0], c[1], c[2]))[:L]
    return sorted(ranked, key=lambda c: (c[1], c[2]))


class NaiveSCL:
    """Bit-level list decoder; returns final (pm, u) pairs sorted by metric."""

    def __init__(self, cfg, L, systematic=False):
        self.cfg, self.L, self.systematic = cfg, L, systematic

    def run(self, llr):
        cfg = self.cfg
        frozen = np.asarray(cfg.frozen_mask)
        paths = [(0.0, [])]
        for i in range(cfg.N):
            leaf = [leaf_llr(llr, u, i) for _, u in paths]
            if frozen[i]:
                paths = [(pm + (abs(float(a)) if a < 0 else 0.0), u + [0]) for (pm, u), a in zip(paths, leaf)]
                continue
            cands = []
            for p, ((pm, u), a) in enumerate(zip(paths, leaf)):
                for bit in (0, 1):
                    d = abs(float(a)) if bit != _hd(a) else 0.0
                    cands.append((pm + d, p, bit, u + [bit]))
            paths = [(c[0], c[3]) for c in _prune(cands, self.L)]
        return sorted(paths, key=lambda x: x[0])

    def select(self, llr):
        final = self.run(llr)
        for pm, u in final:
            if _crc_pass(_block(self.cfg, u, self.systematic), self.cfg.crc_len, self.cfg.crc_poly):
                return pm, np.array(u, np.uint8), False, final
        pm, u = final[0]
        return pm, np.array(u, np.uint8), True, final


class NaiveFSSCL:
    """Node-level list decoder over a schedule; paths are bit lists u."""

    def __init__(self, cfg, L, schedule, systematic=True):
        self.cfg, self.L, self.schedule, self.systematic = cfg, L, schedule, systematic

    def run(self, llr):
        frozen = np.asarray(self.cfg.frozen_mask)
        paths = [(0.0, [])]
        for op, lam, phi in self.schedule.entries:
            if op.name in ("ALPHA", "BETA"):
                continue
            cands = []
            for p, (pm, u) in enumerate(paths):
                a = node_llrs(llr, u, lam, phi)
                for o, (w, d) in enumerate(node_candidates_ref(op.name, a, bool(frozen[phi]) if lam == 0 else False)):
                    cands.append((pm + d, p, o, u + [int(b) for b in matrix_encode(w)]))
            paths = [(c[0], c[3]) for c in _prune(cands, self.L)]
        return sorted(paths, key=lambda x: x[0])


class NaiveSCS:
    """Bit-level stack decoder keeping each stored path as (pm, u) in insertion order."""

    def __init__(self, cfg, L, D, systematic=False):
        self.cfg, self.L, self.D, self.systematic = cfg, L, D, systematic

    def run(self, llr):
        cfg = self.cfg
        N = cfg.N
        frozen = np.asarray(cfg.frozen_mask)
        stack: list[list] = []  # entries [pm, u]
        counter = [0] * (N + 1)
        cur = [0.0, []]
        iterations = switches = 0
        while True:
            i = len(cur[1])
            if i == N:
                u = np.array(cur[1], np.uint8)
                if _crc_pass(_block(cfg, u, self.systematic), cfg.crc_len, cfg.crc_poly):
                    return u, cur[0], iterations, switches, False
                counter[N] += 1
                if not stack or counter[N] == self.L:
                    return u, cur[0], iterations, switches, True
                cur = self._pop(stack)
                switches += 1
                continue
            a = leaf_llr(llr, cur[1], i)
            iterations += 1
            if frozen[i]:
                if a < 0:
                    cur[0] += abs(float(a))
                cur[1] = cur[1] + [0]
            else:
                h = _hd(a)
                self._push(stack, [cur[0] + abs(float(a)), cur[1] + [1 - h]])
                cur[1] = cur[1] + [h]
            counter[i] += 1
            if counter[i] == self.L:
                stack[:] = [e for e in stack if len(e[1]) > i]
            if stack and min(e[0] for e in stack) < cur[0]:
                self._push(stack, cur)
                cur = self._pop(stack)
                switches += 1

    @staticmethod
    def _pop(stack):
        best = min(range(len(stack)), key=lambda k: (stack[k][0], k))
        return stack.pop(best)

    def _push(self, stack, entry):
        if len(stack) < self.D:
            stack.append(entry)
            return
        worst = max(range(len(stack)), key=lambda k: (stack[k][0], -k))
        if entry[0] < stack[worst][0]:
            stack[worst] = entry


def brute_force_ml_pm(cfg, llr):
    """Information word (as u) minimising the path metric over all 2^K choices."""
    info = np.asarray(cfg.info_set)
    best = None
    for m in range(1 << cfg.K):
        u = np.zeros(cfg.N, np.uint8)
        u[info] = [(m >> (cfg.K - 1 - k)) & 1 for k in range(cfg.K)]
        pm = path_metric(llr, u)
        if best is None or pm < best[0]:
            best = (pm, u)
    return best


class NaiveFSSCS:
    """Node-level stack decoder over a schedule; stored paths are (pm, u, next entry)."""

    def __init__(self, cfg, L, D, schedule, systematic=True):
        self.cfg, self.L, self.D, self.schedule, self.systematic = cfg, L, D, schedule, systematic

    def run(self, llr):
        cfg = self.cfg
        frozen = np.asarray(cfg.frozen_mask)
        entries = self.schedule.entries
        stack: list[list] = []
        counter = [0] * (cfg.N + 1)
        cur = [0.0, [], 0]
        iterations = switches = 0
        while True:
            k = cur[2]
            while k < len(entries) and entries[k][0].name in ("ALPHA", "BETA"):
                k += 1
            cur[2] = k
            if k == len(entries):
                u = np.array(cur[1], np.uint8)
                if _crc_pass(_block(cfg, u, self.systematic), cfg.crc_len, cfg.crc_poly):
                    return u, cur[0], iterations, switches, False
                counter[cfg.N] += 1
                if not stack or counter[cfg.N] == self.L:
                    return u, cur[0], iterations, switches, True
                cur = NaiveSCS._pop(stack)
                switches += 1
                continue
            op, lam, phi = entries[k]
            a = node_llrs(llr, cur[1], lam, phi)
            cands = node_candidates_ref(op.name, a, bool(frozen[phi]) if lam == 0 else False)
            order = sorted(range(len(cands)), key=lambda o: (cands[o][1], o))
            base = cur[0]
            for o in order[1:]:
                w, d = cands[o]
                NaiveSCS._push(self, stack, [base + d, cur[1] + [int(b) for b in matrix_encode(w)], k + 1])
            w, d = cands[order[0]]
            cur = [base + d, cur[1] + [int(b) for b in matrix_encode(w)], k + 1]
            iterations += 1 << lam
            start = phi << lam
            counter[start] += 1
            if counter[start] == self.L:
                stack[:] = [e for e in stack if len(e[1]) > start]
            if stack and min(e[0] for e in stack) < cur[0]:
                NaiveSCS._push(self, stack, cur)
                cur = NaiveSCS._pop(stack)
                switches += 1


def golden_vectors(cfg, count: int, seed: int, systematic: bool) -> list[tuple[np.ndarray, np.ndarray]]:
    """(payload, codeword) pairs built only from the matrix encoder and long-division CRC."""
    rng = np.random.default_rng(seed)
    info = np.asarray(cfg.info_set)
    frozen = np.asarray(cfg.frozen_mask)
    out = []
    for _ in range(count):
        payload = rng.integers(0, 2, cfg.payload_len, dtype=np.uint8)
        block = payload
        if cfg.crc_len:
            block = np.concatenate([payload, crc_long_division(payload, cfg.crc_poly, cfg.crc_len)])
        u = np.zeros(cfg.N, np.uint8)
        u[info] = block
        if systematic:
            x = matrix_encode(u)
            x[frozen] = 0
            cw = matrix_encode(x)
        else:
            cw = matrix_encode(u)
        out.append((payload, cw))
    return out
