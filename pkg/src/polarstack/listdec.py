"""CRC-aided list decoding (SCL) and its fast-node variant (FSSCL)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from polarstack import _kernels as K
from polarstack.core import CodeConfig, encode
from polarstack.result import DecodeResult
from polarstack.sc import Schedule, _llr_array, build_fssc_schedule

__all__ = [
    "LazyMemoryPool", "ListPathOut", "SCLDecoder", "FSSCLDecoder",
    "pm_update_leaf", "prune_to_L", "extend_r0", "extend_rep", "extend_r1_chase", "extend_spc",
    "scl_decode", "fsscl_decode",
]


def pm_update_leaf(pm: float, leaf_llr: float, chosen_bit: int) -> float:
    if chosen_bit == (0 if leaf_llr >= 0 else 1):
        return pm
    return pm + abs(leaf_llr)


def prune_to_L(candidates, L: int) -> list:
    """Keep the L smallest-metric candidates.

    ``candidates`` is a sequence of ``(pm, parent_id, ordinal, payload)``; ties break on
    parent id, then ordinal. Survivors are returned in (parent_id, ordinal) order.
    """
    ranked = sorted(candidates, key=lambda c: (c[0], c[1], c[2]))[:L]
    return sorted(ranked, key=lambda c: (c[1], c[2]))


def _node_candidates(op: int, alpha) -> list[tuple[np.ndarray, float]]:
    a = np.ascontiguousarray(alpha, dtype=np.float32)
    dpm = np.empty(16)
    idx = np.empty(4, dtype=np.int64)
    bits = np.empty(len(a), dtype=np.uint8)
    count = K.node_candidates(op, a, False, dpm, idx)
    out = []
    for o in range(count):
        K.node_candidate_bits(op, a, False, o, idx, bits)
        out.append((bits.copy(), float(dpm[o])))
    return out


def extend_r0(alpha) -> list[tuple[np.ndarray, float]]:
    """Single all-zero candidate and its metric increment."""
    return _node_candidates(K.OP_R0, alpha)


def extend_rep(alpha) -> list[tuple[np.ndarray, float]]:
    """All-zero and all-one candidates."""
    return _node_candidates(K.OP_REP, alpha)


def extend_r1_chase(alpha) -> list[tuple[np.ndarray, float]]:
    """Hard-decision word with the two least reliable positions flipped in all four ways."""
    return _node_candidates(K.OP_R1, alpha)


def extend_spc(alpha) -> list[tuple[np.ndarray, float]]:
    """Parity-satisfying flips of the four least reliable positions."""
    return _node_candidates(K.OP_SPC, alpha)


class LazyMemoryPool:
    """Per-stage alpha/beta block pools with reference counts.

    Paths share stage blocks until one of them writes; a write to a shared block first
    takes a private block (copying beta contents; alpha is fully overwritten anyway).
    """

    def __init__(self, N: int, capacity: int, paths: int | None = None):
        n = N.bit_length() - 1
        paths = capacity if paths is None else paths
        self.N, self.n, self.capacity = N, n, capacity
        self.arrays = (
            np.zeros(capacity * (2 * N - 1), dtype=np.float32),
            np.zeros((n + 1, capacity), dtype=np.int32),
            np.zeros((n + 1, capacity), dtype=np.int32),
            np.zeros(n + 1, dtype=np.int64),
            np.zeros(capacity * 2 * (2 * N - 1), dtype=np.uint8),
            np.zeros((n + 1, capacity), dtype=np.int32),
            np.zeros((n + 1, capacity), dtype=np.int32),
            np.zeros(n + 1, dtype=np.int64),
            np.zeros((paths, n + 1), dtype=np.int32),
            np.zeros((paths, n + 1), dtype=np.int32),
        )
        K.pool_reset(self.arrays)

    def live_blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Live alpha and beta block counts per stage."""
        return self.capacity - self.arrays[3], self.capacity - self.arrays[7]

    def audit(self) -> bool:
        """True when every block is free and no reference count is left over."""
        _, aref, afree, atop, _, bref, bfree, btop, _, _ = self.arrays
        if np.any(aref) or np.any(bref):
            return False
        if np.any(atop != self.capacity) or np.any(btop != self.capacity):
            return False
        full = np.arange(self.capacity)
        return all(np.array_equal(np.sort(row), full) for row in (*afree, *bfree))


@dataclass
class ListPathOut:
    pm: float
    codeword: np.ndarray
    message: np.ndarray


class _ListBase:
    def __init__(self, cfg: CodeConfig, L: int, systematic: bool):
        if L < 1:
            raise ValueError("list size must be at least 1")
        self.cfg, self.L, self.systematic = cfg, L, systematic
        self.pool = LazyMemoryPool(cfg.N, L)
        self._frozen = np.ascontiguousarray(cfg.frozen_mask, dtype=np.bool_)
        self._info = np.ascontiguousarray(cfg.info_set, dtype=np.int64)
        self._cw = np.empty((L, cfg.N), dtype=np.uint8)
        self._pm = np.empty(L)
        self._order = np.empty(L, dtype=np.int64)
        self._blocks = np.empty((L, cfg.K), dtype=np.uint8)
        self.last_paths: list[ListPathOut] = []

    def _run(self, llr) -> int:
        raise NotImplementedError

    def decode(self, llr) -> DecodeResult:
        cfg = self.cfg
        npaths = self._run(_llr_array(llr, cfg.N))
        sel = K.crc_select(self._cw, self._pm, npaths, self._info, self.systematic,
                           cfg.crc_poly, cfg.crc_len, self._order, self._blocks)
        self.last_paths = [
            ListPathOut(float(self._pm[p]), self._cw[p].copy(), self._blocks[r].copy())
            for r, p in enumerate(self._order[:npaths])
        ]
        failed = sel < 0
        r = 0 if failed else sel
        best = self.last_paths[r]
        return DecodeResult(encode(best.codeword), best.codeword, best.message,
                            crc_failed=bool(failed), pm=best.pm)


class SCLDecoder(_ListBase):
    def __init__(self, cfg: CodeConfig, L: int, systematic: bool = False):
        super().__init__(cfg, L, systematic)

    def _run(self, llr) -> int:
        return K.scl_kernel(llr, self._frozen, self.L, self.pool.arrays, self._cw, self._pm)


class FSSCLDecoder(_ListBase):
    def __init__(self, cfg: CodeConfig, L: int, schedule: Schedule | None = None, systematic: bool = True):
        super().__init__(cfg, L, systematic)
        self.schedule = schedule if schedule is not None else build_fssc_schedule(cfg)

    def _run(self, llr) -> int:
        s = self.schedule
        return K.fsscl_kernel(llr, self._frozen, s.ops, s.lams, s.phis, self.L,
                              self.pool.arrays, self._cw, self._pm)


def scl_decode(channel_llrs, cfg: CodeConfig, L: int, systematic: bool = False):
    """Return ``(paths, result)``: final paths sorted by metric and the CRC-selected decode."""
    dec = SCLDecoder(cfg, L, systematic)
    res = dec.decode(channel_llrs)
    return dec.last_paths, res


def fsscl_decode(channel_llrs, cfg: CodeConfig, L: int, schedule: Schedule | None = None,
                 systematic: bool = True):
    dec = FSSCLDecoder(cfg, L, schedule, systematic)
    res = dec.decode(channel_llrs)
    return dec.last_paths, res

