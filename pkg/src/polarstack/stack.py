"""Stack (best-first) decoders: SCS, SCS-RM and FSSCS-RM.

All three share the same search rule: the path being extended keeps the better child,
the worse child is stored on a bounded stack, and whenever a stored path has a smaller
metric than the current one the decoder switches to it.  Once L paths of some length
have been extended, shorter-or-equal stored paths are dropped.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from polarstack import _kernels as K
from polarstack.core import CodeConfig, encode
from polarstack.listdec import LazyMemoryPool
from polarstack.result import DecodeResult
from polarstack.sc import MemoryTree, Schedule, _llr_array, build_fssc_schedule

__all__ = [
    "Stack", "StackExhausted", "stack_pop_best", "stack_push", "length_prune",
    "repopulate_beta", "recalc_alpha_from_root", "flat_beta_write", "flat_beta_propagate",
    "SCSDecoder", "SCSRMDecoder", "FSSCSRMDecoder",
    "scs_decode", "scs_rm_decode", "fsscs_rm_decode",
]


class StackExhausted(LookupError):
    """Raised when popping from an empty stack."""


def _stack_arrays(slots: int):
    return (
        np.zeros(slots),
        np.zeros(slots, dtype=np.int64),
        np.zeros(slots, dtype=np.int8),
        np.zeros(slots, dtype=np.int64),
        np.zeros(6, dtype=np.int64),
    )


class Stack:
    """Bounded store of (pm, path length, payload) entries searched linearly."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("stack capacity must be at least 1")
        self.capacity = capacity
        self.arrays = _stack_arrays(capacity)
        self.payload: list[Any] = [None] * capacity
        K.stack_reset(self.arrays)

    def __len__(self):
        return int(self.arrays[4][1])

    @property
    def peak(self) -> int:
        return int(self.arrays[4][3])

    def entries(self) -> list[tuple[int, float, int]]:
        """``(slot, pm, pl)`` of every stored entry, by slot."""
        pm, pl, state, _, meta = self.arrays
        return [(s, float(pm[s]), int(pl[s])) for s in range(meta[2]) if state[s] == 1]


def stack_push(stack: Stack, pm: float, pl: int, payload: Any = None) -> bool:
    slot, _ = K.stack_claim(stack.arrays, stack.capacity, float(pm))
    if slot < 0:
        return False
    stack.arrays[0][slot] = pm
    stack.arrays[1][slot] = pl
    stack.payload[slot] = payload
    K.stack_mark_stored(stack.arrays, slot)
    return True


def stack_pop_best(stack: Stack) -> tuple[float, int, Any]:
    slot = K.stack_best(stack.arrays)
    if slot < 0:
        raise StackExhausted("stack is empty")
    entry = (float(stack.arrays[0][slot]), int(stack.arrays[1][slot]), stack.payload[slot])
    stack.payload[slot] = None
    K.stack_free_slot(stack.arrays, slot)
    return entry


def length_prune(stack: Stack, omega: int) -> None:
    """Drop every entry whose path length is at most ``omega``."""
    pm, pl, state, _, meta = stack.arrays
    for s in range(meta[2]):
        if state[s] == 1 and pl[s] <= omega:
            stack.payload[s] = None
    K._stack_prune_plain(stack.arrays, omega)


def repopulate_beta(mem: MemoryTree, u_prefix) -> None:
    u = np.ascontiguousarray(u_prefix, dtype=np.uint8)
    K.repopulate_beta(mem.beta, mem.n, u, len(u))


def recalc_alpha_from_root(mem: MemoryTree, lam: int, phi: int) -> None:
    K.calc_alpha_from_root(mem.alpha, mem.beta, mem.n, lam, phi)


def flat_beta_write(flat: np.ndarray, lam: int, phi: int, node_bits) -> None:
    h = 1 << lam
    flat[phi * h:(phi + 1) * h] = node_bits


def flat_beta_propagate(flat: np.ndarray, lam: int, phi: int) -> None:
    K.flat_beta_propagate(flat, len(flat).bit_length() - 1, lam, phi)


class _StackBase:
    def __init__(self, cfg: CodeConfig, L: int, D: int | None, systematic: bool):
        if L < 1:
            raise ValueError("L must be at least 1")
        D = L * cfg.N if D is None else D
        if D < 1:
            raise ValueError("stack size must be at least 1")
        self.cfg, self.L, self.D, self.systematic = cfg, L, D, systematic
        self.stack = _stack_arrays(D + 1)
        self.counter = np.zeros(cfg.N + 1, dtype=np.int64)
        self.stats = np.zeros(5, dtype=np.int64)
        self._frozen = np.ascontiguousarray(cfg.frozen_mask, dtype=np.bool_)
        self._info = np.ascontiguousarray(cfg.info_set, dtype=np.int64)

    def _result(self, u, cw, pm) -> DecodeResult:
        st = self.stats
        msg = (cw if self.systematic else u)[self.cfg.info_set].copy()
        return DecodeResult(u, cw, msg, crc_failed=bool(st[3]), pm=float(pm),
                            iterations=int(st[0]), path_switches=int(st[1]), stack_peak=int(st[2]))


class SCSDecoder(_StackBase):
    """Stack decoder keeping lazily-copied memory trees for every stored path."""

    reduced = False

    def __init__(self, cfg: CodeConfig, L: int, D: int | None = None, systematic: bool = False):
        super().__init__(cfg, L, D, systematic)
        N = cfg.N
        self.mem = MemoryTree(N)
        self.su = np.zeros((self.D + 1, N), dtype=np.uint8)
        self.pend = np.zeros(self.D + 1, dtype=np.bool_)
        if self.reduced:
            self.pool = LazyMemoryPool(N, 1, paths=1)
        else:
            self.pool = LazyMemoryPool(N, self.D + 1)

    def decode(self, llr) -> DecodeResult:
        cfg = self.cfg
        u = np.empty(cfg.N, dtype=np.uint8)
        pm = K.scs_kernel(_llr_array(llr, cfg.N), self._frozen, self.L, self.D, self.reduced,
                          self.pool.arrays, self.mem.alpha, self.mem.beta, self.stack, self.su,
                          self.pend, self.counter, self._info, self.systematic,
                          cfg.crc_poly, cfg.crc_len, u, self.stats)
        return self._result(u, encode(u), pm)


class SCSRMDecoder(SCSDecoder):
    """Stack decoder with one memory tree, rebuilt from stored bit estimates on a switch."""

    reduced = True


class FSSCSRMDecoder(_StackBase):
    """Node-granular stack decoder over the FSSC schedule with flat per-path bit arrays."""

    def __init__(self, cfg: CodeConfig, L: int, D: int | None = None,
                 schedule: Schedule | None = None, systematic: bool = True):
        super().__init__(cfg, L, D, systematic)
        self.schedule = schedule if schedule is not None else build_fssc_schedule(cfg)
        self.mem = MemoryTree(cfg.N)
        self.sbeta = np.zeros((self.D + 1, cfg.N), dtype=np.uint8)
        self.sidx = np.zeros(self.D + 1, dtype=np.int64)

    def decode(self, llr) -> DecodeResult:
        cfg, s = self.cfg, self.schedule
        cw = np.empty(cfg.N, dtype=np.uint8)
        pm = K.fsscs_rm_kernel(_llr_array(llr, cfg.N), self._frozen, s.ops, s.lams, s.phis, s.ends,
                               self.L, self.D, self.mem.alpha, self.stack, self.sbeta, self.sidx,
                               self.counter, self._info, self.systematic, cfg.crc_poly, cfg.crc_len,
                               cw, self.stats)
        return self._result(encode(cw), cw, pm)


def scs_decode(channel_llrs, cfg: CodeConfig, L: int, D: int | None = None, systematic: bool = False):
    """Return ``(message, stats)``."""
    res = SCSDecoder(cfg, L, D, systematic).decode(channel_llrs)
    return res.message, res.stats


def scs_rm_decode(channel_llrs, cfg: CodeConfig, L: int, D: int | None = None, systematic: bool = False):
    res = SCSRMDecoder(cfg, L, D, systematic).decode(channel_llrs)
    return res.message, res.stats


def fsscs_rm_decode(channel_llrs, cfg: CodeConfig, schedule: Schedule | None = None, L: int = 8,
                    D: int | None = None, systematic: bool = True):
    res = FSSCSRMDecoder(cfg, L, D, schedule, systematic).decode(channel_llrs)
    return res.message, res.stats
