"""Successive-cancellation decoding and the fast simplified (FSSC) variant."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from polarstack import _kernels as K
from polarstack.core import CodeConfig, encode
from polarstack.result import DecodeResult

__all__ = [
    "MemoryTree", "Op", "Schedule", "SCDecoder", "FSSCDecoder",
    "f", "g", "hard_decision", "recursively_calc_alpha", "recursively_update_beta",
    "sc_decode", "build_fssc_schedule", "decide_node", "fssc_decode",
]


def f(a0: float, a1: float) -> np.float32:
    """Min-sum check-node rule."""
    return K.f_min(np.float32(a0), np.float32(a1))


def g(a0: float, a1: float, b: int) -> np.float32:
    """a0 + a1 when b == 0, a0 - a1 otherwise.

    Inside the tree the right child's LLR is ``g(alpha_p[i + L], alpha_p[i], beta_left[i])``.
    """
    return K.g_sum(np.float32(a0), np.float32(a1), int(b))


def hard_decision(a: float) -> int:
    return 0 if a >= 0 else 1


class MemoryTree:
    """Stage-indexed LLR and bit storage for one decoding path.

    ``alpha`` is a flat float32 array of 2N - 1 slots and ``beta`` a flat uint8 array
    of 2(2N - 1) slots; use the ``*_stage`` accessors for per-stage views.
    """

    def __init__(self, N: int):
        if N < 1 or N & (N - 1):
            raise ValueError(f"N must be a power of two, got {N}")
        self.N = N
        self.n = N.bit_length() - 1
        self.alpha = np.zeros(2 * N - 1, dtype=np.float32)
        self.beta = np.zeros(2 * (2 * N - 1), dtype=np.uint8)

    def alpha_stage(self, lam: int) -> np.ndarray:
        return self.alpha[(1 << lam) - 1:(1 << (lam + 1)) - 1]

    def beta_stage(self, lam: int) -> np.ndarray:
        return self.beta[(1 << (lam + 1)) - 2:(1 << (lam + 2)) - 2]

    def node_beta(self, lam: int, phi: int) -> np.ndarray:
        h = 1 << lam
        return self.beta_stage(lam)[(phi & 1) * h:(phi & 1) * h + h]

    def load_channel(self, llr) -> None:
        self.alpha_stage(self.n)[:] = np.asarray(llr, dtype=np.float32)

    def root_beta(self) -> np.ndarray:
        return self.beta_stage(self.n)[:self.N].copy()


def recursively_calc_alpha(lam: int, phi: int, mem: MemoryTree) -> None:
    K.calc_alpha(mem.alpha, mem.beta, mem.n, lam, phi)


def recursively_update_beta(lam: int, phi: int, mem: MemoryTree) -> None:
    K.update_beta(mem.beta, mem.n, lam, phi)


def _llr_array(llr, N: int) -> np.ndarray:
    arr = np.ascontiguousarray(llr, dtype=np.float32)
    if arr.shape != (N,):
        raise ValueError(f"expected {N} channel LLRs, got shape {arr.shape}")
    return arr


def _message(cfg: CodeConfig, u: np.ndarray, cw: np.ndarray, systematic: bool) -> np.ndarray:
    return (cw if systematic else u)[cfg.info_set].copy()


class SCDecoder:
    def __init__(self, cfg: CodeConfig, systematic: bool = False):
        self.cfg = cfg
        self.systematic = systematic
        self.mem = MemoryTree(cfg.N)
        self._frozen = np.ascontiguousarray(cfg.frozen_mask, dtype=np.bool_)

    def decode(self, llr) -> DecodeResult:
        cfg = self.cfg
        u = np.empty(cfg.N, dtype=np.uint8)
        K.sc_decode_tree(_llr_array(llr, cfg.N), self._frozen, self.mem.alpha, self.mem.beta, u)
        cw = self.mem.root_beta()
        return DecodeResult(u, cw, _message(cfg, u, cw, self.systematic), iterations=cfg.N)


def sc_decode(channel_llrs, cfg: CodeConfig, systematic: bool = False):
    """Return ``(u_hat, message)``; the CRC is not checked."""
    res = SCDecoder(cfg, systematic).decode(channel_llrs)
    return res.u_hat, res.message


# ----------------------------------------------------------------------------
# FSSC schedule
# ----------------------------------------------------------------------------

class Op(IntEnum):
    ALPHA = K.OP_ALPHA
    BETA = K.OP_BETA
    R0 = K.OP_R0
    R1 = K.OP_R1
    REP = K.OP_REP
    SPC = K.OP_SPC
    LEAF = K.OP_LEAF


@dataclass(frozen=True, eq=False)
class Schedule:
    """Precomputed FSSC operation list as parallel arrays."""

    N: int
    ops: np.ndarray
    lams: np.ndarray
    phis: np.ndarray
    ends: np.ndarray

    def __len__(self):
        return len(self.ops)

    @property
    def entries(self) -> list[tuple[Op, int, int]]:
        return [(Op(o), int(l), int(p)) for o, l, p in zip(self.ops, self.lams, self.phis)]

    def node_indices(self) -> np.ndarray:
        """Positions of the entries that decide bits."""
        return np.flatnonzero(self.ops >= K.OP_R0)

    def dump(self) -> str:
        return "".join(
            f"{Op(o).name} {l} {p} {e}\n" for o, l, p, e in zip(self.ops, self.lams, self.phis, self.ends)
        )


def build_fssc_schedule(cfg: CodeConfig) -> Schedule:
    frozen = np.asarray(cfg.frozen_mask)
    entries: list[tuple[int, int, int]] = []

    def kind(lam: int, phi: int):
        h = 1 << lam
        seg = frozen[phi * h:(phi + 1) * h]
        if lam == 0:
            return Op.LEAF
        nfz = int(seg.sum())
        if nfz == h:
            return Op.R0
        if nfz == 0:
            return Op.R1
        if nfz == h - 1 and not seg[-1]:
            return Op.REP
        if nfz == 1 and seg[0]:
            return Op.SPC
        return None

    def visit(lam: int, phi: int) -> None:
        k = kind(lam, phi)
        if k is not None:
            entries.append((k, lam, phi))
            return
        for child in (2 * phi, 2 * phi + 1):
            entries.append((Op.ALPHA, lam - 1, child))
            visit(lam - 1, child)
        entries.append((Op.BETA, lam - 1, 2 * phi + 1))

    visit(cfg.n, 0)
    ops = np.array([e[0] for e in entries], dtype=np.int64)
    lams = np.array([e[1] for e in entries], dtype=np.int64)
    phis = np.array([e[2] for e in entries], dtype=np.int64)
    ends = np.zeros(len(entries), dtype=np.int64)
    done = 0
    for k, (op, lam, phi) in enumerate(entries):
        if op >= Op.R0:
            done = (phi + 1) << lam
        ends[k] = done
    for arr in (ops, lams, phis, ends):
        arr.setflags(write=False)
    return Schedule(cfg.N, ops, lams, phis, ends)


def decide_node(op: Op, alpha, frozen_leaf: bool = False) -> np.ndarray:
    """Bit estimates of one constituent node from its LLRs."""
    a = np.ascontiguousarray(alpha, dtype=np.float32)
    out = np.empty(len(a), dtype=np.uint8)
    K.node_decide(int(op), a, frozen_leaf, out, np.empty(len(a), dtype=np.float32))
    return out


class FSSCDecoder:
    def __init__(self, cfg: CodeConfig, schedule: Schedule | None = None, systematic: bool = True):
        self.cfg = cfg
        self.schedule = schedule if schedule is not None else build_fssc_schedule(cfg)
        self.systematic = systematic
        self.mem = MemoryTree(cfg.N)
        self._frozen = np.ascontiguousarray(cfg.frozen_mask, dtype=np.bool_)
        self._scratch = np.empty(cfg.N, dtype=np.float32)

    def decode(self, llr) -> DecodeResult:
        cfg, s = self.cfg, self.schedule
        cw = np.empty(cfg.N, dtype=np.uint8)
        K.fssc_decode_tree(_llr_array(llr, cfg.N), self._frozen, s.ops, s.lams, s.phis,
                           self.mem.alpha, self.mem.beta, self._scratch, cw)
        u = encode(cw)
        return DecodeResult(u, cw, _message(cfg, u, cw, self.systematic), iterations=cfg.N)


def fssc_decode(channel_llrs, cfg: CodeConfig, schedule: Schedule | None = None, systematic: bool = True):
    """Return ``(u_hat, message)`` read from the root bit estimates."""
    res = FSSCDecoder(cfg, schedule, systematic).decode(channel_llrs)
    return res.u_hat, res.message
