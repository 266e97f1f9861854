"""Polar code construction, encoding and CRC.

Bit vectors are ``numpy.uint8`` arrays holding 0/1 values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from polarstack import _kernels as K

CRC24C_POLY = 0xB2B117
CRC24C_LEN = 24

_SEQUENCE_RESOURCE = "nr_polar_sequence_1024.txt"


class CodeConfigError(ValueError):
    """Raised for an invalid code description."""


@dataclass(frozen=True)
class ReliabilitySequence:
    """Channel indices ordered from least to most reliable."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.indices) != list(range(len(self.indices))):
            raise CodeConfigError("reliability sequence is not a permutation of [0, N_max)")

    def __len__(self):
        return len(self.indices)

    @classmethod
    def from_file(cls, path: str | Path) -> "ReliabilitySequence":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_text(text)

    @classmethod
    def from_text(cls, text: str) -> "ReliabilitySequence":
        idx = tuple(int(tok) for tok in text.split())
        return cls(idx)


def nr_sequence() -> ReliabilitySequence:
    """The length-1024 polar sequence of 3GPP TS 38.212 (Table 5.3.1.2-1)."""
    text = resources.files("polarstack.data").joinpath(_SEQUENCE_RESOURCE).read_text(encoding="utf-8")
    return ReliabilitySequence.from_text(text)


@dataclass(frozen=True, eq=False)
class CodeConfig:
    N: int
    K: int
    info_set: np.ndarray
    crc_len: int = 0
    crc_poly: int = 0
    frozen_set: np.ndarray = field(init=False)
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N, K = self.N, self.K
        if N < 1 or N & (N - 1):
            raise CodeConfigError(f"N must be a power of two, got {N}")
        info = np.asarray(self.info_set, dtype=np.int64)
        if info.ndim != 1 or len(info) != K:
            raise CodeConfigError("info_set must hold exactly K indices")
        if not 0 <= K <= N:
            raise CodeConfigError(f"K must be in [0, N], got {K}")
        if K and (info.min() < 0 or info.max() >= N or np.any(np.diff(info) <= 0)):
            raise CodeConfigError("info_set must be sorted, unique and inside [0, N)")
        if self.crc_len < 0 or (self.crc_len > 0 and self.crc_len >= K):
            raise CodeConfigError("crc_len must be smaller than K")
        if self.crc_len and self.crc_poly >> self.crc_len:
            raise CodeConfigError("crc_poly must fit in crc_len bits (leading term implied)")
        mask = np.ones(N, dtype=np.bool_)
        mask[info] = False
        info.setflags(write=False)
        mask.setflags(write=False)
        frozen = np.flatnonzero(mask)
        frozen.setflags(write=False)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "frozen_set", frozen)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def payload_len(self) -> int:
        return self.K - self.crc_len

    @property
    def rate(self) -> float:
        return self.K / self.N

    def __eq__(self, other):
        if not isinstance(other, CodeConfig):
            return NotImplemented
        return (self.N, self.K, self.crc_len, self.crc_poly) == (
            other.N, other.K, other.crc_len, other.crc_poly
        ) and np.array_equal(self.info_set, other.info_set)

    def __hash__(self):
        return hash((self.N, self.K, self.crc_len, self.crc_poly, self.info_set.tobytes()))


def build_code_config(
    N: int,
    K: int,
    crc_len: int = 0,
    crc_poly: int = 0,
    sequence: ReliabilitySequence | None = None,
) -> CodeConfig:
    """Pick the K most reliable sub-N channels of ``sequence`` as the information set."""
    if N < 1 or N & (N - 1):
        raise CodeConfigError(f"N must be a power of two, got {N}")
    if sequence is None:
        sequence = nr_sequence()
    if N > len(sequence):
        raise CodeConfigError(f"sequence covers only {len(sequence)} channels, N={N}")
    if not 0 <= K <= N:
        raise CodeConfigError(f"K must be in [0, N], got {K}")
    sub = [i for i in sequence.indices if i < N]
    info = np.sort(np.array(sub[len(sub) - K:], dtype=np.int64)) if K else np.zeros(0, np.int64)
    return CodeConfig(N=N, K=K, info_set=info, crc_len=crc_len, crc_poly=crc_poly)


def config_from_info_set(N: int, info_set: Sequence[int], crc_len: int = 0, crc_poly: int = 0) -> CodeConfig:
    info = np.sort(np.asarray(info_set, dtype=np.int64))
    return CodeConfig(N=N, K=len(info), info_set=info, crc_len=crc_len, crc_poly=crc_poly)


def _as_bits(bits) -> np.ndarray:
    arr = np.ascontiguousarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit vectors must be one-dimensional")
    return arr


def encode(u) -> np.ndarray:
    """Return ``u`` times the n-th Kronecker power of [[1, 0], [1, 1]] over GF(2)."""
    x = _as_bits(u).copy()
    N = len(x)
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    h = 1
    while h < N:
        y = x.reshape(-1, 2, h)
        y[:, 0, :] ^= y[:, 1, :]
        h *= 2
    return x


def encode_systematic(block, cfg: CodeConfig) -> np.ndarray:
    """Codeword whose restriction to the information set equals ``block``."""
    block = _as_bits(block)
    if len(block) != cfg.K:
        raise ValueError(f"expected {cfg.K} bits, got {len(block)}")
    u = np.zeros(cfg.N, dtype=np.uint8)
    u[cfg.info_set] = block
    x = encode(u)
    x[cfg.frozen_mask] = 0
    return encode(x)


def place_on_info_set(block, cfg: CodeConfig) -> np.ndarray:
    u = np.zeros(cfg.N, dtype=np.uint8)
    u[cfg.info_set] = _as_bits(block)
    return u


def crc_compute(bits, poly: int, crc_len: int) -> np.ndarray:
    """CRC remainder of ``bits * x^crc_len`` (MSB first, zero init, no reflection)."""
    if crc_len < 1:
        raise ValueError("crc_len must be positive")
    out = np.empty(crc_len, dtype=np.uint8)
    K.crc_bits(_as_bits(bits), poly, crc_len, out)
    return out


def crc_check(bits_with_crc, poly: int, crc_len: int) -> bool:
    bits = _as_bits(bits_with_crc)
    if len(bits) <= crc_len:
        raise ValueError("input must be longer than the CRC")
    return bool(K.crc_ok(bits, poly, crc_len))


def attach_crc(payload, cfg: CodeConfig) -> np.ndarray:
    payload = _as_bits(payload)
    if len(payload) != cfg.payload_len:
        raise ValueError(f"expected {cfg.payload_len} payload bits, got {len(payload)}")
    if cfg.crc_len == 0:
        return payload.copy()
    return np.concatenate([payload, crc_compute(payload, cfg.crc_poly, cfg.crc_len)])


def bits_to_hex(bits) -> str:
    bits = _as_bits(bits)
    pad = (-len(bits)) % 4
    padded = np.concatenate([bits, np.zeros(pad, np.uint8)])
    nibbles = padded.reshape(-1, 4) @ np.array([8, 4, 2, 1])
    return "".join("0123456789abcdef"[v] for v in nibbles)


def hex_to_bits(text: str, nbits: int) -> np.ndarray:
    vals = np.array([int(c, 16) for c in text.strip()], dtype=np.uint8)
    bits = ((vals[:, None] >> np.array([3, 2, 1, 0], dtype=np.uint8)) & 1).astype(np.uint8).ravel()
    if len(bits) < nbits:
        raise ValueError("hex string too short")
    return bits[:nbits].copy()
