"""BPSK over AWGN and the Monte-Carlo frame-error harness."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import multiprocessing as mp

import numpy as np

from polarstack.core import CodeConfig, attach_crc, encode, encode_systematic, place_on_info_set
from polarstack.decoders import make_decoder, uses_systematic

LLR_CLAMP = 80.0
BATCH_FRAMES = 64
_MASK64 = (1 << 64) - 1

__all__ = [
    "ChannelParams", "StopRule", "TrialRecord", "LLR_CLAMP",
    "ebno_to_sigma", "modulate_and_transmit", "splitmix64", "run_point", "run_sweep",
]


def ebno_to_sigma(ebno_db: float, rate: float) -> float:
    if not rate > 0 or rate > 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0)))


@dataclass(frozen=True)
class ChannelParams:
    ebno_db: float
    rate: float
    seed: int = 0
    noiseless: bool = False

    @property
    def sigma(self) -> float:
        return ebno_to_sigma(self.ebno_db, self.rate)


def splitmix64(seed: int, index: int) -> int:
    """One splitmix64 output for stream position ``index`` of ``seed``."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def modulate_and_transmit(codeword, sigma: float, rng: np.random.Generator | None = None,
                          noiseless: bool = False, clamp: float = LLR_CLAMP) -> np.ndarray:
    """BPSK-map (0 -> +1, 1 -> -1), add N(0, sigma^2) noise and return float32 LLRs 2y/sigma^2.

    Noiseless mode skips the noise and returns +-clamp.
    """
    x = 1.0 - 2.0 * np.asarray(codeword, dtype=np.float64)
    if noiseless:
        return (clamp * x).astype(np.float32)
    y = x + sigma * rng.standard_normal(x.shape[0])
    return np.clip(2.0 * y / sigma**2, -clamp, clamp).astype(np.float32)


@dataclass(frozen=True)
class StopRule:
    """Run until ``max_frames``, or earlier once both minima are met."""

    max_frames: int = 200_000
    min_frame_errors: int = 200
    min_frames: int = 10_000

    def __post_init__(self):
        if self.max_frames < 1 or self.min_frame_errors < 1:
            raise ValueError("stop criteria must be positive")

    def done(self, frames: int, errors: int) -> bool:
        if frames >= self.max_frames:
            return True
        return errors >= self.min_frame_errors and frames >= self.min_frames


@dataclass
class TrialRecord:
    ebno_db: float
    frames: int = 0
    frame_errors: int = 0
    bit_errors: int = 0
    info_bits_per_frame: int = 0
    payload_bits_per_frame: int = 0
    total_iterations: int = 0
    total_path_switches: int = 0
    decode_wall_time: float = 0.0
    crc_flagged: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ber(self) -> float:
        bits = self.frames * self.payload_bits_per_frame
        return self.bit_errors / bits if bits else 0.0

    @property
    def avg_iterations(self) -> float:
        return self.total_iterations / self.frames if self.frames else 0.0

    @property
    def avg_path_switches(self) -> float:
        return self.total_path_switches / self.frames if self.frames else 0.0

    @property
    def info_throughput(self) -> float:
        """Information bits per second of decode time (per worker)."""
        if self.decode_wall_time <= 0:
            return 0.0
        return self.frames * self.info_bits_per_frame / self.decode_wall_time

    def fer_ci(self, confidence: float = 0.95) -> tuple[float, float]:
        """Exact (Clopper-Pearson) interval for the frame-error rate."""
        from scipy.stats import beta

        k, n = self.frame_errors, self.frames
        if n == 0:
            return 0.0, 1.0
        a = 1.0 - confidence
        lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
        hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
        return lo, hi

    def counters(self) -> tuple[int, ...]:
        return (self.frames, self.frame_errors, self.bit_errors, self.total_iterations,
                self.total_path_switches, self.crc_flagged)

    def merge_batch(self, b: tuple) -> None:
        self.frames += b[0]
        self.frame_errors += b[1]
        self.bit_errors += b[2]
        self.total_iterations += b[3]
        self.total_path_switches += b[4]
        self.crc_flagged += b[5]
        self.decode_wall_time += b[6]


# ----------------------------------------------------------------------------
# worker side
# ----------------------------------------------------------------------------

_STATE: dict = {}


def _setup(cfg: CodeConfig, kind: str, L: int, D: int | None, systematic: bool,
           params: ChannelParams) -> None:
    _STATE.update(cfg=cfg, kind=kind, systematic=systematic, params=params,
                  dec=make_decoder(kind, cfg, L, D, systematic))


def _run_batch(first: int, count: int) -> tuple:
    cfg: CodeConfig = _STATE["cfg"]
    params: ChannelParams = _STATE["params"]
    dec = _STATE["dec"]
    systematic = _STATE["systematic"]
    sigma = params.sigma
    P = cfg.payload_len
    ferr = berr = iters = sw = flagged = 0
    dt = 0.0
    for t in range(first, first + count):
        rng = np.random.default_rng(splitmix64(params.seed, t))
        payload = rng.integers(0, 2, P, dtype=np.uint8)
        block = attach_crc(payload, cfg)
        cw = encode_systematic(block, cfg) if systematic else encode(place_on_info_set(block, cfg))
        llr = modulate_and_transmit(cw, sigma, rng, params.noiseless)
        t0 = time.perf_counter()
        res = dec.decode(llr)
        dt += time.perf_counter() - t0
        nerr = int(np.count_nonzero(res.message[:P] != payload))
        ferr += nerr > 0
        berr += nerr
        iters += res.iterations
        sw += res.path_switches
        flagged += res.crc_failed
    return count, ferr, berr, iters, sw, flagged, dt


def default_workers() -> int:
    env = os.environ.get("POLARSTACK_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def run_point(cfg: CodeConfig, decoder_kind: str, params: ChannelParams, stop: StopRule,
              workers: int = 1, L: int = 8, D: int | None = None,
              systematic: bool | None = None, batch_frames: int = BATCH_FRAMES) -> TrialRecord:
    """Simulate one Eb/N0 point.

    Trials are grouped in fixed-size batches evaluated in index order, so the counters do
    not depend on the number of workers.
    """
    sys_ = uses_systematic(decoder_kind, systematic)
    rec = TrialRecord(params.ebno_db, info_bits_per_frame=cfg.K, payload_bits_per_frame=cfg.payload_len)
    args = (cfg, decoder_kind, L, D, sys_, params)

    def sizes(start_batch: int):
        b = start_batch
        while True:
            first = b * batch_frames
            yield first, max(0, min(batch_frames, stop.max_frames - first))
            b += 1

    if workers <= 1:
        _setup(*args)
        for first, count in sizes(0):
            if count == 0:
                break
            rec.merge_batch(_run_batch(first, count))
            if stop.done(rec.frames, rec.frame_errors):
                break
        return rec

    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_setup, initargs=args) as ex:
        gen = sizes(0)
        finished = False
        while not finished:
            wave = [next(gen) for _ in range(workers)]
            wave = [w for w in wave if w[1] > 0]
            if not wave:
                break
            results = list(ex.map(_run_batch, *zip(*wave)))
            for res in results:
                rec.merge_batch(res)
                if stop.done(rec.frames, rec.frame_errors):
                    finished = True
                    break
    return rec


def run_sweep(cfg: CodeConfig, decoder_kind: str, ebno_list, stop: StopRule, workers: int = 1,
              L: int = 8, D: int | None = None, systematic: bool | None = None, seed: int = 0,
              noiseless: bool = False) -> list[TrialRecord]:
    return [
        run_point(cfg, decoder_kind, ChannelParams(float(e), cfg.rate, seed, noiseless), stop,
                  workers, L, D, systematic)
        for e in ebno_list
    ]
