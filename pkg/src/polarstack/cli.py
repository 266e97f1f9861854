"""Command-line front end: FER sweeps, golden-vector checks and differential checks."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from polarstack.channel import (
    LLR_CLAMP, StopRule, TrialRecord, default_workers, ebno_to_sigma,
    modulate_and_transmit, run_sweep,
)
from polarstack.core import (
    CRC24C_LEN, CRC24C_POLY, CodeConfigError, ReliabilitySequence, attach_crc,
    build_code_config, encode, encode_systematic, hex_to_bits, bits_to_hex,
    place_on_info_set,
)
from polarstack.decoders import KINDS, LIST_KINDS, STACK_KINDS, DecoderMismatch, uses_systematic

CSV_HEADER = (
    "ebno_db", "frames", "frame_errors", "bit_errors", "fer", "ber",
    "avg_iterations", "avg_path_switches", "throughput_info_bps_per_worker",
)
GOLDEN_FILES = (
    "golden_pc8_4.csv",
    "golden_pc1024_512_crc24c.csv",
    "golden_pc1024_512_crc24c_sys.csv",
)

EXIT_OK, EXIT_DIVERGED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polarstack", description=__doc__)
    p.add_argument("--mode", choices=("sweep", "golden", "differential"), default="sweep")
    p.add_argument("--N", type=int, default=1024, help="block length (power of two)")
    p.add_argument("--K", type=int, default=512, help="information-set size, CRC bits included")
    p.add_argument("--crc", choices=("auto", "none", "crc24c"), default="auto",
                   help="auto selects CRC-24C when K > 24")
    p.add_argument("--decoder", choices=KINDS, default="sc")
    p.add_argument("--list", dest="L", type=int, default=8, help="list size L")
    p.add_argument("--stack", dest="D", type=int, default=None, help="stack capacity D (default L*N)")
    p.add_argument("--ebno", type=float, nargs=3, metavar=("START", "STOP", "STEP"), default=(2.0, 2.0, 0.5))
    p.add_argument("--frames", type=int, default=200_000, help="maximum frames per point")
    p.add_argument("--min-errors", type=int, default=200)
    p.add_argument("--min-frames", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=None, help="worker processes (env POLARSTACK_WORKERS)")
    p.add_argument("--sequence", type=Path, default=None, help="reliability sequence file")
    p.add_argument("--output", type=Path, default=None, help="CSV path (stdout when omitted)")
    p.add_argument("--noiseless", action="store_true", help=f"no noise, LLRs clamped to +-{LLR_CLAMP:g}")
    p.add_argument("--systematic", action="store_true", help="systematic encoding for sc/scl/scs/scs-rm")
    return p


def ebno_points(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("--ebno step must be positive")
    if stop < start:
        return []
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(records: list[TrialRecord], path: Path | str | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([
            _fmt(r.ebno_db), r.frames, r.frame_errors, r.bit_errors, _fmt(r.fer), _fmt(r.ber),
            _fmt(r.avg_iterations), _fmt(r.avg_path_switches), _fmt(r.info_throughput),
        ])
    text = buf.getvalue()
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return text


def read_csv(path: Path | str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    ints = {"frames", "frame_errors", "bit_errors"}
    return [{k: (int(v) if k in ints else float(v)) for k, v in row.items()} for row in rows]


def _config(args):
    if args.crc == "auto":
        crc_len = CRC24C_LEN if args.K > CRC24C_LEN else 0
    else:
        crc_len = CRC24C_LEN if args.crc == "crc24c" else 0
    seq = ReliabilitySequence.from_file(args.sequence) if args.sequence else None
    return build_code_config(args.N, args.K, crc_len, CRC24C_POLY if crc_len else 0, seq)


# ----------------------------------------------------------------------------
# golden mode
# ----------------------------------------------------------------------------

def _parse_header(line: str) -> dict:
    fields = dict(tok.split("=", 1) for tok in line.lstrip("#").split())
    return {
        "N": int(fields["N"]), "K": int(fields["K"]), "crc_len": int(fields["crc_len"]),
        "crc_poly": int(fields["crc_poly"], 16), "systematic": fields["encoding"] == "systematic",
    }


def check_golden(text: str, sequence: ReliabilitySequence | None = None) -> tuple[int, int]:
    """Return (cases, mismatches) for one golden-vector file."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = _parse_header(lines[0])
    cfg = build_code_config(head["N"], head["K"], head["crc_len"], head["crc_poly"], sequence)
    bad = 0
    cases = 0
    for ln in lines[1:]:
        if ln.startswith("#"):
            continue
        msg_hex, cw_hex = ln.split(",")
        payload = hex_to_bits(msg_hex, cfg.payload_len)
        block = attach_crc(payload, cfg)
        cw = encode_systematic(block, cfg) if head["systematic"] else encode(place_on_info_set(block, cfg))
        cases += 1
        bad += bits_to_hex(cw) != cw_hex
    return cases, bad


def run_golden(out=None) -> int:
    out = out or sys.stdout
    total_bad = 0
    for name in GOLDEN_FILES:
        text = resources.files("polarstack.data").joinpath(name).read_text(encoding="utf-8")
        cases, bad = check_golden(text)
        total_bad += bad
        print(f"{name}: {cases} cases, {bad} mismatches", file=out)
    return EXIT_OK if total_bad == 0 else EXIT_DIVERGED


# ----------------------------------------------------------------------------
# differential mode
# ----------------------------------------------------------------------------

def same_lists(lazy_paths, naive_paths, rtol: float = 1e-9) -> bool:
    """Compare final lists as multisets of (metric, u); metrics may differ by summation order."""
    if len(lazy_paths) != len(naive_paths):
        return False
    a = sorted((p.pm, tuple(int(b) for b in encode(p.codeword))) for p in lazy_paths)
    b = sorted((float(pm), tuple(int(x) for x in u)) for pm, u in naive_paths)
    return all(ua == ub and math.isclose(pa, pb, rel_tol=rtol, abs_tol=1e-9)
               for (pa, ua), (pb, ub) in zip(a, b))


def run_differential(cfg, trials: int, seed: int, L: int, D: int | None, out=None) -> int:
    out = out or sys.stdout
    from polarstack.listdec import FSSCLDecoder, SCLDecoder
    from polarstack.reference import NaiveFSSCL, NaiveSCL
    from polarstack.sc import FSSCDecoder, SCDecoder
    from polarstack.stack import SCSDecoder, SCSRMDecoder

    sc, fssc = SCDecoder(cfg), FSSCDecoder(cfg, systematic=False)
    scs, scs_rm = SCSDecoder(cfg, L, D), SCSRMDecoder(cfg, L, D)
    naive = cfg.N <= 64
    if naive:
        scl, fsscl = SCLDecoder(cfg, L), FSSCLDecoder(cfg, L, systematic=False)
        nscl, nfsscl = NaiveSCL(cfg, L), NaiveFSSCL(cfg, L, fsscl.schedule)
    rng = np.random.default_rng(seed)
    snrs = (0.0, 1.5, 3.0)
    for t in range(trials):
        ebno = snrs[t % len(snrs)]
        block = attach_crc(rng.integers(0, 2, cfg.payload_len, dtype=np.uint8), cfg)
        llr = modulate_and_transmit(encode(place_on_info_set(block, cfg)), ebno_to_sigma(ebno, cfg.rate), rng)
        if not np.array_equal(sc.decode(llr).u_hat, fssc.decode(llr).u_hat):
            print(f"trial {t}: FSSC differs from SC", file=out)
            return EXIT_DIVERGED
        a, b = scs.decode(llr), scs_rm.decode(llr)
        if not (np.array_equal(a.u_hat, b.u_hat) and a.pm == b.pm and a.iterations == b.iterations):
            print(f"trial {t}: SCS-RM differs from SCS", file=out)
            return EXIT_DIVERGED
        if naive:
            for dec, ref, name in ((scl, nscl, "SCL"), (fsscl, nfsscl, "FSSCL")):
                dec.decode(llr)
                fin = ref.run(llr)
                if not same_lists(dec.last_paths, fin) or not dec.pool.audit():
                    print(f"trial {t}: lazy-copy {name} differs from the full-copy reference", file=out)
                    return EXIT_DIVERGED
    suites = "SC/FSSC, SCS/SCS-RM" + (", lazy/naive list" if naive else "")
    print(f"{trials} trials, no divergence ({suites})", file=out)
    return EXIT_OK


# ----------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.mode == "golden":
            return run_golden()
        cfg = _config(args)
        if args.L < 1 or (args.D is not None and args.D < 1):
            parser.error("--list and --stack must be positive")
        if args.mode == "differential":
            return run_differential(cfg, args.frames, args.seed, args.L, args.D)
        uses_systematic(args.decoder, True if args.systematic else None)
        points = ebno_points(*args.ebno)
        stop = StopRule(args.frames, args.min_errors, min(args.min_frames, args.frames))
        workers = args.workers if args.workers is not None else default_workers()
        if workers < 1:
            parser.error("--workers must be positive")
    except (CodeConfigError, DecoderMismatch, ValueError) as exc:
        parser.error(str(exc))
    L = args.L if args.decoder in LIST_KINDS | STACK_KINDS else 1
    records = run_sweep(cfg, args.decoder, points, stop, workers, L, args.D,
                        True if args.systematic else None, args.seed, args.noiseless)
    text = write_csv(records, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
