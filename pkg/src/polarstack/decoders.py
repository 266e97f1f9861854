"""Decoder registry used by the harness and the CLI."""

from __future__ import annotations

from polarstack.core import CodeConfig
from polarstack.listdec import FSSCLDecoder, SCLDecoder
from polarstack.sc import FSSCDecoder, SCDecoder
from polarstack.stack import FSSCSRMDecoder, SCSDecoder, SCSRMDecoder

KINDS = ("sc", "fssc", "scl", "fsscl", "scs", "scs-rm", "fsscs-rm")
FAST_KINDS = frozenset({"fssc", "fsscl", "fsscs-rm"})
LIST_KINDS = frozenset({"scl", "fsscl"})
STACK_KINDS = frozenset({"scs", "scs-rm", "fsscs-rm"})


class DecoderMismatch(ValueError):
    """Raised when a decoder kind cannot run with the requested configuration."""


def uses_systematic(kind: str, systematic: bool | None) -> bool:
    """Fast decoders always read the message from the codeword estimate."""
    if kind in FAST_KINDS:
        if systematic is False:
            raise DecoderMismatch(f"{kind} requires systematic encoding")
        return True
    return bool(systematic)


def make_decoder(kind: str, cfg: CodeConfig, L: int = 8, D: int | None = None,
                 systematic: bool | None = None):
    if kind not in KINDS:
        raise DecoderMismatch(f"unknown decoder {kind!r}; choose from {', '.join(KINDS)}")
    sys_ = uses_systematic(kind, systematic)
    if kind == "sc":
        return SCDecoder(cfg, sys_)
    if kind == "fssc":
        return FSSCDecoder(cfg, systematic=sys_)
    if kind == "scl":
        return SCLDecoder(cfg, L, sys_)
    if kind == "fsscl":
        return FSSCLDecoder(cfg, L, systematic=sys_)
    if kind == "scs":
        return SCSDecoder(cfg, L, D, sys_)
    if kind == "scs-rm":
        return SCSRMDecoder(cfg, L, D, sys_)
    return FSSCSRMDecoder(cfg, L, D, systematic=sys_)
