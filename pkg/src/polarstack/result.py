"""Common decoder output record."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class DecodeResult:
    """Outcome of one decode.

    ``message`` is the K-bit block carried on the information set (payload plus CRC).
    ``u_hat`` and ``codeword`` are the two views of the selected estimate.
    """

    u_hat: np.ndarray
    codeword: np.ndarray
    message: np.ndarray
    crc_failed: bool = False
    pm: float = 0.0
    iterations: int = 0
    path_switches: int = 0
    stack_peak: int = 0

    @property
    def stats(self) -> dict:
        return {
            "iterations": self.iterations,
            "path_switches": self.path_switches,
            "stack_peak_occupancy": self.stack_peak,
            "crc_failed": self.crc_failed,
        }
