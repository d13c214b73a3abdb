"""Pilot-based MRC-OFDM comparison receiver.

Transmits data on P subcarriers with a fixed fraction of equidistant pilot
tones, estimates the channel per antenna by least squares at the pilot bins,
interpolates to all bins through the tap domain (inverse DFT of the pilot
estimates, truncate to L_trunc taps, forward DFT to P bins), and combines
antennas with per-bin MRC before hard demodulation.

The tap-domain interpolation is exact (noise aside) when the pilot count
divides P, so the pilot grid is strictly uniform; otherwise the grid is the
nearest-integer rounding of the ideal uniform grid and the interpolation
carries a small model error. Propagation reuses the package's circular
channel model, which stands in for CP-OFDM with a sufficient prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blind_rx import mrc_combine
from .constellation import get_constellation, qam_demodulate, qam_modulate


@dataclass(frozen=True)
class OfdmPilotConfig:
    """Subcarrier plan: P bins, ceil(pilot_fraction * P) pilot tones on a
    (near-)uniform grid, and L_trunc taps kept by the interpolator."""

    P: int
    M: int
    L_trunc: int
    pilot_fraction: float = 0.10

    def __post_init__(self):
        if not 0 < self.pilot_fraction <= 1:
            raise ValueError(f"pilot fraction must be in (0, 1], got {self.pilot_fraction}")
        if self.n_pilots < self.L_trunc:
            raise ValueError(
                f"{self.n_pilots} pilots cannot resolve {self.L_trunc} taps"
            )

    @property
    def n_pilots(self) -> int:
        return int(np.ceil(self.pilot_fraction * self.P))

    @property
    def pilot_indices(self) -> np.ndarray:
        idx = np.round(np.arange(self.n_pilots) * self.P / self.n_pilots).astype(int)
        idx.flags.writeable = False
        return idx

    @property
    def data_indices(self) -> np.ndarray:
        mask = np.ones(self.P, dtype=bool)
        mask[self.pilot_indices] = False
        idx = np.flatnonzero(mask)
        idx.flags.writeable = False
        return idx

    @property
    def pilot_symbol(self) -> complex:
        """Known tone on every pilot subcarrier (the corner symbol)."""
        return get_constellation(self.M).corner(1)

    @property
    def payload_bits(self) -> int:
        return (self.P - self.n_pilots) * get_constellation(self.M).bits_per_symbol


def ofdm_transmit(bits: np.ndarray, cfg: OfdmPilotConfig) -> np.ndarray:
    """Frequency-domain symbol vector: pilots on the pilot grid, modulated
    payload on the remaining bins."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size != cfg.payload_bits:
        raise ValueError(f"payload is {bits.size} bits, grid needs {cfg.payload_bits}")
    Xf = np.empty(cfg.P, dtype=complex)
    Xf[cfg.pilot_indices] = cfg.pilot_symbol
    Xf[cfg.data_indices] = qam_modulate(bits, cfg.M)
    return Xf


def ofdm_time_signal(Xf: np.ndarray) -> np.ndarray:
    """Transmitted time-domain block: inverse unitary DFT of the symbols."""
    Xf = np.asarray(Xf, dtype=complex).ravel()
    return np.fft.ifft(Xf) * np.sqrt(Xf.size)


def estimate_channel(Yf: np.ndarray, cfg: OfdmPilotConfig) -> np.ndarray:
    """Per-bin channel estimate from the pilot tones, per antenna.

    LS at the pilot bins, then tap-domain interpolation: the inverse DFT of
    the pilot-grid estimates is truncated to L_trunc taps, zero-padded, and
    transformed back to all P bins.
    """
    Yf = np.asarray(Yf, dtype=complex)
    pilots = Yf[cfg.pilot_indices, :] / cfg.pilot_symbol
    taps = np.fft.ifft(pilots, axis=0)[: cfg.L_trunc, :]
    return np.fft.fft(taps, n=cfg.P, axis=0)


def ofdm_mrc_receive(
    Yf: np.ndarray, cfg: OfdmPilotConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Decode one OFDM block: returns (payload bit decisions, P x Nr channel
    estimate). Raises DegenerateBinError if MRC hits an all-zero bin."""
    H_est = estimate_channel(Yf, cfg)
    X_hat = mrc_combine(Yf, H_est)
    bits, _ = qam_demodulate(X_hat[cfg.data_indices], cfg.M)
    return bits, H_est
