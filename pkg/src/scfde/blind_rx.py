"""Blind SC-FDE receiver: alternating minimization with per-bin MRC,
time-domain recovery, pilot de-rotation, and the two residue corrections.

The decoder factors the frequency-domain receive matrix Yf into a diagonal
data spectrum and a short tap matrix by alternating a ridge-regularized
channel solve with a per-bin MRC update of the spectrum. The factorization
is identifiable only up to one global complex scale, which is resolved
after the IDFT either from the single pilot alone, from the pilot plus a
quadrant-centroid average (QQ), or from the corner-symbol cluster centroid
with the pilot picking among the four quadrant rotations (CA).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation, get_constellation, qam_demodulate
from .errors import ConvergenceError, DegenerateBinError, PilotLossError, ReceiverError
from .frame import FrameConfig
from .matrixkit import dft_first_columns, regularized_ls, top_left_singular_vector

CORRECTION_MODES = ("pilot", "ca", "qq")


@dataclass
class BlindConfig:
    """Knobs of the alternating-minimization decoder.

    L_est is the assumed tap count (performance degrades only when it drops
    below the true channel length). The ridge weight mu stabilizes the
    channel solve and must stay in (0, 1); eps is the relative-residual
    stopping tolerance and max_iter the iteration cap.
    """

    L_est: int
    mu: float = 0.5
    eps: float = 1e-4
    max_iter: int = 100

    def __post_init__(self):
        if self.L_est < 1:
            raise ValueError(f"L_est must be >= 1, got {self.L_est}")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class ReceiverEstimate:
    """Output of the alternating minimization.

    lambda_hat: length-P diagonal of the estimated data spectrum.
    H_t_hat: L_est x Nr tap estimate; H_n_hat = F_{L_est} @ H_t_hat per bin.
    residual_trace: relative residual ||Yf - diag(lambda) F H_t||_F / ||Yf||_F
    after each iteration; converged marks whether the eps target was met
    before the iteration cap.
    """

    lambda_hat: np.ndarray = field(repr=False)
    H_t_hat: np.ndarray = field(repr=False)
    H_n_hat: np.ndarray = field(repr=False)
    iterations: int
    residual_trace: np.ndarray = field(repr=False)
    converged: bool


@dataclass
class TimeEstimate:
    """Time-domain symbol estimate and the scale that was removed from it.

    x_corrected = x_hat / alpha_hat holds elementwise by construction.
    """

    x_hat: np.ndarray = field(repr=False)
    alpha_hat: complex
    x_corrected: np.ndarray = field(repr=False)


def mrc_combine(Yf: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Per-bin maximal ratio combining of the antenna columns.

    Returns lambda[p] = sum_r Yf[p,r] conj(H[p,r]) / sum_r |H[p,r]|^2, the
    per-bin least-squares fit of a diagonal spectrum given the channel H.
    Raises DegenerateBinError at the first bin whose denominator is zero.
    """
    num = np.einsum("pr,pr->p", Yf, H.conj())
    den = np.einsum("pr,pr->p", H, H.conj()).real
    dead = np.flatnonzero(den == 0.0)
    if dead.size:
        raise DegenerateBinError(int(dead[0]))
    return num / den


def alternating_minimization(Yf: np.ndarray, cfg: BlindConfig) -> ReceiverEstimate:
    """Jointly estimate the data spectrum and channel taps from Yf.

    Initializes the spectrum with the dominant left singular vector of Yf,
    then alternates (a) the ridge channel solve given the spectrum with
    (b) the per-bin MRC spectrum update given the channel, stopping when the
    relative reconstruction residual drops below cfg.eps or at cfg.max_iter.

    The loop keeps its working set in P x L arrays (two streaming passes
    over Yf per iteration): with G = Yf @ H_t^H the MRC numerator is
    sum_l conj(F)*G per bin, the denominator is the diagonal of
    F (H_t H_t^H) F^H, and the post-update residual follows from MRC
    optimality, ||Yf - diag(lam) F H_t||^2 = ||Yf||^2 - sum_p |num_p|^2/den_p.
    The per-bin channel F @ H_t is materialized once on return.

    An initializer that stops early on a near-tied spectrum is accepted
    as-is: the starting point only has to avoid the orthogonal complement
    of the dominant subspace, not certify it.
    """
    Yf = np.asarray(Yf, dtype=complex)
    P, Nr = Yf.shape
    if P <= 2 * cfg.L_est:
        raise ValueError(f"need P > 2*L_est, got P={P}, L_est={cfg.L_est}")
    if Nr < 1:
        raise ValueError("at least one antenna column required")

    F_L = dft_first_columns(P, cfg.L_est)
    F_conj = F_L.conj()
    energy = float(np.linalg.norm(Yf) ** 2)
    try:
        lam = top_left_singular_vector(Yf)
    except ConvergenceError as err:
        lam = err.estimate

    trace = []
    converged = False
    H_t = np.zeros((cfg.L_est, Nr), dtype=complex)
    for _ in range(cfg.max_iter):
        A = lam[:, None] * F_L
        H_t = regularized_ls(A, Yf, cfg.mu)
        G = Yf @ H_t.conj().T
        num = np.einsum("pl,pl->p", G, F_conj)
        den = np.einsum("pl,pl->p", F_L @ (H_t @ H_t.conj().T), F_conj).real
        dead = np.flatnonzero(den == 0.0)
        if dead.size:
            raise DegenerateBinError(int(dead[0]))
        lam = num / den
        fit = float(np.sum(np.abs(num) ** 2 / den))
        residual = np.sqrt(max(energy - fit, 0.0) / energy)
        trace.append(residual)
        if residual < cfg.eps:
            converged = True
            break

    return ReceiverEstimate(
        lambda_hat=lam,
        H_t_hat=H_t,
        H_n_hat=F_L @ H_t,
        iterations=len(trace),
        residual_trace=np.asarray(trace),
        converged=converged,
    )


def to_time_domain(lambda_hat: np.ndarray) -> np.ndarray:
    """Inverse unitary DFT of the spectrum diagonal; equals sqrt(P) times
    the transmitted frame up to the global complex scale."""
    lam = np.asarray(lambda_hat, dtype=complex).ravel()
    return np.fft.ifft(lam) * np.sqrt(lam.size)


def pilot_derotate(x_hat: np.ndarray, cfg: FrameConfig) -> tuple[complex, np.ndarray]:
    """Resolve the global scale from the pilot sample.

    alpha_hat = x_hat[l_p] / pilot_value; returns (alpha_hat, x_hat / alpha_hat),
    so the de-rotated pilot equals the known pilot value exactly. Raises
    PilotLossError if the pilot sample was annihilated.
    """
    x_hat = np.asarray(x_hat, dtype=complex).ravel()
    sample = x_hat[cfg.pilot_index]
    if sample == 0:
        raise PilotLossError("pilot sample is zero; global scale unresolvable")
    alpha = complex(sample / cfg.pilot_value)
    return alpha, x_hat / alpha


def _ca_alpha(x_hat: np.ndarray, cfg: FrameConfig, const: Constellation) -> complex:
    """Total scale removed by the centroids adjustment (see centroids_adjust)."""
    data = x_hat[cfg.data_indices]
    k_max = int(np.argmax(np.abs(data)))
    if data[k_max] == 0:
        raise PilotLossError("all data samples are zero; scale unresolvable")
    corner1 = const.corner(1)
    alpha_mid = data[k_max] / corner1
    data_mid = data / alpha_mid

    # the scaled max sample is the corner symbol by construction
    _, hard = qam_demodulate(data_mid, const.order)
    members = np.flatnonzero(hard == corner1)
    if members.size == 0:  # unreachable in exact arithmetic; keep a sane fallback
        warnings.warn("no sample demodulated to the corner; using the max sample")
        members = np.array([k_max])
    centroid = np.mean(data_mid[members])

    pilot_mid = x_hat[cfg.pilot_index] / alpha_mid
    best_q = min(
        range(1, 5),
        key=lambda q: abs(pilot_mid / (centroid / const.corner(q)) - cfg.pilot_value) ** 2,
    )
    return complex(alpha_mid * centroid / const.corner(best_q))


def centroids_adjust(
    x_hat: np.ndarray, cfg: FrameConfig, const: Constellation | None = None
) -> np.ndarray:
    """Scaling correction from the corner-symbol cluster centroid.

    Operates on the raw (pre-de-rotation) time estimate: the maximum-modulus
    data sample pins a provisional scale, the centroid of all samples decided
    as the quadrant-1 corner refines it, and the pilot position selects which
    of the four pi/2 rotations of that centroid scale is the true one.
    """
    if const is None:
        const = get_constellation(cfg.M)
    x_hat = np.asarray(x_hat, dtype=complex).ravel()
    return x_hat / _ca_alpha(x_hat, cfg, const)


def _qq_alpha(x_derot: np.ndarray, cfg: FrameConfig, const: Constellation) -> complex:
    """Residue estimate from per-quadrant centroid offsets (see qq_correct)."""
    data = x_derot[cfg.data_indices]
    data = data[data != 0]  # exact zeros carry no quadrant information
    ratios = []
    for q in (1, 2, 3, 4):
        members = data[const.quadrant_of(data) == q]
        if members.size:
            ratios.append(np.mean(members) / const.quadrant_centroid(q))
    if not ratios:
        warnings.warn("no nonzero data samples; residue left uncorrected")
        return 1.0 + 0.0j
    return complex(np.mean(ratios))


def qq_correct(
    x_derot: np.ndarray, cfg: FrameConfig, const: Constellation | None = None
) -> np.ndarray:
    """Rotational-residue correction after pilot de-rotation.

    Collapses the data samples quadrant-wise onto the alphabet's quadrant
    centroids: each quadrant's sample mean over its ideal centroid estimates
    the leftover complex scale, and the average over (non-empty) quadrants
    is divided out.
    """
    if const is None:
        const = get_constellation(cfg.M)
    x_derot = np.asarray(x_derot, dtype=complex).ravel()
    return x_derot / _qq_alpha(x_derot, cfg, const)


@dataclass
class BlindDecodeResult:
    """Shared factorization plus the per-mode corrected time estimates.

    A correction stage that fails on its own (e.g. an annihilated pilot)
    lands in ``failures`` instead of taking the other modes down with it.
    """

    estimate: ReceiverEstimate
    corrections: dict[str, TimeEstimate]
    failures: dict[str, ReceiverError]


def decode_frame(
    Yf: np.ndarray,
    frame_cfg: FrameConfig,
    cfg: BlindConfig,
    modes=CORRECTION_MODES,
) -> BlindDecodeResult:
    """Run the blind factorization once and apply the requested corrections.

    Each mode yields a TimeEstimate whose x_corrected is x_hat divided by a
    single overall alpha: the pilot ratio ("pilot"), the pilot ratio times
    the quadrant-residue estimate ("qq"), or the centroid scale ("ca").
    """
    unknown = set(modes) - set(CORRECTION_MODES)
    if unknown:
        raise ValueError(f"unknown correction modes: {sorted(unknown)}")
    const = get_constellation(frame_cfg.M)
    est = alternating_minimization(Yf, cfg)
    x_hat = to_time_domain(est.lambda_hat)

    corrections: dict[str, TimeEstimate] = {}
    failures: dict[str, ReceiverError] = {}
    for mode in modes:
        try:
            if mode == "ca":
                alpha = _ca_alpha(x_hat, frame_cfg, const)
            else:
                alpha_pilot, x_derot = pilot_derotate(x_hat, frame_cfg)
                alpha = alpha_pilot
                if mode == "qq":
                    alpha = alpha_pilot * _qq_alpha(x_derot, frame_cfg, const)
        except ReceiverError as err:
            failures[mode] = err
            continue
        corrections[mode] = TimeEstimate(
            x_hat=x_hat, alpha_hat=alpha, x_corrected=x_hat / alpha
        )
    return BlindDecodeResult(estimate=est, corrections=corrections, failures=failures)
