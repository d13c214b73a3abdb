"""Monte-Carlo experiment driver: seeded trials, SNR sweeps, residual
traces, and CSV persistence.

Every trial derives its own random substream from (seed, P, snr, trial
index), so results are a pure function of the configuration no matter how
trials are scheduled across workers. Within a trial, the payloads, channel
and noise are always drawn in the same order regardless of which receivers
are enabled; the three blind variants share one factorization on literally
the same received samples, and the OFDM baseline sees the same channel and
noise realization applied to its own transmit block.

Frames on which a receiver raises (degenerate MRC bin, annihilated pilot,
initializer breakdown) are excluded from the error counts and reported in
the ``frames_failed`` column instead of being silently mixed in.
"""

from __future__ import annotations

import io
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .baseline_rx import OfdmPilotConfig, ofdm_mrc_receive, ofdm_time_signal, ofdm_transmit
from .blind_rx import BlindConfig, alternating_minimization, decode_frame
from .channel import (
    PowerDelayProfile,
    complex_noise,
    convolve_channel,
    draw_channel,
    snr_db_to_noise_variance,
)
from .errors import ReceiverError
from .frame import FrameConfig, build_frame, extract_data
from .constellation import qam_demodulate
from .matrixkit import DftOperator

RECEIVERS = ("blind_pilot", "blind_ca", "blind_qq", "mrc_ofdm")
_BLIND_MODE = {"blind_pilot": "pilot", "blind_ca": "ca", "blind_qq": "qq"}

CSV_HEADER = (
    "snr_db,receiver,P,Nr,L,L_est,M,frames,frames_failed,"
    "bits_total,bit_errors,ber,mean_iterations,mean_final_residual"
)
DUMP_HEADER = "P,snr_db,trial,receiver,failed,bits,bit_errors,iterations,final_residual"


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of one experiment; the CSV is a function of this."""

    seq_lengths: tuple = (256,)
    L: int = 4
    L_est: int = 4
    Nr: int = 16
    M: int = 64
    snr_db_list: tuple = (4.0, 8.0, 12.0)
    frames_per_point: int = 10
    seed: int = 0
    receivers: tuple = RECEIVERS
    mu: float = 0.5
    eps: float = 1e-4
    max_iter: int = 100
    pdp_ratio: float = 0.5
    pilot_fraction: float = 0.10
    ofdm_taps: int | None = None
    workers: int = 1
    out_path: str | None = None
    dump_path: str | None = None

    def __post_init__(self):
        for P in self.seq_lengths:
            if P < 2 or P & (P - 1):
                raise ValueError(f"sequence length {P} is not a power of two")
        if self.frames_per_point < 1:
            raise ValueError("frames_per_point must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        bad = set(self.receivers) - set(RECEIVERS)
        if bad:
            raise ValueError(f"unknown receivers: {sorted(bad)}; valid: {RECEIVERS}")
        if not self.receivers:
            raise ValueError("at least one receiver must be selected")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def blind_config(self) -> BlindConfig:
        return BlindConfig(L_est=self.L_est, mu=self.mu, eps=self.eps, max_iter=self.max_iter)

    def ofdm_config(self, P: int) -> OfdmPilotConfig:
        """Baseline plan for one sequence length. Unless ofdm_taps is set the
        interpolator keeps all pilot taps (classic parameter-free FFT
        interpolation, no channel-length side information)."""
        n_pilots = int(np.ceil(self.pilot_fraction * P))
        L_trunc = self.ofdm_taps if self.ofdm_taps is not None else n_pilots
        return OfdmPilotConfig(
            P=P, M=self.M, L_trunc=L_trunc, pilot_fraction=self.pilot_fraction
        )

    def selected(self) -> tuple:
        """Selected receivers in canonical order."""
        return tuple(r for r in RECEIVERS if r in self.receivers)


PRESETS = {
    # headline BER comparison operating point
    "fig5": dict(seq_lengths=(1024,), Nr=64, L=9, L_est=9, M=64),
    # sequence-length study for the residual decay
    "fig7": dict(seq_lengths=(256, 512, 1024), Nr=64, L=5, L_est=5, M=64),
}


@dataclass
class ReceiverTrial:
    """One receiver's outcome on one frame."""

    bits: int = 0
    errors: int = 0
    iterations: int | None = None
    final_residual: float | None = None
    failed: bool = False
    failure: str = ""


@dataclass
class TrialRecord:
    P: int
    snr_db: float
    trial_index: int
    results: dict = field(default_factory=dict)


@dataclass
class BerPoint:
    """Aggregated error counts for one (P, snr, receiver) cell."""

    snr_db: float
    receiver: str
    P: int
    Nr: int
    L: int
    L_est: int
    M: int
    frames: int
    frames_failed: int
    bits_total: int
    bit_errors: int
    ber: float
    mean_iterations: float
    mean_final_residual: float


def _substream(seed: int, P: int, snr_db: float, trial_index: int) -> np.random.Generator:
    snr_key = int(round(snr_db * 1000.0)) & 0xFFFFFFFF
    return np.random.default_rng(np.random.SeedSequence([seed, P, snr_key, trial_index]))


def run_trial(cfg: SimulationConfig, snr_db: float, trial_index: int, P: int | None = None) -> TrialRecord:
    """One frame end to end for every selected receiver.

    Deterministic in (cfg.seed, P, snr_db, trial_index). The draw order is
    fixed (blind payload, OFDM payload, channel, noise) independent of the
    receiver selection, so enabling extra receivers never changes results.
    """
    if P is None:
        P = cfg.seq_lengths[0]
    rng = _substream(cfg.seed, P, snr_db, trial_index)
    noise_var = snr_db_to_noise_variance(snr_db)

    frame_cfg = FrameConfig(P=P, L=cfg.L, M=cfg.M)
    payload = rng.integers(0, 2, size=frame_cfg.payload_bits)
    ofdm_cfg = cfg.ofdm_config(P)
    ofdm_payload = rng.integers(0, 2, size=ofdm_cfg.payload_bits)
    ch = draw_channel(PowerDelayProfile.geometric(cfg.L, cfg.pdp_ratio), cfg.Nr, rng)
    noise = complex_noise((P, cfg.Nr), noise_var, rng)

    record = TrialRecord(P=P, snr_db=snr_db, trial_index=trial_index)
    selected = cfg.selected()
    dft = DftOperator(P)

    blind_selected = [r for r in selected if r != "mrc_ofdm"]
    if blind_selected:
        frame = build_frame(frame_cfg, payload)
        Y = convolve_channel(frame.time_symbols, ch) + noise
        modes = tuple(_BLIND_MODE[r] for r in blind_selected)
        try:
            decoded = decode_frame(dft.forward(Y), frame_cfg, cfg.blind_config(), modes)
        except ReceiverError as err:
            for name in blind_selected:
                record.results[name] = ReceiverTrial(failed=True, failure=str(err))
        else:
            est = decoded.estimate
            for name in blind_selected:
                mode = _BLIND_MODE[name]
                if mode in decoded.failures:
                    record.results[name] = ReceiverTrial(
                        failed=True, failure=str(decoded.failures[mode])
                    )
                    continue
                x_corr = decoded.corrections[mode].x_corrected
                bits, _ = qam_demodulate(extract_data(frame_cfg, x_corr), cfg.M)
                record.results[name] = ReceiverTrial(
                    bits=payload.size,
                    errors=int(np.count_nonzero(bits != payload)),
                    iterations=est.iterations,
                    final_residual=float(est.residual_trace[-1]),
                )

    if "mrc_ofdm" in selected:
        x_time = ofdm_time_signal(ofdm_transmit(ofdm_payload, ofdm_cfg))
        Y = convolve_channel(x_time, ch) + noise
        try:
            bits, _ = ofdm_mrc_receive(dft.forward(Y), ofdm_cfg)
            record.results["mrc_ofdm"] = ReceiverTrial(
                bits=ofdm_payload.size,
                errors=int(np.count_nonzero(bits != ofdm_payload)),
            )
        except ReceiverError as err:
            record.results["mrc_ofdm"] = ReceiverTrial(failed=True, failure=str(err))

    return record


def _trial_task(args):
    cfg, snr_db, trial_index, P = args
    return run_trial(cfg, snr_db, trial_index, P)


def _run_point(cfg: SimulationConfig, P: int, snr_db: float, pool) -> list[TrialRecord]:
    tasks = [(cfg, snr_db, i, P) for i in range(cfg.frames_per_point)]
    if pool is None:
        records = [_trial_task(t) for t in tasks]
    else:
        records = list(pool.map(_trial_task, tasks, chunksize=1))
    records.sort(key=lambda r: r.trial_index)
    return records


def aggregate(cfg: SimulationConfig, P: int, snr_db: float, records: list[TrialRecord]) -> list[BerPoint]:
    """Reduce trial records to one BerPoint per receiver (canonical order,
    trial-index order inside each mean, so results are scheduler-independent)."""
    points = []
    for name in cfg.selected():
        trials = [r.results[name] for r in records]
        ok = [t for t in trials if not t.failed]
        bits = sum(t.bits for t in ok)
        errors = sum(t.errors for t in ok)
        iters = [t.iterations for t in ok if t.iterations is not None]
        residuals = [t.final_residual for t in ok if t.final_residual is not None]
        points.append(
            BerPoint(
                snr_db=snr_db,
                receiver=name,
                P=P,
                Nr=cfg.Nr,
                L=cfg.L,
                L_est=cfg.L_est,
                M=cfg.M,
                frames=len(trials),
                frames_failed=len(trials) - len(ok),
                bits_total=bits,
                bit_errors=errors,
                ber=(errors / bits) if bits else float("nan"),
                mean_iterations=(sum(iters) / len(iters)) if iters else float("nan"),
                mean_final_residual=(sum(residuals) / len(residuals)) if residuals else float("nan"),
            )
        )
    return points


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


# scheduling and output destinations cannot change the numbers, so they are
# left out of the echo to keep the CSV bytes a function of the results alone
_ECHO_SKIP = ("workers", "out_path", "dump_path")


def _config_echo(cfg: SimulationConfig) -> list[str]:
    lines = [f"# scfde {__version__}"]
    for f in fields(cfg):
        if f.name in _ECHO_SKIP:
            continue
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(_fmt(v) for v in value)
        lines.append(f"# {f.name} = {_fmt(value)}")
    return lines


def check_ber_monotonicity(points: list[BerPoint], step_db: float = 6.0) -> list[str]:
    """Advisory check: flags receivers whose BER rises over a +step_db move.

    The trend is statistical, so violations produce warning strings rather
    than failures; returns the list of messages (also emitted via warnings).
    """
    messages = []
    by_rx: dict = {}
    for pt in points:
        by_rx.setdefault((pt.receiver, pt.P), []).append(pt)
    for (rx, P), pts in by_rx.items():
        pts = sorted(pts, key=lambda p: p.snr_db)
        for lo in pts:
            for hi in pts:
                if hi.snr_db >= lo.snr_db + step_db and hi.ber > lo.ber:
                    messages.append(
                        f"{rx} P={P}: BER {hi.ber:.3g} at {hi.snr_db} dB exceeds "
                        f"{lo.ber:.3g} at {lo.snr_db} dB"
                    )
    for msg in messages:
        warnings.warn(msg)
    return messages


def sweep(cfg: SimulationConfig) -> list[BerPoint]:
    """BER sweep over every (P, snr) cell; writes CSV/dump when paths are set.

    Trials may run on a process pool (cfg.workers > 1); aggregation is
    order-independent so the output bytes never depend on the worker count.
    """
    points: list[BerPoint] = []
    dump_rows: list[str] = []
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for P in cfg.seq_lengths:
            for snr_db in cfg.snr_db_list:
                records = _run_point(cfg, P, snr_db, pool)
                points.extend(aggregate(cfg, P, snr_db, records))
                if cfg.dump_path is not None:
                    for rec in records:
                        for name in cfg.selected():
                            t = rec.results[name]
                            dump_rows.append(
                                ",".join(
                                    _fmt(v)
                                    for v in (
                                        P,
                                        snr_db,
                                        rec.trial_index,
                                        name,
                                        int(t.failed),
                                        t.bits,
                                        t.errors,
                                        t.iterations if t.iterations is not None else float("nan"),
                                        t.final_residual if t.final_residual is not None else float("nan"),
                                    )
                                )
                            )
    finally:
        if pool is not None:
            pool.shutdown()

    check_ber_monotonicity(points)
    if cfg.out_path is not None:
        write_csv(cfg, points, cfg.out_path)
    if cfg.dump_path is not None:
        with open(cfg.dump_path, "w", newline="") as fh:
            fh.write("\n".join([DUMP_HEADER, *dump_rows]) + "\n")
    return points


def render_csv(cfg: SimulationConfig, points: list[BerPoint]) -> str:
    buf = io.StringIO()
    buf.write("\n".join(_config_echo(cfg)) + "\n")
    buf.write(CSV_HEADER + "\n")
    for pt in points:
        row = (
            pt.snr_db, pt.receiver, pt.P, pt.Nr, pt.L, pt.L_est, pt.M,
            pt.frames, pt.frames_failed, pt.bits_total, pt.bit_errors,
            pt.ber, pt.mean_iterations, pt.mean_final_residual,
        )
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_csv(cfg: SimulationConfig, points: list[BerPoint], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(render_csv(cfg, points))


# -- residual traces ---------------------------------------------------------


@dataclass
class ResidualTrace:
    """Per-iteration normalized reconstruction error, averaged over frames."""

    P: int
    snr_db: float
    errors: np.ndarray = field(repr=False)


def trace_trial(cfg: SimulationConfig, P: int, snr_db: float, trial_index: int) -> np.ndarray:
    """Residual trace of the blind factorization on one frame (shares the
    substream, hence the exact channel/noise draws, with run_trial)."""
    rng = _substream(cfg.seed, P, snr_db, trial_index)
    noise_var = snr_db_to_noise_variance(snr_db)
    frame_cfg = FrameConfig(P=P, L=cfg.L, M=cfg.M)
    payload = rng.integers(0, 2, size=frame_cfg.payload_bits)
    rng.integers(0, 2, size=cfg.ofdm_config(P).payload_bits)
    ch = draw_channel(PowerDelayProfile.geometric(cfg.L, cfg.pdp_ratio), cfg.Nr, rng)
    noise = complex_noise((P, cfg.Nr), noise_var, rng)

    frame = build_frame(frame_cfg, payload)
    Y = convolve_channel(frame.time_symbols, ch) + noise
    est = alternating_minimization(DftOperator(P).forward(Y), cfg.blind_config())
    return est.residual_trace


def _trace_task(args):
    return trace_trial(*args)


def residual_trace(cfg: SimulationConfig, snr_db: float) -> list[ResidualTrace]:
    """Mean per-iteration normalized error for each configured sequence
    length. Frames that stop early hold their final value in the average."""
    traces: list[ResidualTrace] = []
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for P in cfg.seq_lengths:
            tasks = [(cfg, P, snr_db, i) for i in range(cfg.frames_per_point)]
            if pool is None:
                runs = [_trace_task(t) for t in tasks]
            else:
                runs = list(pool.map(_trace_task, tasks, chunksize=1))
            depth = max(len(r) for r in runs)
            padded = np.vstack([
                np.concatenate([r, np.full(depth - len(r), r[-1])]) for r in runs
            ])
            traces.append(ResidualTrace(P=P, snr_db=snr_db, errors=padded.mean(axis=0)))
    finally:
        if pool is not None:
            pool.shutdown()
    return traces


TRACE_HEADER = "P,snr_db,iteration,normalized_error"


def render_trace_csv(cfg: SimulationConfig, traces: list[ResidualTrace]) -> str:
    buf = io.StringIO()
    buf.write("\n".join(_config_echo(cfg)) + "\n")
    buf.write(TRACE_HEADER + "\n")
    for tr in traces:
        for i, err in enumerate(tr.errors, start=1):
            buf.write(",".join(_fmt(v) for v in (tr.P, tr.snr_db, i, float(err))) + "\n")
    return buf.getvalue()
