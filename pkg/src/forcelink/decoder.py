"""Differential phase decoding via projection onto the switching harmonics.

The switch imprints an artificial modulation tone on the sensor's reflection,
so in slow time each subcarrier's channel estimate carries that tone with the
port's reflection phase.  Projecting each group of snapshots onto a read
frequency isolates one port; conjugate-multiplying consecutive group
projections and averaging across subcarriers yields the group-to-group phase
change with static multipath cancelled exactly when groups hold an integer
number of modulation cycles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .chansim import ChannelTrace, WaveformConfig
from .clocks import ClockScheme
from .transducer import PortPhases

GROUP_SIZE_CAP = 100_000
# steps this close to the wrap boundary are flagged as possible aliases
SLEW_SUSPECT_LIMIT = 0.9 * math.pi
SNR_CAP_DB = 200.0
SNR_FLOOR_DB = 0.0


@dataclass(frozen=True)
class GroupingSpec:
    """How many consecutive snapshots form one phase-estimation group."""

    group_size: int

    def __post_init__(self):
        if self.group_size < 1:
            raise ValueError("group size must be >= 1")


@dataclass(frozen=True)
class NyquistReport:
    ok: bool
    limit_hz: float
    max_read_hz: float


def nyquist_check(config: WaveformConfig, scheme: ClockScheme) -> NyquistReport:
    """Whether the scheme's read tones are observable at the snapshot rate."""
    limit = config.nyquist_hz
    top = max(scheme.read_freqs)
    return NyquistReport(ok=top <= limit, limit_hz=limit, max_read_hz=top)


def auto_group_size(config: WaveformConfig,
                    schemes: Iterable[ClockScheme] | ClockScheme,
                    cap: int = GROUP_SIZE_CAP) -> int:
    """Smallest group size giving an integer cycle count at every read tone.

    Rationalizes T * f for each read frequency and takes the lcm of the
    denominators; errors out if no integral grouping exists below cap.
    """
    if isinstance(schemes, ClockScheme):
        schemes = (schemes,)
    T = config.frame_period_s
    size = 1
    freqs = [f for s in schemes for f in s.read_freqs]
    for f in freqs:
        r = Fraction(T) * Fraction(f)
        r = r.limit_denominator(cap)
        size = math.lcm(size, r.denominator)
        if size > cap:
            raise ValueError(
                f"no integer-cycle group size below {cap} for read tones {freqs}")
    for f in freqs:
        cycles = size * T * f
        if abs(cycles - round(cycles)) > 1e-6:
            raise ValueError(
                f"{f} Hz cannot be grouped integrally (best size {size} gives "
                f"{cycles} cycles)")
    return size


@dataclass(frozen=True)
class PhaseSeries:
    """Decoded per-group phase changes for both ports, plus anchored phases.

    dphi arrays have length n_groups - 1: dphi[g] is the change from group g
    to group g + 1.  phi arrays (length n_groups) appear after anchoring.
    suspect flags mark steps close enough to +-pi to be wrap aliases.
    """

    read_freqs: tuple[float, float]
    group_size: int
    group_duration_s: float
    dphi1: np.ndarray
    dphi2: np.ndarray
    suspect1: np.ndarray
    suspect2: np.ndarray
    phi1: np.ndarray | None = None
    phi2: np.ndarray | None = None

    @property
    def n_groups(self) -> int:
        return len(self.dphi1) + 1

    def group_times(self) -> np.ndarray:
        """Start time of each group, seconds."""
        return np.arange(self.n_groups) * self.group_duration_s


def project_harmonic(trace: ChannelTrace, read_freq: float, group: int,
                     spec: GroupingSpec) -> np.ndarray:
    """Project one group of snapshots onto a read tone, per subcarrier.

    P[k] = (1/N_g) * sum_{n in group} H[k, n] e^{-j 2 pi f n T} with n the
    absolute snapshot index.  With an integer number of tone cycles per group
    any constant-in-n term sums to exactly zero.
    """
    Ng = spec.group_size
    n_groups = trace.config.n_snapshots // Ng
    if not 0 <= group < n_groups:
        raise ValueError(f"group {group} out of range (trace holds {n_groups})")
    n = np.arange(group * Ng, (group + 1) * Ng)
    w = np.exp(-2j * np.pi * read_freq * n * trace.config.frame_period_s)
    return (trace.data[:, group * Ng:(group + 1) * Ng] * w).sum(axis=1) / Ng


def _projection_matrix(trace: ChannelTrace, read_freq: float,
                       spec: GroupingSpec) -> np.ndarray:
    """All groups at once: (K, G) projections."""
    Ng = spec.group_size
    G = trace.config.n_snapshots // Ng
    T = trace.config.frame_period_s
    n = np.arange(G * Ng)
    w = np.exp(-2j * np.pi * read_freq * n * T)
    prod = trace.data[:, :G * Ng] * w
    return prod.reshape(trace.data.shape[0], G, Ng).sum(axis=2) / Ng


def group_phases(trace: ChannelTrace, scheme: ClockScheme | None = None,
                 spec: GroupingSpec | None = None) -> PhaseSeries:
    """Decode both ports' group-to-group phase changes.

    For each consecutive pair of groups, P~[k] = P[k, g+1] conj(P[k, g]) is
    averaged over subcarriers and its angle taken, so subcarriers vote
    coherently and the projection magnitudes drop out of the estimate.
    """
    if scheme is None:
        if not trace.schemes:
            raise ValueError("trace carries no scheme; pass one explicitly")
        scheme = trace.schemes[0]
    if spec is None:
        spec = GroupingSpec(auto_group_size(trace.config, trace.schemes or scheme))
    G = trace.config.n_snapshots // spec.group_size
    if G < 2:
        raise ValueError(
            f"need at least 2 groups, trace holds {G} at size {spec.group_size}")
    f1, f2 = scheme.read_freqs
    out = []
    for f in (f1, f2):
        P = _projection_matrix(trace, f, spec)
        pair = P[:, 1:] * np.conj(P[:, :-1])
        out.append(np.angle(pair.mean(axis=0)))
    dphi1, dphi2 = out
    return PhaseSeries(
        read_freqs=(f1, f2),
        group_size=spec.group_size,
        group_duration_s=spec.group_size * trace.config.frame_period_s,
        dphi1=dphi1, dphi2=dphi2,
        suspect1=np.abs(dphi1) > SLEW_SUSPECT_LIMIT,
        suspect2=np.abs(dphi2) > SLEW_SUSPECT_LIMIT,
    )


def anchor(series: PhaseSeries, no_touch: PortPhases) -> PhaseSeries:
    """Attach absolute phases by accumulating steps from the no-touch phase.

    phi[0] is the known open-line phase; phi[g] = phi[g-1] + dphi[g-1].  Any
    step that truly exceeded +-pi between groups was wrapped by the decoder,
    so anchored phases are exact modulo 2 pi (see suspect flags).
    """
    phi1 = no_touch.phi1 + np.concatenate(([0.0], np.cumsum(series.dphi1)))
    phi2 = no_touch.phi2 + np.concatenate(([0.0], np.cumsum(series.dphi2)))
    return replace(series, phi1=phi1, phi2=phi2)


def _probe_bins(n_win: int, count: int = 97) -> np.ndarray:
    # odd bins of a two-group window: every scheme's sampled gate repeats
    # each group exactly, so its lines land only on even bins
    odd = np.arange(1, n_win, 2)
    if len(odd) <= count:
        return odd
    idx = np.linspace(0, len(odd) - 1, count)
    return odd[np.unique(idx.astype(int))]


def noise_power(trace: ChannelTrace, spec: GroupingSpec) -> float:
    """Per-sample noise power sigma^2 estimated from the trace itself.

    Projects adjacent-group windows onto their odd DFT bins, where no
    integer-cycle clock harmonic of any scheme can land; takes the median
    energy per window pair (robust against a step inside the pair), the
    minimum over pairs (a step-free pair sees pure noise), and unbiases the
    exponential median by ln 2.  With a single group the probe falls back to
    that group's own bins, where residual clock lines can bias it upward.
    """
    Ng = spec.group_size
    G = trace.config.n_snapshots // Ng
    if G < 1:
        raise ValueError("trace shorter than one group")
    rows = trace.data[:min(8, trace.data.shape[0]), :G * Ng]
    if G >= 2:
        n_win = 2 * Ng
        bins = _probe_bins(n_win)
        n = np.arange(n_win)
        probes = np.exp(-2j * np.pi * np.outer(n, bins) / n_win)
        meds = []
        for g in range(G - 1):
            seg = rows[:, g * Ng:(g + 2) * Ng]
            meds.append(float(np.median(np.abs(seg @ probes / n_win) ** 2)))
        per_bin = min(meds)
    else:
        n_win = Ng
        bins = _probe_bins(n_win)
        n = np.arange(n_win)
        probes = np.exp(-2j * np.pi * np.outer(n, bins) / n_win)
        per_bin = float(np.median(np.abs(rows @ probes / n_win) ** 2))
    # median of exponential energies = ln 2 x mean; per-bin mean = sigma^2/n
    return per_bin / math.log(2.0) * n_win


def read_sensor_snr(trace: ChannelTrace, read_freq: float,
                    spec: GroupingSpec) -> float:
    """Estimate the per-sample sensor SNR (dB) from the trace itself.

    Signal energy comes from the per-group projections at the read tone
    (median over groups, so a step mid-group cannot drag it down); the noise
    power comes from noise_power.  The ratio is corrected by the projection
    gain |a_p|^2 so the estimate is comparable to the synthesis-time snr_db,
    then clamped to [0, 200] dB.
    """
    scheme = None
    for s in trace.schemes:
        try:
            s.clock_for_read(read_freq)
            scheme = s
            break
        except ValueError:
            continue
    if scheme is None:
        raise ValueError(f"no scheme in trace reads {read_freq} Hz")
    gain = scheme.projection_gain(read_freq)

    Ng = spec.group_size
    P = _projection_matrix(trace, read_freq, spec)
    sig = float(np.median(np.mean(np.abs(P) ** 2, axis=0)))
    sigma2 = noise_power(trace, spec)

    if sigma2 <= 0.0:
        return SNR_CAP_DB if sig > 0.0 else SNR_FLOOR_DB
    alpha2 = max(sig - sigma2 / Ng, 0.0)
    snr_lin = alpha2 / (gain ** 2 * sigma2)
    if snr_lin <= 0.0:
        return SNR_FLOOR_DB
    return float(min(max(10.0 * math.log10(snr_lin), SNR_FLOOR_DB), SNR_CAP_DB))
