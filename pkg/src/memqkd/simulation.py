"""Seeded Monte Carlo pipeline for the memory-assisted link.

Pulse by pulse: a weak coherent pulse is emitted in one of four polarizations,
crosses a turbulent free-space channel, enters a dual-rail vapor memory that
either leaks, stores-and-retrieves, or loses each photon, and is measured in a
randomly chosen basis by a four-detector receiver. Sifting keeps matched-basis
pulses with at least one click inside the retrieval ROI and tallies per-basis
error rates.

Every pulse owns a random stream derived from (seed, pulse_index), so any
partition of the pulse range across workers reproduces the single-worker run
bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .keyrate import SbrEstimate
from .qubits import (
    BASIS_MEMBERS,
    POLARIZATION_CYCLE,
    Basis,
    Polarization,
    basis_of,
    bit_of,
    detection_probability,
)

#: Stream tag for the tie-break generator; pulse streams use tags < 2**64.
_TIE_STREAM_TAG = 2**64


class SourceMode(Enum):
    ORDERED = "ordered"
    RANDOM = "random"


class DoubleClickPolicy(Enum):
    """How a sifted pulse with equal counts on both detectors is resolved."""

    RANDOM = "random"
    DISCARD = "discard"


@dataclass(frozen=True)
class SourceConfig:
    """Pulsed four-state source.

    Ordered mode cycles H,V,D,A (one cycle per 4 * pulse_period_ns); random
    mode draws each state uniformly from the four. mu_alice is the mean
    photon number per pulse leaving the source.
    """

    pulse_width_ns: float = 400.0
    pulse_period_ns: float = 40_000.0
    mode: SourceMode = SourceMode.RANDOM
    mu_alice: float = 1.6 / 0.59  # 1.6 at the memory input through the default channel
    n_pulses: int = 10_000

    def __post_init__(self) -> None:
        if not self.pulse_width_ns > 0:
            raise ValueError(f"pulse_width_ns must be positive, got {self.pulse_width_ns}")
        if not self.pulse_width_ns < self.pulse_period_ns:
            raise ValueError(
                f"pulse_width_ns ({self.pulse_width_ns}) must be smaller than "
                f"pulse_period_ns ({self.pulse_period_ns})"
            )
        if not self.mu_alice > 0:
            raise ValueError(f"mu_alice must be positive, got {self.mu_alice}")
        if self.n_pulses < 0:
            raise ValueError(f"n_pulses must be nonnegative, got {self.n_pulses}")


@dataclass(frozen=True)
class ChannelConfig:
    """Free-space channel: fixed transmission plus turbulent gain fluctuations.

    rel_fluctuation is the shot-by-shot relative standard deviation of the
    multiplicative gain (mean 1, truncated at 0).
    """

    transmission: float = 0.59
    rel_fluctuation: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 < self.transmission <= 1.0:
            raise ValueError(f"transmission must lie in (0, 1], got {self.transmission}")
        if self.rel_fluctuation < 0:
            raise ValueError(
                f"rel_fluctuation must be nonnegative, got {self.rel_fluctuation}"
            )


@dataclass(frozen=True)
class MemoryConfig:
    """Phenomenological dual-rail memory.

    Each arriving photon independently leaks straight through (leak_fraction),
    is stored and retrieved into the ROI (retrieval_efficiency), or is lost.
    background_mean is the unpolarized background count expected per ROI per
    pulse; noise_suppression scales it down in suppressed-noise operation.
    """

    retrieval_efficiency: float = 0.12
    leak_fraction: float = 0.35
    background_mean: float = 0.12 * 1.6 / 3.2017  # single-photon-level calibration
    retrieval_delay_ns: float = 1000.0
    roi_width_ns: float = 100.0
    noise_suppression: float = 1.0

    def __post_init__(self) -> None:
        for name in ("retrieval_efficiency", "leak_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.retrieval_efficiency + self.leak_fraction > 1.0:
            raise ValueError(
                "retrieval_efficiency + leak_fraction must not exceed 1, got "
                f"{self.retrieval_efficiency} + {self.leak_fraction}"
            )
        if self.background_mean < 0:
            raise ValueError(
                f"background_mean must be nonnegative, got {self.background_mean}"
            )
        if not 0.0 <= self.noise_suppression <= 1.0:
            raise ValueError(
                f"noise_suppression must lie in [0, 1], got {self.noise_suppression}"
            )
        if not self.retrieval_delay_ns >= 0:
            raise ValueError(
                f"retrieval_delay_ns must be nonnegative, got {self.retrieval_delay_ns}"
            )
        if not self.roi_width_ns > 0:
            raise ValueError(f"roi_width_ns must be positive, got {self.roi_width_ns}")

    @property
    def effective_background(self) -> float:
        """Background mean per ROI after noise suppression."""
        return self.background_mean * self.noise_suppression


@dataclass(frozen=True)
class AnalysisConfig:
    """Per-pulse record window, histogram binning, and SBR regions.

    roi_center_ns defaults to the retrieval peak (memory retrieval delay)
    when left as None. The background region feeds the histogram SBR
    estimate and must sit inside the record window.
    """

    bin_width_ns: float = 10.0
    window_start_ns: float = 0.0
    window_end_ns: float = 2000.0
    roi_center_ns: float | None = None
    background_start_ns: float = 1200.0
    background_end_ns: float = 2000.0

    def __post_init__(self) -> None:
        if not self.bin_width_ns > 0:
            raise ValueError(f"bin_width_ns must be positive, got {self.bin_width_ns}")
        if not self.window_end_ns > self.window_start_ns:
            raise ValueError(
                f"record window must be nonempty, got "
                f"[{self.window_start_ns}, {self.window_end_ns}]"
            )
        if not self.background_end_ns > self.background_start_ns:
            raise ValueError(
                f"background region must be nonempty, got "
                f"[{self.background_start_ns}, {self.background_end_ns}]"
            )
        if (
            self.background_start_ns < self.window_start_ns
            or self.background_end_ns > self.window_end_ns
        ):
            raise ValueError("background region must lie inside the record window")

    @property
    def window(self) -> tuple[float, float]:
        return (self.window_start_ns, self.window_end_ns)

    @property
    def background_region(self) -> tuple[float, float]:
        return (self.background_start_ns, self.background_end_ns)

    def roi_center(self, memory: MemoryConfig) -> float:
        return (
            memory.retrieval_delay_ns if self.roi_center_ns is None else self.roi_center_ns
        )


@dataclass(frozen=True)
class PulseRecord:
    """One emitted pulse: slot, emission time, prepared state, post-channel mean."""

    index: int
    emit_time_ns: float
    state: Polarization
    mu_effective: float


@dataclass(frozen=True)
class ClickRecord:
    """Receiver outcome for one pulse.

    clicks maps the two detectors of bob_basis to photon counts inside the
    retrieval ROI; leak_clicks counts arrivals in the leakage window
    (diagnostic only, never sifted).
    """

    pulse_index: int
    bob_basis: Basis
    clicks: dict[Polarization, int]
    leak_clicks: int


@dataclass(frozen=True)
class SiftedSample:
    """Post-sifting tallies and error rates for both bases."""

    n_sifted_z: int
    n_sifted_x: int
    n_err_z: int
    n_err_x: int

    def __post_init__(self) -> None:
        if self.n_err_z > self.n_sifted_z or self.n_err_x > self.n_sifted_x:
            raise ValueError("errors cannot exceed sifted counts")

    @property
    def qber_z(self) -> float:
        return self.n_err_z / self.n_sifted_z if self.n_sifted_z else math.nan

    @property
    def qber_x(self) -> float:
        return self.n_err_x / self.n_sifted_x if self.n_sifted_x else math.nan

    @property
    def qber_mean(self) -> float:
        """Pooled error rate over both bases."""
        n = self.n_sifted_z + self.n_sifted_x
        return (self.n_err_z + self.n_err_x) / n if n else math.nan


@dataclass(frozen=True)
class MemoryOutcome:
    """Per-pulse memory bookkeeping; retrieved + leaked + lost equals the input."""

    retrieved: int
    leaked: int
    lost: int
    background_roi: int


def pulse_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible random stream for one pulse."""
    return np.random.default_rng([seed, index])


def _draw_state(mode: SourceMode, index: int, rng: np.random.Generator) -> Polarization:
    # Ordered mode consumes no randomness so the cycle is exact.
    if mode is SourceMode.ORDERED:
        return POLARIZATION_CYCLE[index % 4]
    return POLARIZATION_CYCLE[int(rng.integers(4))]


def generate_pulse_train(
    source: SourceConfig, seed: int
) -> list[tuple[int, float, Polarization]]:
    """Emission schedule as (index, emit_time_ns, state) triples.

    Random mode draws each state from that pulse's own stream, so the train
    matches what a full pipeline run prepares for the same seed.
    """
    train = []
    for i in range(source.n_pulses):
        state = _draw_state(source.mode, i, pulse_rng(seed, i))
        train.append((i, i * source.pulse_period_ns, state))
    return train


def sample_arriving_photons(
    mu_alice: float, channel: ChannelConfig, rng: np.random.Generator
) -> tuple[float, int]:
    """Channel passage for one pulse: effective mean and arriving photon count.

    The turbulent gain is normal with mean 1 and std rel_fluctuation,
    truncated at 0; the photon number is Poisson at the attenuated mean.
    """
    gain = max(0.0, rng.normal(1.0, channel.rel_fluctuation))
    mu_effective = mu_alice * channel.transmission * gain
    return mu_effective, int(rng.poisson(mu_effective))


def apply_memory(
    n_photons: int, state: Polarization, memory: MemoryConfig, rng: np.random.Generator
) -> MemoryOutcome:
    """Storage step for one pulse.

    Photons split multinomially into leaked / retrieved / lost, which keeps
    per-pulse conservation exact. Surviving photons keep their polarization:
    both rails store or miss together, so attenuation never rotates the
    state. Background counts in the ROI are Poisson at the suppressed mean
    and unpolarized (routed 50/50 at measurement).
    """
    if n_photons < 0:
        raise ValueError(f"photon count must be nonnegative, got {n_photons}")
    loss = 1.0 - memory.leak_fraction - memory.retrieval_efficiency
    leaked, retrieved, lost = rng.multinomial(
        n_photons, [memory.leak_fraction, memory.retrieval_efficiency, loss]
    )
    background = int(rng.poisson(memory.effective_background))
    return MemoryOutcome(int(retrieved), int(leaked), int(lost), background)


def measure(
    pulse_index: int,
    state: Polarization,
    n_signal: int,
    n_background: int,
    rng: np.random.Generator,
    leak_clicks: int = 0,
) -> ClickRecord:
    """Four-detector measurement of one pulse.

    Bob's basis is a fair coin (the 50/50 splitter); signal photons route by
    the ideal projection table, background photons 50/50 within the chosen
    basis. Detectors are ideal and photon-number resolving within the ROI.
    """
    bob_basis = Basis.Z if rng.integers(2) == 0 else Basis.X
    d0, d1 = BASIS_MEMBERS[bob_basis]
    p0 = detection_probability(state, bob_basis, d0)
    if p0 == 1.0:
        signal_d0 = n_signal
    elif p0 == 0.0:
        signal_d0 = 0
    else:
        signal_d0 = int(rng.binomial(n_signal, p0))
    background_d0 = int(rng.binomial(n_background, 0.5))
    clicks = {
        d0: signal_d0 + background_d0,
        d1: (n_signal - signal_d0) + (n_background - background_d0),
    }
    return ClickRecord(pulse_index, bob_basis, clicks, leak_clicks)


def _classify(
    record: ClickRecord,
    truth_state: Polarization,
    policy: DoubleClickPolicy,
    tie_rng: np.random.Generator,
) -> tuple[bool, bool]:
    """(sifted, error) for one pulse under the given tie policy."""
    if record.bob_basis is not basis_of(truth_state):
        return False, False
    d0, d1 = BASIS_MEMBERS[record.bob_basis]
    c0, c1 = record.clicks[d0], record.clicks[d1]
    if c0 == 0 and c1 == 0:
        return False, False
    if c0 == c1:
        if policy is DoubleClickPolicy.DISCARD:
            return False, False
        bit = int(tie_rng.integers(2))
    else:
        bit = bit_of(d0 if c0 > c1 else d1)
    return True, bit != bit_of(truth_state)


def sift_and_estimate(
    records: list[ClickRecord],
    truth: list[PulseRecord],
    policy: DoubleClickPolicy = DoubleClickPolicy.RANDOM,
    tie_rng: np.random.Generator | None = None,
) -> SiftedSample:
    """Sift matched-basis pulses with at least one ROI click and tally errors.

    A pulse counts as an error when the detector with the larger ROI count
    decodes to the wrong bit; equal counts fall to the tie policy (random
    assigns a fair bit, discard drops the pulse from the sample).
    """
    sample, _ = _sift_with_flags(records, truth, policy, tie_rng)
    return sample


def _sift_with_flags(
    records: list[ClickRecord],
    truth: list[PulseRecord],
    policy: DoubleClickPolicy,
    tie_rng: np.random.Generator | None,
) -> tuple[SiftedSample, list[tuple[bool, bool]]]:
    if len(records) != len(truth):
        raise ValueError(
            f"records ({len(records)}) and truth ({len(truth)}) lengths differ"
        )
    if tie_rng is None:
        tie_rng = np.random.default_rng(0)
    sifted = {Basis.Z: 0, Basis.X: 0}
    errors = {Basis.Z: 0, Basis.X: 0}
    flags = []
    for record, pulse in zip(records, truth):
        if record.pulse_index != pulse.index:
            raise ValueError(
                f"record/truth misalignment at pulse {pulse.index} vs "
                f"{record.pulse_index}"
            )
        keep, err = _classify(record, pulse.state, policy, tie_rng)
        flags.append((keep, err))
        if keep:
            sifted[record.bob_basis] += 1
            errors[record.bob_basis] += int(err)
    sample = SiftedSample(
        n_sifted_z=sifted[Basis.Z],
        n_sifted_x=sifted[Basis.X],
        n_err_z=errors[Basis.Z],
        n_err_x=errors[Basis.X],
    )
    return sample, flags


@dataclass(frozen=True)
class RunResult:
    """Aggregated output of one pipeline run.

    click_times_ns holds every click (leakage, retrieved, background) as a
    pulse-relative timestamp, ready for histogramming. flags carries the
    per-pulse (sifted, error) decisions in pulse order.
    """

    seed: int
    pulses: list[PulseRecord]
    clicks: list[ClickRecord]
    flags: list[tuple[bool, bool]]
    sample: SiftedSample
    sbr: SbrEstimate
    click_times_ns: np.ndarray
    n_arrived: int
    n_retrieved: int
    n_leaked: int
    n_lost: int
    n_background_roi: int


def _simulate_chunk(args) -> tuple[list[PulseRecord], list[ClickRecord], np.ndarray, tuple]:
    """Simulate pulses [start, stop); pure function of (configs, seed, range)."""
    source, channel, memory, analysis, seed, start, stop = args
    roi_center = analysis.roi_center(memory)
    roi_lo = roi_center - memory.roi_width_ns / 2.0
    roi_hi = roi_center + memory.roi_width_ns / 2.0
    window_lo, window_hi = analysis.window
    span_outside = (window_hi - window_lo) - memory.roi_width_ns
    # Background is a homogeneous process over the record window; drawing the
    # ROI share inside apply_memory and the remainder here keeps the ROI count
    # exactly Poisson(effective_background) while the histogram sees the full
    # uniform floor.
    rate_outside = memory.effective_background * span_outside / memory.roi_width_ns

    pulses: list[PulseRecord] = []
    clicks: list[ClickRecord] = []
    times: list[np.ndarray] = []
    arrived = retrieved = leaked = lost = background_roi = 0

    for i in range(start, stop):
        rng = pulse_rng(seed, i)
        state = _draw_state(source.mode, i, rng)
        mu_effective, n_arrive = sample_arriving_photons(source.mu_alice, channel, rng)
        outcome = apply_memory(n_arrive, state, memory, rng)

        n_bg_outside = int(rng.poisson(rate_outside)) if rate_outside > 0 else 0
        leak_times = rng.uniform(0.0, source.pulse_width_ns, outcome.leaked)
        retrieved_times = rng.uniform(roi_lo, roi_hi, outcome.retrieved)
        bg_roi_times = rng.uniform(roi_lo, roi_hi, outcome.background_roi)
        u = rng.uniform(0.0, span_outside, n_bg_outside)
        bg_outside_times = np.where(
            window_lo + u < roi_lo, window_lo + u, window_lo + u + memory.roi_width_ns
        )

        in_leak_window = (bg_outside_times >= 0.0) & (
            bg_outside_times < source.pulse_width_ns
        )
        leak_clicks = outcome.leaked + int(np.count_nonzero(in_leak_window))
        record = measure(
            i, state, outcome.retrieved, outcome.background_roi, rng, leak_clicks
        )

        pulses.append(PulseRecord(i, i * source.pulse_period_ns, state, mu_effective))
        clicks.append(record)
        times.append(
            np.concatenate([leak_times, retrieved_times, bg_roi_times, bg_outside_times])
        )
        arrived += n_arrive
        retrieved += outcome.retrieved
        leaked += outcome.leaked
        lost += outcome.lost
        background_roi += outcome.background_roi

    chunk_times = np.concatenate(times) if times else np.empty(0, dtype=float)
    return pulses, clicks, chunk_times, (arrived, retrieved, leaked, lost, background_roi)


def run_experiment(
    config,
    seed: int | None = None,
    workers: int = 1,
    policy: DoubleClickPolicy = DoubleClickPolicy.RANDOM,
) -> RunResult:
    """Run the full pipeline for a RunConfig.

    Outputs are a pure function of (config, seed): each pulse draws from a
    stream keyed by (seed, pulse_index) and the tie-break stream is keyed by
    the seed alone, so worker count and chunking never change the result.
    """
    source, channel, memory, analysis = (
        config.source,
        config.channel,
        config.memory,
        config.analysis,
    )
    if seed is None:
        seed = config.seed
    roi_center = analysis.roi_center(memory)
    half = memory.roi_width_ns / 2.0
    if roi_center - half < analysis.window_start_ns or roi_center + half > analysis.window_end_ns:
        raise ValueError("retrieval ROI must lie inside the record window")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    n = source.n_pulses
    bounds = [(n * k // workers, n * (k + 1) // workers) for k in range(workers)]
    chunk_args = [
        (source, channel, memory, analysis, seed, start, stop)
        for start, stop in bounds
        if stop > start
    ]
    if len(chunk_args) <= 1:
        outputs = [_simulate_chunk(a) for a in chunk_args]
    else:
        with ProcessPoolExecutor(max_workers=len(chunk_args)) as pool:
            outputs = list(pool.map(_simulate_chunk, chunk_args))

    pulses: list[PulseRecord] = []
    clicks: list[ClickRecord] = []
    time_chunks: list[np.ndarray] = []
    totals = np.zeros(5, dtype=np.int64)
    for chunk_pulses, chunk_clicks, chunk_times, chunk_totals in outputs:
        pulses.extend(chunk_pulses)
        clicks.extend(chunk_clicks)
        time_chunks.append(chunk_times)
        totals += np.asarray(chunk_totals, dtype=np.int64)

    tie_rng = np.random.default_rng([seed, _TIE_STREAM_TAG])
    sample, flags = _sift_with_flags(clicks, pulses, policy, tie_rng)
    arrived, retrieved, leaked, lost, background_roi = (int(t) for t in totals)
    sbr = SbrEstimate(
        eta=retrieved / n if n else 0.0,
        q=background_roi / n if n else 0.0,
    )
    click_times = (
        np.concatenate(time_chunks) if time_chunks else np.empty(0, dtype=float)
    )
    return RunResult(
        seed=seed,
        pulses=pulses,
        clicks=clicks,
        flags=flags,
        sample=sample,
        sbr=sbr,
        click_times_ns=click_times,
        n_arrived=arrived,
        n_retrieved=retrieved,
        n_leaked=leaked,
        n_lost=lost,
        n_background_roi=background_roi,
    )
