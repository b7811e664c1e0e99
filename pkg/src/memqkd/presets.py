"""Named run presets covering the five operating regimes of the link.

All presets share the channel (59% transmission, 5% turbulence) and the
memory retrieval/leakage split; they differ in source brightness and in the
background level, which is calibrated against endpoint observables (target
signal-to-background ratios) rather than against component transmissions.
"""

from __future__ import annotations

from .config import RunConfig
from .simulation import ChannelConfig, MemoryConfig, SourceConfig, SourceMode

#: Shared memory parameters; the split is a calibration choice, endpoint
#: observables only pin the ratio of retrieved signal to background.
RETRIEVAL_EFFICIENCY = 0.12
LEAK_FRACTION = 0.35

#: Memory-input means and SBR calibration targets per regime.
MU_MEMORY_ORDERED = 1.6
SBR_ORDERED = 6.25  # fidelity estimator reads 0.92 at this ratio
MU_MEMORY_HIGH_PHOTON = 100.0
MU_MEMORY_SINGLE_PHOTON = 1.6
SBR_SINGLE_PHOTON = 3.2017  # counting oracle gives a 0.119 average error rate
MU_MEMORY_SUPPRESSED = 1.3
SBR_SUPPRESSED = 26.0
MU_MEMORY_PORTABLE = 2.0
# The histogram SBR integrates the background under the retrieval peak into
# the signal count, reading one unit above the counting ratio; the portable
# preset targets a histogram reading of 7.2.
SBR_PORTABLE_COUNTING = 6.2

DEFAULT_PULSES = 100_000
DEFAULT_SEED = 1

PRESET_NAMES = (
    "experiment1",
    "experiment2",
    "experiment3",
    "experiment4",
    "experiment5",
)


def background_mean_for_sbr(
    target_sbr: float,
    mu_memory: float,
    retrieval_efficiency: float = RETRIEVAL_EFFICIENCY,
) -> float:
    """Background mean per ROI that yields target_sbr at the given input mean.

    Inverts sbr = retrieval_efficiency * mu_memory / background_mean.
    """
    if not target_sbr > 0:
        raise ValueError(f"target_sbr must be positive, got {target_sbr}")
    if not mu_memory > 0:
        raise ValueError(f"mu_memory must be positive, got {mu_memory}")
    return retrieval_efficiency * mu_memory / target_sbr


def mu_alice_for_memory_mean(mu_memory: float, transmission: float) -> float:
    """Source brightness that delivers mu_memory photons at the memory input."""
    return mu_memory / transmission


def _build(
    mode: SourceMode,
    mu_memory: float,
    background_mean: float,
    noise_suppression: float,
    n_pulses: int,
    seed: int,
) -> RunConfig:
    channel = ChannelConfig()
    source = SourceConfig(
        mode=mode,
        mu_alice=mu_alice_for_memory_mean(mu_memory, channel.transmission),
        n_pulses=n_pulses,
    )
    memory = MemoryConfig(
        retrieval_efficiency=RETRIEVAL_EFFICIENCY,
        leak_fraction=LEAK_FRACTION,
        background_mean=background_mean,
        noise_suppression=noise_suppression,
    )
    return RunConfig(source=source, channel=channel, memory=memory, seed=seed)


def preset_config(
    name: str,
    n_pulses: int = DEFAULT_PULSES,
    seed: int = DEFAULT_SEED,
    mu_memory: float | None = None,
) -> RunConfig:
    """Build the RunConfig for a named preset.

    mu_memory overrides the regime's memory-input mean while keeping its
    memory calibration, e.g. to rescale the noise-suppressed regime from 1.3
    down to 1 photon per pulse.

    experiment1: ordered four-state cycle at the single-photon level.
    experiment2: random states at high photon number (about 100 at the memory).
    experiment3: random states at the single-photon level (the error-rate run).
    experiment4: noise-suppressed background, ratio 26 at 1.3 photons.
    experiment5: portable single-rail storage, histogram SBR target 7.2.
    """
    background_single_photon = background_mean_for_sbr(
        SBR_SINGLE_PHOTON, MU_MEMORY_SINGLE_PHOTON
    )
    if name == "experiment1":
        return _build(
            SourceMode.ORDERED,
            mu_memory if mu_memory is not None else MU_MEMORY_ORDERED,
            background_mean_for_sbr(SBR_ORDERED, MU_MEMORY_ORDERED),
            1.0,
            n_pulses,
            seed,
        )
    if name == "experiment2":
        # Same memory as the single-photon run; only the brightness changes.
        return _build(
            SourceMode.RANDOM,
            mu_memory if mu_memory is not None else MU_MEMORY_HIGH_PHOTON,
            background_single_photon,
            1.0,
            n_pulses,
            seed,
        )
    if name == "experiment3":
        return _build(
            SourceMode.RANDOM,
            mu_memory if mu_memory is not None else MU_MEMORY_SINGLE_PHOTON,
            background_single_photon,
            1.0,
            n_pulses,
            seed,
        )
    if name == "experiment4":
        # Suppression factor chosen so the effective ratio is exactly 26 at
        # the 1.3-photon operating point.
        suppressed = background_mean_for_sbr(SBR_SUPPRESSED, MU_MEMORY_SUPPRESSED)
        return _build(
            SourceMode.RANDOM,
            mu_memory if mu_memory is not None else MU_MEMORY_SUPPRESSED,
            background_single_photon,
            suppressed / background_single_photon,
            n_pulses,
            seed,
        )
    if name == "experiment5":
        return _build(
            SourceMode.RANDOM,
            mu_memory if mu_memory is not None else MU_MEMORY_PORTABLE,
            background_mean_for_sbr(SBR_PORTABLE_COUNTING, MU_MEMORY_PORTABLE),
            1.0,
            n_pulses,
            seed,
        )
    raise ValueError(f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}")
