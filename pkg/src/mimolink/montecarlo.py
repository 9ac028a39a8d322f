"""Monte Carlo estimation of outage rates, H-ARQ statistics, and ergodic rates.

Trials are seeded individually: trial t of an experiment draws its channel
block from a substream derived from (master seed, experiment tag, t), where
the tag encodes only channel-defining parameters (profile taps, antennas,
Doppler, resource-block geometry). Ensembles are therefore reproducible
bit-for-bit for a fixed seed regardless of worker count, and the same
blocks are shared across strategies and SNR points of one sweep (paired
comparisons).
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel, harq
from .config import ConfigError, SystemConfig
from .strategies import MiRecord, Strategy, mi_per_round

_CHUNK = 64  # trials per worker job; fixed so results never depend on worker count


@dataclass
class TrialEnsemble:
    """Per-trial MI records of one (strategy, snr) experiment.

    records[t, k] holds M_{k+1} of trial t. For MMSE-SIC, stream_records
    additionally keeps the accumulated per-stream averages (trials, rounds,
    nT) backing the ergodic summaries.
    """

    strategy: Strategy
    snr: float
    records: np.ndarray
    stream_records: np.ndarray | None = None

    @property
    def trial_count(self) -> int:
        return self.records.shape[0]

    @property
    def rounds(self) -> int:
        return self.records.shape[1]

    @property
    def harq_mode(self) -> bool:
        return self.rounds > 1

    def samples(self) -> np.ndarray:
        """Final accumulated MI of every trial (M_max)."""
        return self.records[:, -1]

    def mi_records(self) -> list[MiRecord]:
        return [MiRecord(self.strategy, self.snr, row) for row in self.records]


@dataclass(frozen=True)
class RateCurvePoint:
    """One sweep point: outage rate plus the H-ARQ replay statistics."""

    snr_db: float
    r_eps: float
    effective_rate: float
    expected_rounds: float
    outage_estimate: float


def _experiment_tag(config: SystemConfig) -> str:
    """Channel-defining parameters only; strategy and SNR never enter."""
    prof = channel.resolve_profile(config)
    taps = ",".join(f"{d:.12g}:{p:.12g}" for d, p in zip(prof.delays_s, prof.powers))
    flat = config.profile.upper() == "FLAT"
    parts = [
        "flat" if flat else "tdl",
        taps,
        f"nr={config.n_r}",
        f"nt={config.n_t}",
        f"rounds={config.harq_rounds}",
        f"spacing={config.round_spacing_ms:.12g}",
        f"symbols={config.symbols_per_rb}",
        f"tsym={config.symbol_duration_s:.12g}",
        f"tones={config.rb_tones}/{config.usable_tones}",
        f"df={config.tone_spacing_hz:.12g}",
        f"fd={config.effective_doppler_hz:.12g}",
        f"order={config.generator_order}",
    ]
    return "|".join(parts)


def _trial_rng(master_seed: int, tag: str, trial: int) -> np.random.Generator:
    digest = hashlib.sha256(tag.encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    seq = np.random.SeedSequence([int(master_seed), *words, int(trial)])
    return np.random.default_rng(seq)


def _chunk_job(args):
    config, pairs, trial_lo, trial_hi, master_seed, tag = args
    alloc = None
    if config.profile.upper() != "FLAT":
        alloc = channel.case_study_allocation(config)
    values = {pair: [] for pair in pairs}
    streams = {pair: [] for pair in pairs}
    for t in range(trial_lo, trial_hi):
        rng = _trial_rng(master_seed, tag, t)
        block = channel.generate_block(config, alloc, rng)
        for strategy, snr in pairs:
            rec = mi_per_round(strategy, block, snr)
            values[(strategy, snr)].append(rec.values)
            if rec.stream_values is not None:
                streams[(strategy, snr)].append(rec.stream_values)
    return values, streams


def run_trials_multi(config: SystemConfig, strategies, snrs, trial_count: int,
                     master_seed: int, workers: int = 1):
    """Evaluate several (strategy, snr) pairs on one shared block ensemble.

    Returns {(strategy, snr): TrialEnsemble}. All strategies must run on the
    configured antenna counts (the non-MIMO reference needs an n_t = 1
    config; sweep drivers derive one).
    """
    config.validate()
    if trial_count < 1:
        raise ConfigError("trial_count must be >= 1")
    strategies = [s if isinstance(s, Strategy) else Strategy.parse(s) for s in strategies]
    if Strategy.NON_MIMO in strategies and config.n_t != 1:
        raise ConfigError("non-MIMO reference requires a config with n_t = 1")
    pairs = [(s, float(snr)) for s in strategies for snr in snrs]
    tag = _experiment_tag(config)

    bounds = list(range(0, trial_count, _CHUNK)) + [trial_count]
    jobs = [(config, pairs, lo, hi, master_seed, tag)
            for lo, hi in zip(bounds[:-1], bounds[1:])]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_job, jobs))
    else:
        results = [_chunk_job(job) for job in jobs]

    out = {}
    for pair in pairs:
        rows = [row for values, _ in results for row in values[pair]]
        stream_rows = [row for _, streams in results for row in streams[pair]]
        out[pair] = TrialEnsemble(
            pair[0], pair[1], np.array(rows),
            np.array(stream_rows) if stream_rows else None,
        )
    return out


def run_trials(config: SystemConfig, strategy, snr, trial_count: int,
               master_seed: int, workers: int = 1) -> TrialEnsemble:
    """Independent-block ensemble for one strategy at one SNR."""
    result = run_trials_multi(config, [strategy], [snr], trial_count, master_seed, workers)
    return next(iter(result.values()))


# --------------------------------------------------------------------------
# Outage estimators
# --------------------------------------------------------------------------

def _order_statistic(samples: np.ndarray, epsilon: float, inclusive: bool) -> float:
    """Empirical epsilon-quantile tuned to the outage tie convention.

    Exclusive (no H-ARQ, outage iff MI strictly below the rate): the
    (floor(eps N) + 1)-th smallest sample, so at most eps N samples lie
    strictly below. Inclusive (H-ARQ, ties fail): the floor(eps N)-th
    smallest, so at most eps N samples are <= the returned threshold.
    """
    n = len(samples)
    j = math.floor(epsilon * n)
    if j < 1:
        raise ConfigError(
            f"quantile at epsilon={epsilon} needs at least {math.ceil(1 / epsilon)} trials, got {n}"
        )
    k = j if inclusive else j + 1
    return float(np.sort(samples)[k - 1])


def outage_rate(ensemble: TrialEnsemble, epsilon: float) -> float:
    """Largest per-round rate whose estimated outage probability is <= epsilon.

    Without H-ARQ this is the empirical version of the eps-outage rate
    (strictly-below outage events). With H-ARQ the threshold is the quantile
    of M_max and the rate is threshold / max_rounds, so the termination rule
    M_max <= max_rounds * rate fires with frequency <= epsilon.
    """
    if ensemble.harq_mode:
        q = _order_statistic(ensemble.samples(), epsilon, inclusive=True)
        return q / ensemble.rounds
    return _order_statistic(ensemble.samples(), epsilon, inclusive=False)


def outage_prob(ensemble: TrialEnsemble, rate: float) -> float:
    """Empirical outage probability of the ensemble at a given per-round rate."""
    samples = ensemble.samples()
    if ensemble.harq_mode:
        return float(np.mean(samples <= ensemble.rounds * rate))
    return float(np.mean(samples < rate))


def sweep_point_from_ensemble(ensemble: TrialEnsemble, epsilon: float,
                              snr_db: float | None = None) -> RateCurvePoint:
    """Outage rate, H-ARQ replay, and effective rate for one ensemble.

    The initial rate is max_rounds * R_eps with R_eps the inclusive-mode
    quantile (decoding needs strict crossing, so ties are outages even for
    single-round ensembles); every record is replayed through the H-ARQ
    termination rule, outage trials counting as max_rounds.
    """
    q = _order_statistic(ensemble.samples(), epsilon, inclusive=True)
    rounds = ensemble.rounds
    r_eps = q / rounds
    ks = np.empty(ensemble.trial_count)
    for t, row in enumerate(ensemble.records):
        outcome = harq.termination_round(row, q)
        ks[t] = rounds if outcome.is_outage else outcome.terminated_round
    expected_rounds = float(ks.mean())
    eff = harq.effective_rate(r_eps, expected_rounds, rounds)
    outage_est = float(np.mean(ensemble.samples() <= q))
    if snr_db is None:
        snr_db = 10.0 * math.log10(ensemble.snr) if ensemble.snr > 0 else -math.inf
    return RateCurvePoint(snr_db, r_eps, eff, expected_rounds, outage_est)


def sweep_point(config: SystemConfig, strategy, snr, epsilon: float,
                trial_count: int, seed: int, workers: int = 1) -> RateCurvePoint:
    """Run trials and reduce them to one rate-curve point."""
    ensemble = run_trials(config, strategy, snr, trial_count, seed, workers)
    return sweep_point_from_ensemble(ensemble, epsilon)


# --------------------------------------------------------------------------
# Ergodic rates
# --------------------------------------------------------------------------

def ergodic_from_ensemble(ensemble: TrialEnsemble) -> float:
    """Ergodic (infinite-selectivity) rate of the strategy at this SNR.

    The sample mean of the per-slot MI over all slots, rounds, and trials.
    For MMSE-SIC every stream must carry the common rate, so the ergodic
    limit of the min-form aggregate is nT times the smallest per-stream
    mean slot MI (the first-decoded stream, which faces all interferers).
    """
    if ensemble.stream_records is not None:
        n_t = ensemble.stream_records.shape[2]
        per_stream = ensemble.stream_records[:, -1, :].mean(axis=0)
        return float(n_t * per_stream.min() / ensemble.rounds)
    return float(ensemble.samples().mean() / ensemble.rounds)


def ergodic_rate(config: SystemConfig, strategy, snr, trial_count: int,
                 seed: int, workers: int = 1) -> float:
    """Monte Carlo ergodic rate of a strategy at one SNR."""
    ensemble = run_trials(config, strategy, snr, trial_count, seed, workers)
    return ergodic_from_ensemble(ensemble)
