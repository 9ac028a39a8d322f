"""Per-slot and per-round mutual information of the transmission strategies.

Three MIMO strategies plus the single-transmit-antenna reference:

* optimal spatial multiplexing: log2 det(I + (snr/nT) H H^H), the Gaussian
  mutual information with isotropic inputs;
* transmit diversity: the MIMO channel collapsed to one scalar channel with
  SNR (snr/nT) Tr{H H^H} (achieved by Alamouti transmission when nT = 2);
* MMSE-SIC spatial multiplexing: one coded stream per transmit antenna, all
  at the same rate, decoded successively behind an MMSE interference
  whitener; the block rate is governed by the weakest stream;
* non-MIMO: the nT = 1 receive-combining (MRC) reference.

All rates are bits per complex symbol (bits/s/Hz at one symbol/s/Hz);
logarithms are base 2 throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelBlock
from .config import ConfigError

_LOG2E = math.log2(math.e)


class Strategy(enum.Enum):
    OPTIMAL_SM = "optimal-sm"
    TRANSMIT_DIVERSITY = "transmit-diversity"
    MMSE_SIC = "mmse-sic"
    NON_MIMO = "non-mimo"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        try:
            return cls(name.strip().lower())
        except ValueError:
            options = ", ".join(s.value for s in cls)
            raise ConfigError(f"unknown strategy {name!r}; choose from {options}") from None


@dataclass(frozen=True)
class MiRecord:
    """Accumulated mutual information M_1..M_K of one block under one strategy.

    For MMSE-SIC, `stream_values[k, m]` keeps the per-stream accumulated
    slot-average MI (before the min over streams) so ergodic summaries can
    reuse the same trials.
    """

    strategy: Strategy
    snr: float
    values: np.ndarray
    stream_values: np.ndarray | None = None

    @property
    def rounds(self) -> int:
        return len(self.values)


def _as_matrix(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2:
        raise ValueError(f"expected a 2-D channel matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix has non-finite entries")
    return h


def _check_snr(snr: float) -> float:
    snr = float(snr)
    if not snr >= 0.0:
        raise ValueError(f"snr must be nonnegative, got {snr}")
    return snr


# --------------------------------------------------------------------------
# Batched per-slot evaluators (leading axes broadcast over slots)
# --------------------------------------------------------------------------

def slot_mi_transmit_diversity(h, snr) -> np.ndarray:
    """log2(1 + (snr/nT) Tr{H H^H}) per slot for h of shape (..., nR, nT)."""
    h = np.asarray(h, dtype=complex)
    n_t = h.shape[-1]
    tr = np.sum(np.abs(h) ** 2, axis=(-2, -1))
    return np.log1p((snr / n_t) * tr) * _LOG2E


def mmse_sic_stream_mi(h, snr) -> np.ndarray:
    """log2(1 + SINR_m) for every SIC stream m; h of shape (..., nR, nT).

    SINR_m is the post-MMSE-whitening SNR of stream m with streams 1..m-1
    already cancelled. Computed from one Cholesky factorization of the
    reversed-index Gram matrix I + (snr/nT) H^H H: the ratio of consecutive
    trailing principal minors gives 1 + SINR_m = |L_jj|^2, which agrees with
    the direct h_m^H (H_{>m} H_{>m}^H + (nT/snr) I)^{-1} h_m form.
    """
    h = np.asarray(h, dtype=complex)
    n_t = h.shape[-1]
    gram = np.matmul(h.conj().swapaxes(-1, -2), h)
    m = (snr / n_t) * gram[..., ::-1, ::-1]
    eye = np.eye(n_t)
    m = m + eye
    diag = np.diagonal(np.linalg.cholesky(m), axis1=-2, axis2=-1).real
    return 2.0 * np.log2(diag[..., ::-1])


def slot_mi_optimal(h, snr) -> np.ndarray:
    """log2 det(I + (snr/nT) H H^H) per slot, via Cholesky of the Gram matrix."""
    return mmse_sic_stream_mi(h, snr).sum(axis=-1)


# --------------------------------------------------------------------------
# Spec-level single-slot operations
# --------------------------------------------------------------------------

def mi_optimal(h, snr) -> float:
    """Mutual information of optimal spatial multiplexing on one slot."""
    h = _as_matrix(h)
    snr = _check_snr(snr)
    return float(slot_mi_optimal(h, snr))


def mi_transmit_diversity(h, snr) -> float:
    """Mutual information of the transmit-diversity scalar channel on one slot."""
    h = _as_matrix(h)
    snr = _check_snr(snr)
    return float(slot_mi_transmit_diversity(h, snr))


def mmse_sic_stream_sinr(h, snr, stream: int) -> float:
    """Post-whitening SNR of SIC stream `stream` (1-based), literal form.

    Solves (H_{>m} H_{>m}^H + (nT/snr) I) w = h_m and returns h_m^H w; the
    regularizer keeps the system positive definite for every snr < inf.
    snr = 0 returns 0 (the limit).
    """
    h = _as_matrix(h)
    snr = _check_snr(snr)
    n_r, n_t = h.shape
    if not 1 <= stream <= n_t:
        raise ValueError(f"stream index {stream} outside 1..{n_t}")
    if snr == 0.0:
        return 0.0
    h_m = h[:, stream - 1]
    rest = h[:, stream:]
    cov = rest @ rest.conj().T + (n_t / snr) * np.eye(n_r)
    w = np.linalg.solve(cov, h_m)
    return float(np.real(h_m.conj() @ w))


def mi_mmse_sic_aggregate(block: ChannelBlock, snr, rounds: int | None = None) -> float:
    """Aggregate MMSE-SIC mutual information after the block's first k rounds.

    nT * min over streams m of sum_l (1/S) sum_i log2(1 + SINR_{i,m}(l)): the
    min enforces the common per-stream rate, so the block is in outage as
    soon as any stream cannot carry it.
    """
    snr = _check_snr(snr)
    k = block.rounds if rounds is None else int(rounds)
    if not 1 <= k <= block.rounds:
        raise ValueError(f"rounds {k} outside 1..{block.rounds}")
    h = block.matrices[:k]
    terms = mmse_sic_stream_mi(h, snr)  # (k, S, nT)
    per_stream = terms.mean(axis=1).sum(axis=0)
    return float(block.n_t * per_stream.min())


def mi_per_round(strategy: Strategy, block: ChannelBlock, snr) -> MiRecord:
    """Accumulated mutual information M_k for k = 1..rounds of one block.

    Per round, the slot MI is averaged over the round's tone-symbol slots;
    rounds accumulate (incremental redundancy). MMSE-SIC takes the min over
    streams of the accumulated per-stream averages, scaled by nT.
    """
    snr = _check_snr(snr)
    if block.matrices.size == 0:
        raise ValueError("channel block is empty")
    if not np.all(np.isfinite(block.matrices)):
        raise ValueError("channel block has non-finite entries")
    if strategy is Strategy.NON_MIMO and block.n_t != 1:
        raise ConfigError("non-MIMO reference requires n_t = 1 blocks")

    h = block.matrices
    stream_cum = None
    if strategy is Strategy.MMSE_SIC:
        terms = mmse_sic_stream_mi(h, snr)        # (R, S, nT)
        stream_cum = terms.mean(axis=1).cumsum(axis=0)
        values = block.n_t * stream_cum.min(axis=1)
    elif strategy is Strategy.OPTIMAL_SM:
        values = slot_mi_optimal(h, snr).mean(axis=1).cumsum()
    elif strategy in (Strategy.TRANSMIT_DIVERSITY, Strategy.NON_MIMO):
        values = slot_mi_transmit_diversity(h, snr).mean(axis=1).cumsum()
    else:  # pragma: no cover
        raise ConfigError(f"unhandled strategy {strategy}")
    return MiRecord(strategy, snr, values, stream_cum)
