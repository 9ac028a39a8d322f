"""Uncoded ML symbol-error rates: Alamouti 16-QAM vs. spatial multiplexing 4-QAM.

Both formats carry 4 bits per MIMO symbol over a 2x2 i.i.d. Rayleigh channel
with total transmit power `snr` (unit-variance noise): Alamouti sends one
16-QAM stream through the orthogonal 2-antenna block code, spatial
multiplexing sends two independent 4-QAM symbols detected by exhaustive ML.
Symbol errors are counted per constellation decision (two per Alamouti
block, two per multiplexing channel use).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

_CHUNK = 1 << 18


@dataclass(frozen=True)
class Constellation:
    """Unit-energy complex constellation with Gray bit labels."""

    points: np.ndarray
    bits_per_symbol: int
    labels: np.ndarray  # (n_points, bits_per_symbol) of 0/1

    def __len__(self) -> int:
        return len(self.points)


_GRAY_2BIT = ((0, 0), (0, 1), (1, 1), (1, 0))  # labels along increasing level


def qam_constellation(order: int) -> Constellation:
    """Square Gray-labeled QAM (order 4 or 16), normalized to unit mean energy."""
    side = math.isqrt(order)
    if side * side != order or side not in (2, 4):
        raise ValueError("only square 4-QAM and 16-QAM are supported")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    if side == 2:
        axis_labels = ((0,), (1,))
    else:
        axis_labels = _GRAY_2BIT
    points = []
    labels = []
    for i, re in enumerate(levels):
        for q, im in enumerate(levels):
            points.append(re + 1j * im)
            labels.append(tuple(axis_labels[i]) + tuple(axis_labels[q]))
    points = np.asarray(points)
    points = points / math.sqrt(np.mean(np.abs(points) ** 2))
    return Constellation(points, 2 * int(math.log2(side)), np.asarray(labels, dtype=int))


@dataclass(frozen=True)
class SerPoint:
    snr_db: float
    ser: float
    trials: int


class SerScheme(enum.Enum):
    ALAMOUTI_16QAM = "alamouti-16qam"
    SM_ML_4QAM = "sm-ml-4qam"

    @classmethod
    def parse(cls, name: str) -> "SerScheme":
        try:
            return cls(name.strip().lower())
        except ValueError:
            options = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown SER scheme {name!r}; choose from {options}") from None


def _snr_db(snr: float) -> float:
    return 10.0 * math.log10(snr) if snr > 0 else -math.inf


def _draw_h(rng, count, h_fixed):
    if h_fixed is not None:
        h = np.asarray(h_fixed, dtype=complex)
        if h.shape != (2, 2):
            raise ValueError("h_fixed must be a 2x2 matrix")
        return np.broadcast_to(h, (count, 2, 2))
    return (rng.standard_normal((count, 2, 2))
            + 1j * rng.standard_normal((count, 2, 2))) / math.sqrt(2.0)


def _cn_noise(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def alamouti_encode(symbols) -> np.ndarray:
    """(..., 2) symbol pairs -> (..., 2, 2) space-time blocks (columns = slots)."""
    s = np.asarray(symbols, dtype=complex)
    x = np.empty(s.shape[:-1] + (2, 2), dtype=complex)
    x[..., 0, 0] = s[..., 0]
    x[..., 1, 0] = s[..., 1]
    x[..., 0, 1] = -s[..., 1].conj()
    x[..., 1, 1] = s[..., 0].conj()
    return x


def alamouti_combine(h, y):
    """Orthogonal combining of one received block y (..., 2 rx, 2 slots).

    Returns (z, channel_gain) with z[..., m] = channel_gain * x_m + noise,
    where channel_gain = ||H||_F^2 and the combined noise variance per
    decision equals channel_gain for unit-variance input noise.
    """
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    h1, h2 = h[..., :, 0], h[..., :, 1]
    y1, y2 = y[..., :, 0], y[..., :, 1]
    z1 = np.sum(h1.conj() * y1, axis=-1) + np.sum(h2 * y2.conj(), axis=-1)
    z2 = np.sum(h2.conj() * y1, axis=-1) - np.sum(h1 * y2.conj(), axis=-1)
    gain = np.sum(np.abs(h) ** 2, axis=(-2, -1))
    return np.stack([z1, z2], axis=-1), gain


def _run_trials(one_chunk, trials, min_events, max_trials):
    """Chunked loop: at least `trials`, extended until `min_events` errors.

    Chunk sizes depend only on the counters, so a given (seed, trials,
    min_events, max_trials) always reproduces the same trial sequence.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    max_trials = max(trials, max_trials or trials)
    errors = 0
    done = 0
    while done < trials or (errors < min_events and done < max_trials):
        count = min(_CHUNK, max(trials, max_trials if errors < min_events else trials) - done)
        errors += one_chunk(count)
        done += count
    return errors, done


def alamouti_ser(snr, trials: int, seed, h_fixed=None, min_events: int = 0,
                 max_trials: int | None = None) -> SerPoint:
    """Alamouti 16-QAM symbol error rate at total transmit power `snr`.

    Each trial spans one 2-symbol Alamouti block over a fixed H. Orthogonal
    combining turns the block into two scalar decisions at effective SNR
    (snr/2) ||H||_F^2, detected by minimum distance. With `min_events` set,
    trials continue past `trials` (up to `max_trials`) until that many
    symbol errors are seen, for uniform relative accuracy along SER curves.
    """
    const = qam_constellation(16)
    amp = math.sqrt(snr / 2.0)
    rng = np.random.default_rng(seed)

    def chunk(count):
        idx = rng.integers(0, 16, size=(count, 2))
        h = _draw_h(rng, count, h_fixed)
        noise = _cn_noise(rng, (count, 2, 2))
        x = alamouti_encode(const.points[idx])
        y = amp * np.matmul(h, x) + noise
        z, gain = alamouti_combine(h, y)
        scale = amp * gain
        dist = np.abs(z[:, :, None] - scale[:, None, None] * const.points) ** 2
        return int(np.count_nonzero(np.argmin(dist, axis=2) != idx))

    errors, done = _run_trials(chunk, trials, min_events, max_trials)
    return SerPoint(_snr_db(snr), errors / (2 * done), done)


def sm_hypotheses(points) -> np.ndarray:
    """All transmit vectors (s_i, s_j), row index p = n * i + j."""
    return np.stack(np.meshgrid(points, points, indexing="ij"), axis=-1).reshape(-1, 2)


def ml_detect(y, h, amp, cand) -> np.ndarray:
    """Exhaustive ML: argmin_p ||y - amp * H cand_p||^2 per batch entry."""
    hyp = amp * np.einsum("crt,pt->crp", h, cand)
    dist = np.sum(np.abs(y[:, :, None] - hyp) ** 2, axis=1)
    return np.argmin(dist, axis=1)


def sm_ml_ser(snr, trials: int, seed, h_fixed=None, min_events: int = 0,
              max_trials: int | None = None) -> SerPoint:
    """Spatial-multiplexing 4-QAM SER with exhaustive ML detection.

    Each trial transmits one 4-QAM symbol per antenna at power snr/2 each;
    the detector scans all 16 hypothesis vectors for min ||y - H x||^2.
    """
    const = qam_constellation(4)
    n = len(const)
    amp = math.sqrt(snr / 2.0)
    cand = sm_hypotheses(const.points)
    rng = np.random.default_rng(seed)

    def chunk(count):
        idx = rng.integers(0, n, size=(count, 2))
        h = _draw_h(rng, count, h_fixed)
        noise = _cn_noise(rng, (count, 2))
        x = const.points[idx]
        y = amp * np.einsum("crt,ct->cr", h, x) + noise
        best = ml_detect(y, h, amp, cand)
        return (int(np.count_nonzero(best // n != idx[:, 0]))
                + int(np.count_nonzero(best % n != idx[:, 1])))

    errors, done = _run_trials(chunk, trials, min_events, max_trials)
    return SerPoint(_snr_db(snr), errors / (2 * done), done)


def ser_sweep(scheme: SerScheme, snr_grid_db, trials: int, seed,
              min_events: int = 0, max_trials: int | None = None) -> list[SerPoint]:
    """SER at each grid point, with per-point substreams of `seed`."""
    if isinstance(scheme, str):
        scheme = SerScheme.parse(scheme)
    op = alamouti_ser if scheme is SerScheme.ALAMOUTI_16QAM else sm_ml_ser
    scheme_id = list(SerScheme).index(scheme)
    points = []
    for i, snr_db in enumerate(snr_grid_db):
        sub = np.random.SeedSequence([int(seed), scheme_id, i])
        point = op(10.0 ** (float(snr_db) / 10.0), trials, sub,
                   min_events=min_events, max_trials=max_trials)
        points.append(SerPoint(float(snr_db), point.ser, point.trials))
    return points
