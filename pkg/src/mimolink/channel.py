"""Time/frequency-selective Rayleigh MIMO channel generation.

The channel of each transmit/receive antenna pair is a tapped delay line
h(t, tau) = sum_j sqrt(alpha_j) c_j(t) delta(tau - tau_j) whose tap gains
c_j(t) are independent, zero-mean, unit-variance complex Gaussian processes
with a Clarke-Jakes Doppler spectrum, i.e. ensemble autocorrelation
E[c(t) c*(t+tau)] = J0(2 pi f_d tau).

Synthesis is by sum of sinusoids: per tap and per quadrature component,
`generator_order` sinusoids with frequencies 2 pi f_d cos(theta_n) (arrival
angles theta_n uniform on [0, 2 pi)) and independent uniform phases. This
gives exact marginal statistics at arbitrary sample times with no filter
warm-up, which suits the sparse resource-block time grid (a handful of
OFDM-symbol midpoints per H-ARQ round).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, SystemConfig

# 12-ray typical-urban power delay profile: (delay in us, mean power in dB).
TU_DELAYS_US = (0.0, 0.1, 0.3, 0.5, 0.8, 1.1, 1.3, 1.7, 2.3, 3.1, 3.2, 5.0)
TU_POWERS_DB = (-4.0, -3.0, 0.0, -2.6, -3.0, -5.0, -7.0, -5.0, -6.5, -8.6, -11.0, -10.0)


@dataclass(frozen=True)
class PowerDelayProfile:
    """Multipath ray delays (seconds) and linear powers normalized to unit sum."""

    delays_s: tuple[float, ...]
    powers: tuple[float, ...]

    def __post_init__(self):
        delays = np.asarray(self.delays_s, dtype=float)
        powers = np.asarray(self.powers, dtype=float)
        if delays.size == 0 or delays.size != powers.size:
            raise ValueError("profile needs matching, nonempty delay and power lists")
        if delays[0] < 0 or np.any(np.diff(delays) <= 0):
            raise ValueError("tap delays must be nonnegative and strictly increasing")
        if np.any(powers <= 0):
            raise ValueError("tap powers must be positive")
        if abs(powers.sum() - 1.0) > 1e-12:
            raise ValueError("tap powers must be normalized to unit sum")

    @classmethod
    def from_db(cls, delays_us, powers_db) -> "PowerDelayProfile":
        """Build from (us, dB) pairs, converting to linear and normalizing."""
        delays = tuple(float(d) * 1e-6 for d in delays_us)
        lin = np.power(10.0, np.asarray(powers_db, dtype=float) / 10.0)
        lin = lin / lin.sum()
        return cls(delays, tuple(float(p) for p in lin))

    def __len__(self) -> int:
        return len(self.delays_s)

    def rms_delay_spread(self) -> float:
        """sqrt(E[tau^2] - E[tau]^2) under the normalized tap powers."""
        tau = np.asarray(self.delays_s)
        p = np.asarray(self.powers)
        mean = float(np.dot(p, tau))
        return math.sqrt(float(np.dot(p, tau**2)) - mean**2)

    def frequency_correlation(self, delta_f_hz) -> np.ndarray:
        """E[h(f) h*(f + delta_f)] = sum_j alpha_j exp(+i 2 pi delta_f tau_j)."""
        df = np.asarray(delta_f_hz, dtype=float)
        tau = np.asarray(self.delays_s)
        p = np.asarray(self.powers)
        return np.exp(2j * np.pi * df[..., None] * tau) @ p


def build_tu_profile() -> PowerDelayProfile:
    """The built-in 12-ray TU profile (unit-normalized linear powers)."""
    return PowerDelayProfile.from_db(TU_DELAYS_US, TU_POWERS_DB)


def build_flat_profile() -> PowerDelayProfile:
    """Single ray at zero delay: frequency-flat."""
    return PowerDelayProfile((0.0,), (1.0,))


def resolve_profile(config: SystemConfig) -> PowerDelayProfile:
    """Look up the configured profile name (built-ins TU12/FLAT plus catalog)."""
    name = config.profile
    upper = name.upper()
    if upper == "TU12":
        return build_tu_profile()
    if upper == "FLAT":
        return build_flat_profile()
    try:
        entry = config.custom_profiles[name]
    except KeyError:
        raise ConfigError(f"unknown power delay profile {name!r}") from None
    try:
        return PowerDelayProfile.from_db(entry["delay_us"], entry["power_db"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"profile {name!r}: {exc}") from exc


@dataclass(frozen=True)
class DopplerSpec:
    """Clarke-Jakes fading parameters for one tap process."""

    max_doppler_hz: float
    generator_order: int = 64

    def __post_init__(self):
        if self.max_doppler_hz <= 0:
            raise ValueError("max Doppler frequency must be positive")
        if self.generator_order < 8:
            raise ValueError("generator_order must be >= 8")


@dataclass(frozen=True)
class ToneAllocation:
    """Which of the usable OFDM tones carry this user's resource block."""

    usable_tones: int
    allocated: tuple[int, ...]
    tone_spacing_hz: float

    def __post_init__(self):
        idx = np.asarray(self.allocated, dtype=int)
        if idx.size == 0:
            raise ValueError("allocation must contain at least one tone")
        if idx[0] < 0 or np.any(np.diff(idx) <= 0) or idx[-1] >= self.usable_tones:
            raise ValueError("tone indices must be strictly increasing and < usable_tones")

    def frequencies(self) -> np.ndarray:
        """Tone baseband frequencies; tone i sits at i * tone_spacing."""
        return np.asarray(self.allocated, dtype=float) * self.tone_spacing_hz


def case_study_allocation(config: SystemConfig) -> ToneAllocation:
    """Spread rb_tones uniformly over the usable band (every 50th tone here)."""
    stride = config.usable_tones // config.rb_tones
    if stride < 1:
        raise ConfigError("more resource-block tones than usable tones")
    allocated = tuple(range(0, stride * config.rb_tones, stride))
    return ToneAllocation(config.usable_tones, allocated, config.tone_spacing_hz)


# --------------------------------------------------------------------------
# Sum-of-sinusoids tap processes
# --------------------------------------------------------------------------

def _draw_sinusoids(spec: DopplerSpec, rng: np.random.Generator, shape=()):
    """Draw sinusoid frequencies/phases for `shape` independent tap processes.

    Draw order is fixed (angles then phases, in-phase then quadrature) so a
    given substream always produces the same processes.
    Returns (omega_i, phi_i, omega_q, phi_q), each of shape (*shape, order).
    """
    full = tuple(shape) + (spec.generator_order,)
    two_pi = 2.0 * np.pi
    angles_i = rng.uniform(0.0, two_pi, size=full)
    phi_i = rng.uniform(0.0, two_pi, size=full)
    angles_q = rng.uniform(0.0, two_pi, size=full)
    phi_q = rng.uniform(0.0, two_pi, size=full)
    wd = two_pi * spec.max_doppler_hz
    return wd * np.cos(angles_i), phi_i, wd * np.cos(angles_q), phi_q


def _evaluate_at_times(params, times) -> np.ndarray:
    """Direct evaluation of the drawn processes at arbitrary times.

    Each quadrature is sum_n cos(omega_n t + phi_n) / sqrt(order), giving a
    zero-mean complex process with E|c|^2 = 1.
    """
    omega_i, phi_i, omega_q, phi_q = params
    t = np.asarray(times, dtype=float)
    order = omega_i.shape[-1]
    scale = 1.0 / math.sqrt(order)
    x_i = np.cos(omega_i[..., None] * t + phi_i[..., None]).sum(axis=-2)
    x_q = np.cos(omega_q[..., None] * t + phi_q[..., None]).sum(axis=-2)
    return scale * (x_i + 1j * x_q)


def _quadrature_on_grid(omega, phi, round_spacing_s, n_rounds, symbol_duration_s, n_symbols):
    """One quadrature at times r*round_spacing + (s+1/2)*symbol_duration.

    Uses cos(a+b+c) = Re{e^ia e^ib e^ic} with the per-round and per-symbol
    rotations built by repeated multiplication of the unit phasors
    e^{i omega round_spacing} and e^{i omega symbol_duration}; algebraically
    identical to the direct cosine evaluation. Returns (*shape, R, S) reals.
    """
    rot_round = np.exp(1j * omega * round_spacing_s)
    rot_sym = np.exp(1j * omega * symbol_duration_s)
    # phase at r = 0, s = 0 includes the half-symbol midpoint offset
    coef = np.exp(1j * (phi + 0.5 * omega * symbol_duration_s))

    p = np.empty(omega.shape + (n_rounds,), dtype=complex)
    p[..., 0] = coef
    for r in range(1, n_rounds):
        p[..., r] = p[..., r - 1] * rot_round
    q = np.empty(omega.shape + (n_symbols,), dtype=complex)
    q[..., 0] = 1.0
    for s in range(1, n_symbols):
        q[..., s] = q[..., s - 1] * rot_sym
    # sum over sinusoids: (*shape, R, order) @ (*shape, order, S)
    total = np.matmul(p.swapaxes(-1, -2), q)
    return total.real / math.sqrt(omega.shape[-1])


def _evaluate_on_grid(params, round_spacing_s, n_rounds, symbol_duration_s, n_symbols):
    omega_i, phi_i, omega_q, phi_q = params
    x_i = _quadrature_on_grid(omega_i, phi_i, round_spacing_s, n_rounds,
                              symbol_duration_s, n_symbols)
    x_q = _quadrature_on_grid(omega_q, phi_q, round_spacing_s, n_rounds,
                              symbol_duration_s, n_symbols)
    return x_i + 1j * x_q


@dataclass(frozen=True)
class TapProcesses:
    """A batch of drawn tap processes, evaluable at arbitrary times."""

    params: tuple

    def at(self, times) -> np.ndarray:
        """Gains with shape (*batch_shape, len(times))."""
        return _evaluate_at_times(self.params, np.asarray(times, dtype=float))


def draw_tap_processes(spec: DopplerSpec, shape, rng: np.random.Generator) -> TapProcesses:
    """Draw `shape` independent Clarke-Jakes processes for later evaluation."""
    return TapProcesses(_draw_sinusoids(spec, rng, tuple(shape)))


def generate_tap_gains(spec: DopplerSpec, sample_times, rng: np.random.Generator) -> np.ndarray:
    """Sample one Clarke-Jakes tap process c(t) at the given times.

    Zero-mean, unit-variance complex gains whose ensemble autocorrelation
    approximates J0(2 pi f_d tau). Empty `sample_times` yields an empty array.
    """
    t = np.asarray(sample_times, dtype=float)
    if t.ndim > 1:
        raise ValueError("sample_times must be one-dimensional")
    if t.size and np.any(np.diff(t) < 0):
        raise ValueError("sample_times must be non-decreasing")
    if t.size == 0:
        return np.empty(0, dtype=complex)
    params = _draw_sinusoids(spec, rng)
    return _evaluate_at_times(params, t)


def frequency_response(profile: PowerDelayProfile, tap_gains, tone_freqs) -> np.ndarray:
    """Response at frequency f: sum_j sqrt(alpha_j) c_j exp(-i 2 pi f tau_j).

    `tap_gains` holds one complex gain per tap in its last axis (leading axes
    broadcast); returns one response per entry of `tone_freqs`.
    """
    gains = np.asarray(tap_gains, dtype=complex)
    if gains.shape[-1] != len(profile):
        raise ValueError(
            f"expected {len(profile)} tap gains, got shape {gains.shape}"
        )
    freqs = np.asarray(tone_freqs, dtype=float)
    tau = np.asarray(profile.delays_s)
    amps = np.sqrt(np.asarray(profile.powers))
    # (J, K) steering matrix, one column per tone
    steer = amps[:, None] * np.exp(-2j * np.pi * tau[:, None] * freqs)
    return gains @ steer


# --------------------------------------------------------------------------
# Channel blocks
# --------------------------------------------------------------------------

@dataclass
class ChannelBlock:
    """All channel matrices of one coded block.

    matrices[k, i] is the n_r x n_t matrix of tone-symbol slot i in H-ARQ
    round k; slots are ordered symbol-major (slot = symbol * n_tones + tone).
    """

    matrices: np.ndarray

    def __post_init__(self):
        if self.matrices.ndim != 4:
            raise ValueError("matrices must have shape (rounds, slots, n_r, n_t)")

    @property
    def rounds(self) -> int:
        return self.matrices.shape[0]

    @property
    def slots_per_round(self) -> int:
        return self.matrices.shape[1]

    @property
    def n_r(self) -> int:
        return self.matrices.shape[2]

    @property
    def n_t(self) -> int:
        return self.matrices.shape[3]

    def prefix(self, k: int) -> "ChannelBlock":
        """The first k H-ARQ rounds."""
        if not 1 <= k <= self.rounds:
            raise ValueError(f"prefix length {k} outside 1..{self.rounds}")
        return ChannelBlock(self.matrices[:k])


def generate_block(config: SystemConfig, allocation: ToneAllocation | None,
                   rng: np.random.Generator) -> ChannelBlock:
    """Draw one coded block's channel matrices.

    Selective profiles (TU12 and catalog entries) get independent tap
    processes per antenna pair, evaluated at the OFDM-symbol midpoints of
    every H-ARQ round (rounds offset by the round spacing) and transformed
    to the allocated tone frequencies. The FLAT profile is the quasi-static
    reference: a single i.i.d. CN(0,1) matrix per round, constant over the
    block, so each coded block sees exactly one fading realization per round.
    """
    if config.profile.upper() == "FLAT":
        shape = (config.harq_rounds, 1, config.n_r, config.n_t)
        h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
        return ChannelBlock(h)

    profile = resolve_profile(config)
    if allocation is None:
        allocation = case_study_allocation(config)
    spec = DopplerSpec(config.effective_doppler_hz, config.generator_order)
    n_taps = len(profile)
    rounds = config.harq_rounds
    symbols = config.symbols_per_rb

    params = _draw_sinusoids(spec, rng, shape=(config.n_r, config.n_t, n_taps))
    # tap gains on the (round, symbol) grid: (n_r, n_t, taps, R, S)
    gains = _evaluate_on_grid(params, config.round_spacing_ms * 1e-3, rounds,
                              config.symbol_duration_s, symbols)

    tau = np.asarray(profile.delays_s)
    amps = np.sqrt(np.asarray(profile.powers))
    steer = amps[:, None] * np.exp(-2j * np.pi * tau[:, None] * allocation.frequencies())
    # response per (round, symbol, tone, rx, tx)
    resp = np.einsum("xyjrs,jk->rskxy", gains, steer)
    n_tones = len(allocation.allocated)
    h = resp.reshape(rounds, symbols * n_tones, config.n_r, config.n_t)
    return ChannelBlock(np.ascontiguousarray(h))
