"""Incremental-redundancy H-ARQ termination and effective-rate accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HarqOutcome:
    """Result of one H-ARQ block: the round that decoded it, or outage.

    `terminated_round` is None when even the final accumulated mutual
    information does not exceed the initial rate (ties fail: decoding needs
    M_k strictly above the rate).
    """

    terminated_round: int | None
    initial_rate: float

    @property
    def is_outage(self) -> bool:
        return self.terminated_round is None


def termination_round(record, initial_rate: float) -> HarqOutcome:
    """Smallest k with M_k > initial_rate, else outage.

    `record` is an MiRecord or any nondecreasing sequence of accumulated
    mutual informations M_1..M_Kmax.
    """
    values = np.asarray(getattr(record, "values", record), dtype=float)
    crossed = np.nonzero(values > initial_rate)[0]
    if crossed.size == 0:
        return HarqOutcome(None, float(initial_rate))
    return HarqOutcome(int(crossed[0]) + 1, float(initial_rate))


def effective_rate(r_eps: float, expected_rounds: float, max_rounds: int = 6) -> float:
    """Long-term average transmitted rate: max_rounds * r_eps / E[K].

    The initial rate max_rounds * r_eps is paid out over the average number
    of rounds actually used.
    """
    if not 1.0 <= expected_rounds <= max_rounds:
        raise ValueError(
            f"expected_rounds {expected_rounds} outside [1, {max_rounds}]"
        )
    return max_rounds * r_eps / expected_rounds
