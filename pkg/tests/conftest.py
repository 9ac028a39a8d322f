"""Shared fixtures, plus the suite-wide quantile-guarantee audit.

Every ensemble produced anywhere in the suite is recorded; at session end
the order-statistic guarantee outage_prob(e, outage_rate(e, eps)) <= eps is
asserted for each one.
"""

import numpy as np
import pytest

from mimolink import montecarlo

_RECORDED = []


@pytest.fixture(scope="session", autouse=True)
def _record_all_ensembles():
    original = montecarlo.run_trials_multi

    def wrapper(*args, **kwargs):
        result = original(*args, **kwargs)
        _RECORDED.extend(result.values())
        return result

    montecarlo.run_trials_multi = wrapper
    yield
    montecarlo.run_trials_multi = original


def recorded_ensembles():
    return list(_RECORDED)


def guarantee_epsilon(ensemble) -> float:
    """The finest epsilon the ensemble supports (floor(eps*N) >= 1)."""
    return 0.01 if ensemble.trial_count >= 100 else 1.0 / ensemble.trial_count


def pytest_sessionfinish(session, exitstatus):
    failures = []
    for ens in _RECORDED:
        eps = guarantee_epsilon(ens)
        rate = montecarlo.outage_rate(ens, eps)
        prob = montecarlo.outage_prob(ens, rate)
        if prob > eps + 1e-12:
            failures.append((ens.strategy, ens.snr, ens.trial_count, eps, prob))
    print(f"\n[quantile guarantee] audited {len(_RECORDED)} ensembles: "
          f"{'OK' if not failures else f'{len(failures)} VIOLATIONS: {failures}'}")
    assert not failures, f"quantile guarantee violated: {failures}"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
