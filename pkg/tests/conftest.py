"""Shared fixtures.

The experiment-matched decoherent quench at n_fock = 40 costs tens of
seconds, so it runs once per session and several test modules read from
the same trajectory.
"""

import numpy as np
import pytest

from rabi_spt.hilbert import HilbertSpec
from rabi_spt.model import DeviceParams, table_s2
from rabi_spt.quench import (
    TOMOGRAPHY_TIME,
    LindbladSpec,
    QuenchSchedule,
    run_quench,
)


@pytest.fixture(scope="session")
def dev() -> DeviceParams:
    return table_s2()


@pytest.fixture(scope="session")
def decoherent_quench(dev):
    """Effective-model quench with the measured decoherence channels."""
    lind = LindbladSpec.from_device(dev, t_phi_override=0.5)
    return run_quench(dev, QuenchSchedule(), lind, spec=HilbertSpec(40), dt=1e-3)


@pytest.fixture(scope="session")
def tomography_state(decoherent_quench):
    """Joint state at the snapshot time used for state analysis."""
    return decoherent_quench.state_at(TOMOGRAPHY_TIME)


@pytest.fixture(scope="session")
def closed_quench(dev):
    """Same ramp without decoherence."""
    return run_quench(dev, QuenchSchedule(), None, spec=HilbertSpec(40), dt=1e-3)


@pytest.fixture
def rng():
    """Fresh fixed-seed generator per test, so order never matters."""
    return np.random.default_rng(20260815)
