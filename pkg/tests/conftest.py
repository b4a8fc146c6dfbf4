import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from paramdp.model import (AR1Weights, BatteryParams, Instance,
                           TariffSchedule)
from paramdp.scenario import NoiseModel


@pytest.fixture
def battery():
    return BatteryParams()


def make_instance(horizon, alpha=None, beta=None, battery=None, penalty=2.0,
                  prices=None, soc0=0.0, gen0=0.0):
    battery = battery or BatteryParams()
    if prices is None:
        tariff = TariffSchedule.flat_peak(horizon, dt_hours=battery.dt_hours,
                                          penalty=penalty)
    else:
        tariff = TariffSchedule(prices=np.asarray(prices, dtype=float),
                                penalty=penalty)
    alpha = np.full(horizon, 0.5) if alpha is None else np.asarray(alpha, float)
    beta = np.full(horizon, 0.2) if beta is None else np.asarray(beta, float)
    return Instance(battery=battery, tariff=tariff,
                    ar1=AR1Weights(alpha=alpha, beta=beta),
                    soc0=soc0, gen0=gen0)


def uniform_noise(horizon, atoms):
    """Same finite support at every stage, uniform probabilities."""
    atoms = np.asarray(atoms, dtype=float)
    probs = np.full(atoms.size, 1.0 / atoms.size)
    return NoiseModel(atoms=tuple(atoms.copy() for _ in range(horizon)),
                      probs=tuple(probs.copy() for _ in range(horizon)))


@pytest.fixture
def tiny_instance():
    """T=4 benchmark-shaped instance used across modules."""
    return make_instance(4, alpha=[0.5, 0.6, 0.5, 0.4],
                         beta=[0.2, 0.25, 0.15, 0.1],
                         prices=[0.4, 0.6, 0.4, 0.6, 0.4])


@pytest.fixture
def tiny_noise():
    return uniform_noise(4, [-0.1, 0.0, 0.12])
