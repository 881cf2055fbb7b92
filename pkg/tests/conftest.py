"""
Shared fixtures: the two bundled parameter sets and their equilibria.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from synchronverter.config import load_model_config
from synchronverter.equilibria import equilibria5
from synchronverter.error_handler import error_handler
from synchronverter.models import GridParams

CONFIG_DIR = Path(__file__).resolve().parents[1] / 'configs'
LOW_VOLTAGE = CONFIG_DIR / 'low_voltage.json'
HIGH_VOLTAGE = CONFIG_DIR / 'high_voltage.json'


@pytest.fixture
def example_a():
    """Low-voltage machine: (params, grid)."""
    return load_model_config(LOW_VOLTAGE)


@pytest.fixture
def example_b():
    """High-voltage machine: (params, grid)."""
    return load_model_config(HIGH_VOLTAGE)


@pytest.fixture
def equilibria_a(example_a):
    params, grid = example_a
    return equilibria5(params, grid)


@pytest.fixture
def equilibria_b(example_b):
    params, grid = example_b
    return equilibria5(params, grid)


@pytest.fixture
def negative_torque_a(example_a):
    """Low-voltage machine driven as a motor (T_m = -20 N·m)."""
    params, grid = example_a
    return replace(params, T_m=-20.0), grid


@pytest.fixture(autouse=True)
def clean_error_tracker():
    """Every test starts with an empty error history."""
    error_handler.error_tracker.clear()
    yield
    error_handler.error_tracker.clear()




@pytest.fixture
def random_configurations(example_a):
    """Factory of random feasible (params, grid, fraction) triples built on the low-voltage machine.

    ``fraction`` picks a field current inside I_f.
    """
    base, _ = example_a

    def generate(count, seed=11):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            grid = GridParams(V=rng.uniform(100.0, 10e3), w_g=314.159265, w_n=314.159265)
            yield replace(
                base,
                R_s=rng.uniform(0.01, 2.0),
                L_s=rng.uniform(1e-3, 0.05),
                n=1,
                m=rng.uniform(0.5, 50.0),
                T_m=rng.uniform(0.0, 2000.0),
            ), grid, rng.uniform()

    return generate
