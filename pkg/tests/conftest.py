import numpy as np
import pytest

from sqpc.core import DeviceGeometry, SimulationConfig
from sqpc.sweep import Trace


def staircase(heights=(1.0, 2.0, 3.0), step_width=0.1, dv=0.001, noise=0.0, seed=7,
              V0=-0.5):
    """Ideal staircase: an off plateau at 0 followed by flat steps at ``heights``.

    Each level is ``step_width`` volts wide; levels change abruptly between
    two adjacent samples.
    """
    levels = (0.0,) + tuple(heights)
    n_per = int(round(step_width / dv))
    V = V0 + dv * np.arange(n_per * len(levels))
    G = np.repeat(levels, n_per).astype(float)
    if noise:
        G = G + np.random.default_rng(seed).normal(0.0, noise, G.size)
    return Trace(V_g=np.round(V, 12), G=G, model="fixture")


@pytest.fixture
def clean_staircase():
    return staircase()


def small_config(**kw):
    """A narrow lattice device that solves in milliseconds."""
    geom = kw.pop("geometry", DeviceGeometry(L_c=100.0, W_c=60.0, L_J=1.4, W_J=5.0,
                                             interfaces=kw.pop("interfaces", "one"),
                                             Z=kw.pop("Z", 0.0)))
    base = dict(device=geom, window_width=120.0, window_margin=20.0, s_length=20.0)
    base.update(kw)
    return SimulationConfig(**base)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
