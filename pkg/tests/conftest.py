"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np

from pathvol.simulate import SamplePath


def make_path(values, delta: float = 0.01, theta: float = 0.0) -> SamplePath:
    """SamplePath from raw values on a uniform grid."""
    return SamplePath(theta=theta, delta=delta, values=np.asarray(values, dtype=float))


def random_positive_path(rng: np.random.Generator, length: int, delta: float = 0.01) -> SamplePath:
    """Positive path with lognormal multiplicative increments (not simulated)."""
    steps = rng.normal(0.0, 0.05, size=length - 1)
    values = np.exp(np.cumsum(np.concatenate([[rng.uniform(-1.0, 1.0)], steps])))
    return make_path(values, delta=delta)
