"""Shared stream-building helpers."""

from __future__ import annotations

import numpy as np
import pytest

from gazeinspect import GazeSample

RATE_HZ = 60.0
PERIOD_US = round(1e6 / RATE_HZ)


def make_sample(
    t_us: int,
    hit,
    origin=(0.0, 0.0, 0.0),
    normal=(0.0, 0.0, -1.0),
) -> GazeSample:
    return GazeSample(
        t_us=int(t_us),
        origin=tuple(float(x) for x in origin),
        hit=tuple(float(x) for x in hit),
        normal=tuple(float(x) for x in normal),
    )


def cluster(
    center,
    n: int,
    t0_us: int = 0,
    origin=(0.0, 0.0, 0.0),
    normal=(0.0, 0.0, -1.0),
    jitter_m: float = 0.0,
    rng: np.random.Generator | None = None,
) -> list[GazeSample]:
    """n samples around `center` at the nominal 60 Hz period."""
    samples = []
    cx, cy, cz = center
    for i in range(n):
        if jitter_m > 0.0 and rng is not None:
            d = rng.normal(0.0, jitter_m, 3)
        else:
            d = (0.0, 0.0, 0.0)
        samples.append(
            make_sample(
                t0_us + i * PERIOD_US,
                (cx + d[0], cy + d[1], cz + d[2]),
                origin=origin,
                normal=normal,
            )
        )
    return samples


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
    return v / n


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
