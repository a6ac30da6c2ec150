import random

import pytest

from finiagg import SpreadOffsets


@pytest.fixture
def rng():
    return random.Random(0xF1A99)


def random_offsets(rng: random.Random, k: int, d: int) -> SpreadOffsets:
    kd = k * d
    return SpreadOffsets(tuple(rng.sample(range(kd), d)), kd)


def random_row(rng: random.Random, kd: int, n_classes: int) -> tuple[int, ...]:
    return tuple(rng.randrange(n_classes) for _ in range(kd))
