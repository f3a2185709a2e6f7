import random

import pytest

from qg4 import (
    Isotopy,
    PERMS,
    chain,
    g3,
    h3,
    linear,
    shifted_linear,
    xor2,
    z4,
)


@pytest.fixture(scope="session")
def base_tables():
    return {
        "xor2": xor2(),
        "z4": z4(),
        "g3": g3(),
        "h3": h3(),
        "l3": linear(3),
        "l4": linear(4),
        "sl3": shifted_linear(3),
        "sl4": shifted_linear(4),
        "chain5": chain(5),
        "chain6": chain(6),
    }


def random_isotopy(arity, rng: random.Random) -> Isotopy:
    return Isotopy(PERMS[rng.randrange(len(PERMS))] for _ in range(arity + 1))
