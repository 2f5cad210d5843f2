import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from systolab import (
    FiniteTableGroup,
    FreeAbelianGroup,
    FreeGroup,
    FreeProductGroup,
    TrivialGroup,
)


def z2_table():
    return FiniteTableGroup([[0, 1], [1, 0]], 0)


def s3_table():
    # symmetric group on 3 letters, elements indexed by permutation tuples
    perms = [
        (0, 1, 2), (1, 2, 0), (2, 0, 1),
        (0, 2, 1), (2, 1, 0), (1, 0, 2),
    ]
    index = {p: i for i, p in enumerate(perms)}

    def compose(p, q):
        return tuple(p[q[i]] for i in range(3))

    table = [[index[compose(p, q)] for q in perms] for p in perms]
    return FiniteTableGroup(table, 0)


@pytest.fixture(scope="session")
def group_zoo():
    """One representative per supported group class."""
    return {
        "trivial": TrivialGroup(),
        "free2": FreeGroup(2),
        "abelian2": FreeAbelianGroup(2),
        "finite_s3": s3_table(),
        "product_zz": FreeProductGroup([FreeGroup(1), FreeGroup(1)]),
    }
