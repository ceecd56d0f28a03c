from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from icldt.generate import random_theory
from icldt.model import atom
from icldt.parser import parse_file

THEORIES = Path(__file__).resolve().parent.parent / "theories"


@pytest.fixture(scope="session")
def test_treat():
    return parse_file(THEORIES / "test_treat.icl")


@pytest.fixture(scope="session")
def full_obs():
    return parse_file(THEORIES / "full_obs.icl")


def atoms(*names):
    return frozenset(atom(n) for n in names)


def theory_from_seed(seed: int):
    return random_theory(np.random.default_rng(seed))


seeds = st.integers(min_value=0, max_value=2**32 - 1)
