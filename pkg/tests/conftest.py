from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import pytest

from decrn import ConstantHistory, parse_network

sys.path.insert(0, str(Path(__file__).parent))


def _data(name: str) -> str:
    return resources.files("decrn").joinpath("data").joinpath(name).read_text()


@pytest.fixture(scope="session")
def ex1():
    """Two-species cycle, k=(1,1,2), tau=(1,2,1)."""
    return parse_network(_data("example1.crn"))


@pytest.fixture(scope="session")
def ex2():
    """Reversible three-species chain, k=(1,1,1,1), tau=(1,2,3,4)."""
    return parse_network(_data("example2.crn"))


@pytest.fixture()
def ex1_history(ex1):
    return ConstantHistory([1.0, 2.0], tau_max=ex1.tau_max)


@pytest.fixture()
def ex2_history(ex2):
    return ConstantHistory([2.0, 3.0, 1.0], tau_max=ex2.tau_max)
