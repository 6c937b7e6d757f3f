from fractions import Fraction

import pytest

from src.encoding.ising import qubo_to_ising, to_qubo
from src.lattice.core import DesignEnergyModel, contact_map, parse_structure


@pytest.fixture
def square():
    """4-bead unit square; its only contact joins beads 0 and 3."""
    return parse_structure("RUL")


@pytest.fixture
def square_model(square):
    return DesignEnergyModel(contact_map(square), Fraction(11, 10), 2)


@pytest.fixture
def square_ising(square_model):
    return qubo_to_ising(to_qubo(square_model))
