"""Shared helpers for the test suite."""

import numpy as np
import pytest

from minensim.core import NodeState, Position


def make_node(node_id, x, y, energy=2.0, initial_energy=None, msg_len=2000,
              sensed_data=2000, alive=True, awake=True):
    if initial_energy is None:
        initial_energy = energy
    return NodeState(id=node_id, pos=Position(float(x), float(y)),
                     energy=float(energy), initial_energy=float(initial_energy),
                     msg_len=int(msg_len), sensed_data=int(sensed_data),
                     alive=alive, awake=awake)


@pytest.fixture
def line_nodes():
    """Four nodes on a line, distinct energies, id order matches position."""
    return [make_node(i, 10.0 * i, 0.0, energy=2.0 - 0.1 * i) for i in range(4)]
