"""Shared models and helpers for the suite."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gosp.model import NeighborhoodSpec, validate

# 2dOP in normalised coordinates (the symmetric {-1,+1} steps generate a
# proper sublattice; this is the re-indexed form with drift 1/2)
TWO_D_OP = validate(NeighborhoodSpec(d=2, offsets=((0, 1), (1, 1))))

# asymmetric three-point model whose crossing paths need not share vertices
ASYM3 = validate(NeighborhoodSpec(d=2, offsets=((-1, 1), (0, 1), (2, 1))))

# symmetric three-point model: zero drift, planar
SYM3 = validate(NeighborhoodSpec(d=2, offsets=((-1, 1), (0, 1), (1, 1))))

# range-2 model mixing time steps
RANGE2 = validate(NeighborhoodSpec(d=2, offsets=((0, 1), (1, 2))))

# a three-dimensional model
THREE_D = validate(
    NeighborhoodSpec(d=3, offsets=((0, 0, 1), (1, 0, 1), (0, 1, 1)))
)

MODEL_POOL = [TWO_D_OP, ASYM3, SYM3, RANGE2, THREE_D]


@pytest.fixture
def two_d_op():
    return TWO_D_OP


@pytest.fixture
def asym3():
    return ASYM3


@pytest.fixture
def sym3():
    return SYM3


def snapshot_sites(state) -> set:
    """Occupied slab sites of a ProcessState as a set of tuples."""
    return set(state.occupied())


def model_file(tmp_path, model) -> str:
    import json

    path = tmp_path / "model.json"
    path.write_text(json.dumps(model.spec.to_mapping()) + "\n")
    return str(path)
