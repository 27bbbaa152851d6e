import numpy as np
import pytest
from hypothesis import strategies as st

from models.highway import PointSet


def points(*values) -> PointSet:
    return PointSet(np.array(values, dtype=np.float64))


@st.composite
def dyadic_point_sets(draw, min_size=2, max_size=120):
    """Point sets on the grid k/1024, so every difference and sum is exact"""
    ticks = draw(st.lists(
        st.integers(min_value=-2 ** 20, max_value=2 ** 20),
        min_size=min_size, max_size=max_size, unique=True,
    ))
    return PointSet(np.sort(np.array(ticks, dtype=np.float64)) / 1024)


@pytest.fixture
def three_points() -> PointSet:
    return points(0.0, 0.5, 1.0)


@pytest.fixture
def chain_four() -> PointSet:
    return points(0.125, 0.25, 0.5, 1.0)


@pytest.fixture
def points_file(tmp_path):
    def write(*lines):
        path = tmp_path / "points.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path
    return write
