"""Shared test fixtures for hcstream tests."""

import os
from collections.abc import Callable
from pathlib import Path
from unittest.mock import patch

import pytest

from hcstream.graph import WeightedGraph, save_graph
from hcstream.instances import clique, disjoint_union, path_vertices


@pytest.fixture
def k4() -> WeightedGraph:
    """Return the unit-weight complete graph on 4 vertices."""
    return clique(4)


@pytest.fixture
def triangle() -> WeightedGraph:
    """Return a unit-weight triangle."""
    return clique(3)


@pytest.fixture
def path3() -> WeightedGraph:
    """Return the path 0-1-2."""
    return path_vertices(3)


@pytest.fixture
def two_triangles() -> WeightedGraph:
    """Return two disjoint triangles on {0,1,2} and {3,4,5}."""
    return disjoint_union(clique(3), clique(3))


@pytest.fixture
def barbell() -> WeightedGraph:
    """Return two 8-cliques joined by the single edge (7, 8)."""
    g = disjoint_union(clique(8), clique(8))
    return WeightedGraph.from_edges(16, [*g.edges, (7, 8, 1.0)])


@pytest.fixture
def write_graph(tmp_path: Path) -> Callable[[WeightedGraph, str], Path]:
    """Return a helper that saves a graph under tmp_path."""

    def write(g: WeightedGraph, name: str = "graph.txt") -> Path:
        path = tmp_path / name
        save_graph(g, path)
        return path

    return write


@pytest.fixture
def mock_config_dir(tmp_path: Path):
    """Create a temporary config directory and patch config module paths."""
    config_dir = tmp_path / ".hcstream"
    config_file = config_dir / "config.toml"

    with (
        patch("hcstream.config.CONFIG_DIR", config_dir),
        patch("hcstream.config.CONFIG_FILE", config_file),
    ):
        yield {"dir": config_dir, "file": config_file}


@pytest.fixture
def clean_env():
    """Remove HC_* environment variables and restore after test."""
    env_vars = ["HC_SEED"]
    saved = {}

    for var in env_vars:
        if var in os.environ:
            saved[var] = os.environ.pop(var)

    yield

    for var, value in saved.items():
        os.environ[var] = value
    for var in env_vars:
        if var not in saved and var in os.environ:
            del os.environ[var]
