"""Shared fixtures."""

import shutil
from pathlib import Path

import pytest

from comodi.extract import load_profile

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def comodi_home(tmp_path, monkeypatch) -> Path:
    """Keep config and logs of every test under its own temporary home."""
    home = tmp_path / "home"
    monkeypatch.setenv("COMODI_HOME", str(home))
    return home


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def c_profile():
    return load_profile("c_subset")


@pytest.fixture(scope="session")
def fortran_profile():
    return load_profile("fortran77")


@pytest.fixture
def workspace(tmp_path) -> Path:
    """A scratch copy of the source fixtures."""
    target = tmp_path / "work"
    shutil.copytree(FIXTURES / "sources", target)
    return target


@pytest.fixture(scope="session")
def c_compiler() -> str:
    """Path of a host C compiler; tests needing one are skipped without it."""
    for name in ("cc", "gcc", "clang"):
        found = shutil.which(name)
        if found:
            return found
    pytest.skip("no C compiler on PATH")
