import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture
def repo_root():
    return ROOT


@pytest.fixture
def cli():
    path = os.environ.get("MARKOVLENS_CLI")
    if not path:
        pytest.skip("MARKOVLENS_CLI not set")
    return path
