from __future__ import annotations

from pathlib import Path

import pytest

from crosstutor.cohort import build_cohort
from crosstutor.model import load_shipped_pack
from crosstutor.rules import load_shipped_rules

CORPUS_DIR = Path(__file__).parent / "corpus"


@pytest.fixture(scope="session")
def pack():
    return load_shipped_pack()


@pytest.fixture(scope="session")
def rules():
    return load_shipped_rules()


@pytest.fixture(scope="session")
def cohort(pack):
    """Twenty finished sessions reproducing the reference study marginals."""
    return build_cohort(pack)


def corpus_source(name: str) -> str:
    return (CORPUS_DIR / name).read_text(encoding="utf-8").rstrip("\n")
