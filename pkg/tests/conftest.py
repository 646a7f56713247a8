from __future__ import annotations

from pathlib import Path

import pytest

from frameblock import FrameTree

DATA_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture()
def listing_tree() -> FrameTree:
    """The canonical six-frame page: a local-frame chain on each side."""
    return FrameTree.build(
        [
            (1, "https://firstparty.com", None),
            (2, "about:blank", 1),
            (3, "about:blank", 2),
            (4, "https://thirdparty.com", 1),
            (5, "about:blank", 4),
            (6, "about:blank", 5),
        ]
    )
