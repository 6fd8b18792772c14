import os
from pathlib import Path

import pytest

from logotree import ids, phono

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def rule_table():
    return ids.load_rule_table(DATA_DIR / "mini_ids.txt")


@pytest.fixture(scope="session")
def readings():
    return phono.parse_unihan_readings(DATA_DIR / "mini_readings.txt")


@pytest.fixture(scope="session")
def variants():
    return phono.parse_unihan_variants(DATA_DIR / "mini_variants.txt")


@pytest.fixture(scope="session")
def corpus(readings):
    entries, dropped = phono.build_corpus(readings, seed=7)
    assert dropped == 0
    return entries


def unihan_dir():
    """Directory with the full UniHan + IDS download, if the user provides one.

    Expected files: Unihan_Readings.txt, Unihan_Variants.txt, ids.txt.
    """
    path = os.environ.get("LOGOTREE_UNIHAN_DIR")
    if path and Path(path).is_dir():
        return Path(path)
    return None


requires_unihan = pytest.mark.skipif(
    unihan_dir() is None,
    reason="full UniHan dataset not available (set LOGOTREE_UNIHAN_DIR)")
