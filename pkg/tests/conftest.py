import logging

import numpy as np
import pytest

from src.core.constants import PFP_TABLE_FILE
from src.core.geometry import load_pfp_table
from src.models.config import default_intrinsics


@pytest.fixture(scope="session")
def pfps():
    return load_pfp_table(PFP_TABLE_FILE)


@pytest.fixture(scope="session")
def intrinsics():
    return default_intrinsics()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def root_logging():
    """Restore the root logger after ErrorHandler replaced its handlers"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield root
    for h in root.handlers:
        if h not in handlers:
            h.close()
    root.handlers[:] = handlers
    root.setLevel(level)
