from pathlib import Path

import pytest

from xulia.config import load_config_file

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


@pytest.fixture(scope="session")
def sample_config():
    return load_config_file(str(CONFIGS / "sample.xml"))


@pytest.fixture(scope="session")
def sample_config_path():
    return str(CONFIGS / "sample.xml")
