from importlib import resources
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

DATA = Path(str(resources.files("cstnet").joinpath("data")))


@pytest.fixture
def data_dir() -> Path:
    return DATA


def shipped(rel: str) -> Path:
    return DATA / rel
