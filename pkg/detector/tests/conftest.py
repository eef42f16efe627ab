from pathlib import Path

import numpy as np
import pytest
from PIL import Image

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def load(name):
    with Image.open(DATA / name) as im:
        return np.asarray(im)


@pytest.fixture(scope="session")
def two_people():
    return load("two_people.png")


@pytest.fixture(scope="session")
def portrait():
    return load("portrait.png")


@pytest.fixture(scope="session")
def blank():
    return load("blank.png")
