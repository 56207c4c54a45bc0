from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from armwing import parse_mechanism_file, validate_mechanism

DATA_DIR = Path(str(resources.files("armwing").joinpath("data")))
REFERENCE_PATH = DATA_DIR / "reference_armwing.json"
DEMO_PATH = DATA_DIR / "fourbar_demo.json"
GOLDEN_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def reference():
    """The bundled reference armwing, validated once per session.

    Treat it as read-only; tests that perturb geometry must go through
    with_parameters (which copies) or take reference_copy instead.
    """
    return validate_mechanism(parse_mechanism_file(REFERENCE_PATH))


@pytest.fixture()
def reference_copy(reference):
    return reference.copy()


@pytest.fixture(scope="session")
def demo_fourbar():
    return validate_mechanism(parse_mechanism_file(DEMO_PATH))
