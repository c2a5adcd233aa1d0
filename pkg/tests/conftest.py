from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from fruiter.corpus import load_corpus
from fruiter.model import CanonicalMap

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

REPO = Path(__file__).resolve().parents[1]
SIGNIN = REPO / "corpora" / "signin"


@pytest.fixture(scope="session")
def signin_corpus():
    return load_corpus(SIGNIN)


@pytest.fixture
def signin_maps():
    src = CanonicalMap("src", {"e1": "signin_email", "e2": "signin_password", "e3": "signin_button"})
    tgt = CanonicalMap("tgt", {"t1": "signin_email", "t2": "search_bar", "t4": "signin_button"})
    return src, tgt
