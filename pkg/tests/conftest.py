import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from plis.mirror import ScorePairVector

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# shared hand-checkable score fixture: candidates {0, 1, 3}, calibration {2}
FIXTURE_SX = np.array([0.1, 0.2, 0.7, 0.05])
FIXTURE_SY = np.array([0.9, 0.8, 0.3, 0.95])


@pytest.fixture
def fixture_scores() -> ScorePairVector:
    return ScorePairVector.from_scores(FIXTURE_SX, FIXTURE_SY)


def random_scores(rng: np.random.Generator, m: int) -> ScorePairVector:
    return ScorePairVector.from_scores(rng.random(m), rng.random(m))
