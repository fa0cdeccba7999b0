import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from qot.secparams import SecurityParams  # noqa: E402


@pytest.fixture(scope="session")
def small_params():
    """Smallest toy configuration the OT runs with comfortably (about 0.1 s)."""
    return SecurityParams.toy(lambda_ot=512)


@pytest.fixture(scope="session")
def noisy_params():
    return SecurityParams.toy(lambda_ot=1024, alpha=0.006)
