import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def golden():
    from chaoscope.lattice import ForbiddenSet
    return ForbiddenSet.from_strings(["11"])
