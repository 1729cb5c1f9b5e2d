import pytest

from cxlpod import construct, construct_symmetric, derive_regular_params


@pytest.fixture(scope="session")
def triangle():
    """Smallest regular pod: 3 hosts with 2 ports, 3 two-ported MHDs."""
    return construct(derive_regular_params(2, 2))


@pytest.fixture(scope="session")
def design_13():
    """Regular pod for X=4, N=4: 13 hosts, 13 MHDs."""
    return construct(derive_regular_params(4, 4))


@pytest.fixture(scope="session")
def symmetric_8x4():
    """Symmetric pod: 8 hosts all wired to the same 4 MHDs."""
    return construct_symmetric(8, 4)
