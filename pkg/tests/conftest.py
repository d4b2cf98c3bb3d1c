import pytest

import parastat.group_engine as ge


@pytest.fixture(scope="session")
def gamma():
    return ge.enumerate_group(ge.gamma_presentation())


@pytest.fixture(scope="session")
def gamma_pair(gamma):
    return ge.find_para_pair(gamma)


@pytest.fixture(scope="session")
def gamma_derived(gamma_pair):
    sigma, psi = gamma_pair
    inter = ge.solve_intertwiner(sigma, psi)
    return ge.derive_r(sigma, psi, inter), inter


@pytest.fixture(scope="session")
def small_groups():
    return {
        name: ge.enumerate_group(ge.NAMED_PRESENTATIONS[name]())
        for name in ("Z2", "S3", "D4")
    }
