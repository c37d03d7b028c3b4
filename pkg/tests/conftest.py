import pytest

import simplexfactor as sf


@pytest.fixture(scope="session")
def health_gender():
    return sf.load_dataset("health-gender")


@pytest.fixture(scope="session")
def education_readership():
    return sf.load_dataset("education-readership")


@pytest.fixture(scope="session")
def time_budget():
    return sf.load_dataset("time-budget")


@pytest.fixture(scope="session")
def hg_composition(health_gender):
    # (CompositionMatrix, RowMassVector) of the 5x2 health table
    return sf.row_normalize(health_gender.counts)


@pytest.fixture(scope="session")
def er_composition(education_readership):
    return sf.row_normalize(education_readership.counts)


@pytest.fixture(scope="session")
def tb_composition(time_budget):
    return sf.row_normalize(time_budget.counts)
