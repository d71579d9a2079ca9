import pytest

from firewatch import load_rulebase


@pytest.fixture(scope="session")
def rulebase():
    return load_rulebase()


@pytest.fixture(scope="session")
def output_var(rulebase):
    return rulebase.output
