import pytest

from rds_sync.boolnet import p53
from rds_sync.core import MapTable, NoiseModel, StateSpace, load_model


@pytest.fixture(scope="session")
def four_state():
    return load_model(p53.fixture_path("four_state.json"))


@pytest.fixture(scope="session")
def p53_fixture():
    return p53.load_fixture()


@pytest.fixture(scope="session")
def p53_model(p53_fixture):
    return p53.p53_model(fixture=p53_fixture)


def single_map_model(table):
    space = StateSpace.range(len(table))
    return NoiseModel((MapTable(space, table),), (1,))


@pytest.fixture
def identity4():
    return single_map_model([0, 1, 2, 3])


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        ok, detail = module.RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
