import pytest

from wbangraph.scheme import derive_params, generate_interleaved, generate_plain, to_graph


@pytest.fixture(scope="session")
def params_932():
    return derive_params(9, 3, 2)


@pytest.fixture(scope="session")
def g3_scheme(params_932):
    return generate_interleaved(params_932, 3)


@pytest.fixture(scope="session")
def g3(g3_scheme):
    return to_graph(g3_scheme)


@pytest.fixture(scope="session")
def plain_scheme(params_932):
    return generate_plain(params_932)


@pytest.fixture(scope="session")
def plain_graph(plain_scheme):
    return to_graph(plain_scheme)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
