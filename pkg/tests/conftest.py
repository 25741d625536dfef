import pytest

from gdw.solver import SolverConfig


@pytest.fixture(scope="session")
def solver_config():
    return SolverConfig(seed=7)


@pytest.fixture(scope="session")
def quantum_table_1024(solver_config):
    from gdw.solver import bound_table
    from gdw.structures import Filter

    return bound_table(1024, Filter.QUANTUM_ONLY, solver_config)


@pytest.fixture(scope="session")
def table_4(solver_config):
    from gdw.solver import bound_table

    return bound_table(4, config=solver_config)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {label}"
        ACCEPTANCE_LINES.append(line + (f"  [{detail}]" if detail else ""))
        print(ACCEPTANCE_LINES[-1])
        assert ok, line + " " + detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
