import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def _report(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ground_state():
    from sta_dirac.separation import bound_state

    return bound_state(0, -1, 0.5, 0.5)


@pytest.fixture(scope="session")
def coulomb_field():
    from sta_dirac.dhe import PotentialField
    from sta_dirac.separation import CoulombPotential

    return PotentialField(CoulombPotential(0.5))
