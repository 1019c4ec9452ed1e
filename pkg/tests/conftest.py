import pytest

from hydro_opt.harness import calibrate

# Lines collected by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def calibration_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cal") / "calibration.json"
    calibrate(0.75, path)
    return path


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
