import re

import numpy as np
import pytest

from sizedist import Sample

# Verdict lines recorded by the acceptance tests; echoed after the run so the
# one-line-per-criterion summary is visible regardless of output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda line: int(re.search(r"\d+", line).group())
    for line in sorted(ACCEPTANCE_LINES, key=key):
        terminalreporter.write_line(line)


@pytest.fixture
def lognormal_sample():
    rng = np.random.default_rng(101)
    return Sample.from_values(np.exp(rng.normal(6.0, 2.0, 800)))


@pytest.fixture
def csv_file(tmp_path):
    """Factory writing a one-column CSV and returning its path."""

    def write(rows, name="data.csv"):
        path = tmp_path / name
        path.write_text("\n".join(str(r) for r in rows) + "\n")
        return path

    return write
