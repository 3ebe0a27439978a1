import json

import numpy as np
import pytest

# five-project worked example: attribute, effort and binary similarity matrices
WORKED_X = np.array([
    [1, 0.8, 0.53, 0.67, 0.47],
    [0.8, 1, 0.33, 0.47, 0.67],
    [0.53, 0.33, 1, 0.87, 0],
    [0.67, 0.47, 0.87, 1, 0.13],
    [0.47, 0.67, 0, 0.13, 1],
])
WORKED_Y = np.array([
    [1, 0.93, 0.31, 0.60, 0.69],
    [0.93, 1, 0.24, 0.53, 0.76],
    [0.31, 0.24, 1, 0.71, 0],
    [0.60, 0.53, 0.71, 1, 0.29],
    [0.69, 0.76, 0, 0.29, 1],
])
WORKED_Z = np.array([
    [1, 1, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [0, 0, 1, 0, 1],
    [0, 0, 0, 1, 0],
    [0, 0, 1, 0, 1],
], dtype=float)
# row-wise ranks printed under the matrices; diagonal excluded
WORKED_X_RANKS = [[1, 3, 2, 4], [1, 4, 3, 2], [2, 3, 1, 4], [2, 3, 1, 4], [2, 1, 4, 3]]
WORKED_Y_RANKS = [[1, 4, 3, 2], [1, 4, 3, 2], [2, 3, 1, 4], [2, 3, 1, 4], [2, 1, 4, 3]]

TIED_Z = [1, 0, 1, 0, 1, 1, 0, 1]
TIED_Y = [0.5, 0.3, 0.7, 0.0, 0.9, 0.1, 0.4, 0.6]


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, schema, name="data"):
        csv_path = tmp_path / f"{name}.csv"
        csv_path.write_text(text)
        schema_path = tmp_path / f"{name}.schema.json"
        schema_path.write_text(json.dumps(schema))
        return csv_path, schema_path
    return _write


CRITERIA: dict[str, tuple[bool | None, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the assertion itself stays in the test."""
    name = request.node.name

    def _record(ok: bool | None, detail: str = "") -> bool | None:
        # None marks a conditional criterion that was skipped
        CRITERIA[name] = (None if ok is None else bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(CRITERIA.items()):
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}")
