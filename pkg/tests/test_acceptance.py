"""Exit criteria of the build, one test per report line.

Each criterion runs once per session; its lines are cached, printed as they
are produced and repeated in the terminal summary.  Lines marked INFO are
diagnostics and pass by definition.
"""
import pytest

from dioecious import acceptance

from .conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

XI_REASON = (
    "the sliding xi flow does not commute with scaling once A_theta leaves the linear pieces "
    "(theta > 0.176 puts A_theta above v = 0.6); see line 4e' for the eta flow and 4e'' for "
    "the largest theta at which the xi certificate holds"
)


def _params():
    out = []
    for key, ids in acceptance.LINE_IDS.items():
        for line_id in ids:
            marks = [pytest.mark.xfail(strict=True, reason=XI_REASON)] if line_id == "4e" else []
            out.append(pytest.param(key, line_id, id=line_id, marks=marks))
    return out


def _lines(key):
    if key not in ACCEPTANCE_LINES:
        lines = acceptance.CRITERIA[key]()
        for line in lines:
            print(line.format())
        ACCEPTANCE_LINES[key] = lines
    return ACCEPTANCE_LINES[key]


@pytest.mark.parametrize("key, line_id", _params())
def test_criterion_line(key, line_id):
    by_id = {line.line_id: line for line in _lines(key)}
    assert set(by_id) == set(acceptance.LINE_IDS[key]), "every check maps to exactly one line"
    line = by_id[line_id]
    print(line.format())
    assert line.passed is not False, line.format()


def test_suite_passed_ignores_info_lines():
    ok = acceptance.CheckLine("x", "t", None, "diag")
    bad = acceptance.CheckLine("y", "t", False, "bad")
    assert acceptance.suite_passed([ok])
    assert not acceptance.suite_passed([ok, bad])
