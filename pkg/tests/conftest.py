"""Collects the acceptance-criterion outcomes and prints one line per criterion."""

import pytest

TITLES = {
    1: "exact-algebra identities (d in {2,3}, n <= 5)",
    2: "simplicity of the zeros of F_n",
    3: "black-box vs expanded-coefficient roots",
    4: "L1 estimate on a 2048^2 grid with affine growth",
    5: "center discrepancy margins for d in {2,3}, n <= 10",
    6: "Per*(n,0) factorization through F_m zeros",
    7: "averaged identity vs 2^14-node circle quadrature",
    8: "multiplier-divisor margins (atomic and averaged)",
    9: "uniform lower bound |F_n| >= exp(-t_n) on the boundary",
    10: "infrastructure properties",
}

_outcomes: dict[int, list[str]] = {}
_notes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(k): test belongs to acceptance criterion k")


def pytest_runtest_logreport(report):
    k = dict(report.user_properties).get("criterion")
    if k is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(k, []).append(report.outcome)
        for key, val in report.user_properties:
            if key == "note":
                _notes.setdefault(k, []).append(val)


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    mark = request.node.get_closest_marker("acceptance")
    if mark is not None:
        record_property("criterion", mark.args[0])


@pytest.fixture
def note(record_property):
    """Attach a short measured value to the acceptance summary line."""
    return lambda text: record_property("note", text)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(TITLES):
        if k not in _outcomes:
            continue
        ok = all(o == "passed" for o in _outcomes[k])
        extra = "; ".join(_notes.get(k, []))
        tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {TITLES[k]}"
                      + (f"  [{extra}]" if extra else ""))
