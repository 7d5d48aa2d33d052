from __future__ import annotations

import pytest

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            ident, desc = marker.args
            item.user_properties.append(("acceptance", (ident, desc)))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "acceptance" not in props:
        return
    ident, desc = props["acceptance"]
    if report.when == "call" or report.outcome != "passed":
        outcome = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        _ACCEPTANCE[ident] = (outcome, desc)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(_ACCEPTANCE, key=lambda s: int(s[2:])):
        outcome, desc = _ACCEPTANCE[ident]
        terminalreporter.write_line(f"{ident:<5} {outcome:<5} {desc}")


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20240611)
