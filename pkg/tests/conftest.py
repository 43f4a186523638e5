"""Shared fixtures and the acceptance summary printed after the run."""

from __future__ import annotations

import re

import numpy as np
import pytest

from koszul.polyalg import Polynomial

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_acceptance: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def z2vars():
    return Polynomial.variable(2, 0), Polynomial.variable(2, 1)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None:
        return
    k = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = "; ".join(str(v) for key, v in report.user_properties if key == "detail")
        name = report.nodeid.split("::")[-1]
        _acceptance[k] = ("PASS" if report.outcome == "passed" else "FAIL", name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_acceptance):
        status, name, detail = _acceptance[k]
        line = f"criterion {k}: {status}  {name}"
        if detail:
            line += f"  [{detail}]"
        tr.write_line(line)
