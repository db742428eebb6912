import numpy as np
import pytest

from fermion_statesum.linalg import rng_from_seed

_acceptance: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = _markers.get(report.nodeid)
    if marker is None:
        return
    number, title = marker
    status = "PASS" if report.passed else "FAIL"
    if number not in _acceptance or status == "FAIL":
        _acceptance[number] = (status, title)


_markers: dict[str, tuple[int, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            _markers[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        status, title = _acceptance[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}")


@pytest.fixture
def rng():
    return rng_from_seed(20240611)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
