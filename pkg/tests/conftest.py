import math

import pytest

from ivr.geometry import Vec3, make_square_array
from ivr.scene import LinearTrajectory, Scene, ground_truth
from ivr.synthesis import RadarConfig

F0 = 41.8e9
SPEED = 0.50131
RANGE = 0.755


@pytest.fixture
def geom():
    return make_square_array(7.26, F0)


@pytest.fixture
def nominal_traj():
    return LinearTrajectory.through(Vec3(0.0, 0.0, RANGE), SPEED, 0.0)


@pytest.fixture
def clean_complex():
    return RadarConfig(baseband_mode="complex_iq", snr_db=None, highpass_cutoff=0.0)


def level_pass(phi_v=0.0, beta=0.0, R=RANGE, speed=SPEED, half_span=2.0):
    return LinearTrajectory.through(Vec3(0.0, 0.0, R), speed, phi_v, beta, half_span=half_span)


def wrap(a):
    return (a + 180.0) % 360.0 - 180.0


ACCEPTANCE: dict = {}
"criterion number -> list of (check, passed, detail), filled by test_acceptance."


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        ok = all(passed for _, passed, _ in checks)
        tr.write_line(f"CRITERION {number}: {'PASS' if ok else 'FAIL'}")
        for name, passed, detail in checks:
            tr.write_line(f"    [{'ok' if passed else 'FAIL'}] {name}: {detail}")
