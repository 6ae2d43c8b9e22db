import pytest

from vfalos.config import load_config

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def default_cfg():
    return load_config()


@pytest.fixture
def straight_cfg():
    """Short straight-line scenario, cheap enough for many tests."""
    cfg = load_config(overrides=["sim.duration=40", "disturbance.v_east=0.0"])
    cfg["path"] = {"type": "waypoints", "waypoints": [[0, 0], [200, 0]], "switching_radius": 2.0}
    return cfg


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda n: int(n.split()[0][2:])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
