import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"

#: pass/fail lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def queretaro_graphml_path() -> Path:
    """The pinned Queretaro-class fixture; regenerated deterministically when
    missing (the generator is seeded, so the bytes are reproducible)."""
    path = FIXTURES / "queretaro.graphml"
    if not path.exists():
        subprocess.run(
            [sys.executable, str(REPO / "tools" / "make_queretaro_fixture.py"), str(path)],
            check=True,
            cwd=REPO,
        )
    return path


@pytest.fixture(scope="session")
def traffic_fixture_dir() -> Path:
    """100-timestep synthetic replay over a 400-node grid."""
    out = FIXTURES / "traffic"
    if not (out / "totals.csv").exists():
        subprocess.run(
            [
                sys.executable,
                str(REPO / "tools" / "make_traffic_fixture.py"),
                str(out),
                "--timesteps",
                "100",
            ],
            check=True,
            cwd=REPO,
        )
    return out


@pytest.fixture()
def small_net():
    from streetvis.model import EdgeRecord, MarkerRecord, NodeRecord, build_network

    nodes = [
        NodeRecord("a", 0.0, 0.0, {"weight": 1.0}),
        NodeRecord("b", 0.0, 0.01, {"weight": 2.0}),
        NodeRecord("c", 0.01, 0.01, {"weight": 3.0}),
    ]
    edges = [
        EdgeRecord("ab", "a", "b", ((0.0, 0.0), (0.0, 0.01)), {"weight": 10.0}),
        EdgeRecord("bc", "b", "c", ((0.0, 0.01), (0.01, 0.01)), {"weight": 20.0}),
        EdgeRecord("ca", "c", "a", ((0.01, 0.01), (0.005, 0.005), (0.0, 0.0)), {"weight": 40.0}),
    ]
    markers = [
        MarkerRecord("m1", 0.005, 0.005, popup_text="hello", data={"weight": 1.0}),
        MarkerRecord("m2", 0.0, 0.005, data={}),
    ]
    return build_network(nodes, edges, markers)
