import numpy as np
import pytest

from lefschetz.meshes import load_trisurf

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def log(criterion: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def meshes():
    return {g: load_trisurf(name) for g, name in
            enumerate(["sphere", "torus", "genus2", "genus3"])}


@pytest.fixture(scope="session")
def genus2(meshes):
    return meshes[2]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
