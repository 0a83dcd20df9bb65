import numpy as np
import pytest

from agency_phenotyper.model import GenerativeModel
from agency_phenotyper.prob import Categorical, Channel
from agency_phenotyper.tmaze import build_canonical_model


def random_categorical(rng, n, labels=None, alpha=1.0):
    labels = labels or tuple(f"x{i}" for i in range(n))
    return Categorical(labels, rng.dirichlet(np.full(n, alpha)))


def random_channel(rng, n_in, n_out, alpha=1.0):
    return Channel(
        tuple(f"a{i}" for i in range(n_in)),
        tuple(f"o{j}" for j in range(n_out)),
        rng.dirichlet(np.full(n_out, alpha), size=n_in),
    )


def random_model(rng, n_states=None, n_obs=None, n_actions=None, alpha=1.0):
    S = n_states or int(rng.integers(2, 6))
    O = n_obs or int(rng.integers(2, 6))
    U = n_actions or int(rng.integers(2, 4))
    return GenerativeModel(
        tuple(f"s{i}" for i in range(S)),
        tuple(f"o{i}" for i in range(O)),
        tuple(f"u{i}" for i in range(U)),
        A=rng.dirichlet(np.full(O, alpha), size=S),
        B=rng.dirichlet(np.full(S, alpha), size=(U, S)),
        C=rng.normal(size=O),
        D=rng.dirichlet(np.ones(S)),
        name="random",
    )


@pytest.fixture
def canonical():
    return build_canonical_model()


@pytest.fixture
def t1_channel():
    """The first-step channel of the minimal maze, rows Left, Right, Cue."""
    return Channel(
        ("Left", "Right", "Cue"),
        ("Cheese", "Shock", "RightObs", "LeftObs"),
        [[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]],
    )


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    lines = request.config._acceptance_lines

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f"  ({detail})"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
