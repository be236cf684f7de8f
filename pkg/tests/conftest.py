import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from renyires import Channel, Pmf

settings.register_profile(
    "property",
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
PROPERTY = settings.get_profile("property")


def _normalize(raw):
    a = np.asarray(raw, float)
    return a / a.sum()


def weights(k, floor=0.0):
    """Positive weight vectors of length k (entries >= floor)."""
    return st.lists(st.floats(min_value=max(floor, 1e-3), max_value=1.0), min_size=k, max_size=k).map(_normalize)


@st.composite
def pmf_pair(draw, min_k=2, max_k=5):
    k = draw(st.integers(min_k, max_k))
    p = Pmf.from_probs(draw(weights(k)))
    q = Pmf.from_probs(draw(weights(k)))
    return p, q


@st.composite
def channel(draw, nx=None, ny=None, max_k=4):
    nx = nx or draw(st.integers(2, max_k))
    ny = ny or draw(st.integers(2, max_k))
    rows = np.array([draw(weights(ny)) for _ in range(nx)])
    return Channel.from_matrix(rows)


@st.composite
def instance(draw, max_k=3):
    """(px, w, q) with strictly positive entries."""
    w = draw(channel(max_k=max_k))
    px = Pmf(w.input_alphabet, draw(weights(w.shape[0])))
    q = Pmf(w.output_alphabet, draw(weights(w.shape[1])))
    return px, w, q


def random_instance(rng, nx=2, ny=2):
    rows = rng.dirichlet(np.ones(ny), size=nx)
    w = Channel.from_matrix(rows)
    px = Pmf(w.input_alphabet, rng.dirichlet(np.ones(nx)))
    q = Pmf(w.output_alphabet, rng.dirichlet(np.ones(ny)))
    return px, w, q


@pytest.fixture
def bsc02():
    return Channel.bsc(0.2), Pmf.uniform(2)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
