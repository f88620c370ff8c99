import numpy as np
import pytest
from hypothesis import settings

from bdboost.network import NetworkConfig, sample_channels

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_psd(rng, m, rank=None, scale=1.0):
    rank = m if rank is None else rank
    A = rng.standard_normal((m, rank)) + 1j * rng.standard_normal((m, rank))
    return scale * (A @ A.conj().T) / m


def random_hermitian(rng, m):
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return 0.5 * (A + A.conj().T)


@pytest.fixture
def cfg():
    return NetworkConfig.from_dims((3, 2, 3, 2), snr_db=10.0)


@pytest.fixture
def ch(cfg):
    return sample_channels(cfg, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion, shown in the terminal summary."""
    rec = {}

    def record(ok, detail):
        rec.update(ok=bool(ok), detail=detail)
        return bool(ok)

    yield record
    if not rec:
        rec.update(ok=False, detail="raised before reporting")
    line = f"{'PASS' if rec['ok'] else 'FAIL'}  {request.node.name}: {rec['detail']}"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
