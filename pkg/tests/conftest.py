import numpy as np
import pytest

from subspace_loc import Reference, Source, SourceScene, UlaGeometry

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def half_wave():
    return UlaGeometry(8, 0.5, 1.0)


@pytest.fixture
def symmetric():
    return UlaGeometry(11, 0.25, 1.0, Reference.CENTER)


def far_scene(angles, sigma2=1.0, rho=0.0, seed=0, powers=None):
    powers = [1.0] * len(angles) if powers is None else powers
    return SourceScene([Source(a, power=p) for a, p in zip(angles, powers)],
                       noise_variance=sigma2, correlation=rho, seed=seed)


def near_scene(pairs, sigma2=1.0, rho=0.0, seed=0):
    return SourceScene([Source(a, r) for a, r in pairs], noise_variance=sigma2,
                       correlation=rho, seed=seed)


def random_hermitian(rng, m):
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return a + a.conj().T


try:
    from hypothesis import settings as _hyp_settings
except ImportError:  # pragma: no cover
    pass
else:
    _hyp_settings.register_profile("repro", derandomize=True, deadline=None)
    _hyp_settings.load_profile("repro")
