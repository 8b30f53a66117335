import numpy as np
import pytest

from warpspec.gauge import Gauge
from warpspec.geometry import Euclidean, Hyperbolic, ProfileDriven, SinLogPert, WarpedModel
from warpspec.radial import AngularMode, ClosedFormSolution, Potential, separate


def fixture_matrix():
    """(name, model, gauge, delta) for the standard test models."""
    out = [
        ("euclidean-2", WarpedModel(2, 0.01, Euclidean()), Gauge(0.0, 1.0), 0.0),
        ("euclidean-3", WarpedModel(3, 0.01, Euclidean()), Gauge(0.0, 2.0), 0.0),
        ("hyperbolic-2", WarpedModel(2, 0.5, Hyperbolic()), Gauge(1.0, 0.0), 0.0),
    ]
    for d in (0.1, 0.2, 0.3):
        out.append((f"profile-{d}", WarpedModel(3, 1.0, ProfileDriven(1.0, 0.0, SinLogPert(d))),
                    Gauge(1.0, 0.0), d))
    return out


FIXTURES = fixture_matrix()
FIXTURE_IDS = [f[0] for f in FIXTURES]


def sinc_solution(lam=1.0, r_min=0.01, r_max=300.0):
    """Closed-form ``sin(k r)/(k r)`` on Euclidean n=3 with ``V = 0``."""
    k = np.sqrt(lam)
    model = WarpedModel(3, r_min, Euclidean())
    eq = separate(model, Potential.zero(), lam, AngularMode(0, 3))
    return ClosedFormSolution(
        eq,
        lambda r: np.sin(k * r) / (k * r),
        lambda r: np.cos(k * r) / r - np.sin(k * r) / (k * r * r),
        lambda r: -k * np.sin(k * r) / r - 2 * np.cos(k * r) / r ** 2
        + 2 * np.sin(k * r) / (k * r ** 3),
        r_min, r_max)


def sinc_seed(lam, r):
    k = np.sqrt(lam)
    return (np.sin(k * r) / (k * r), np.cos(k * r) / r - np.sin(k * r) / (k * r * r))


@pytest.fixture(params=FIXTURES, ids=FIXTURE_IDS)
def fixture_model(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
