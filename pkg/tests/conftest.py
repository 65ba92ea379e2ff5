import sys

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from se3beam import liegroup as lg


def random_spd(rng, n=6, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ np.diag(rng.uniform(1.0, cond, n)) @ Q.T


def random_poses(rng, n):
    R = Rotation.random(n, random_state=rng).as_matrix()
    return lg.Pose(R, rng.standard_normal((n, 3)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dominant_frequency(t, x, pad=64):
    """Peak of the Hann-windowed, zero-padded spectrum, refined by a log-parabola fit."""
    x = np.asarray(x, float) - np.mean(x)
    dt = t[1] - t[0]
    n = pad * len(x)
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x)), n))
    k = 1 + int(np.argmax(spec[1:]))
    a, b, c = np.log(spec[k - 1 : k + 2])
    shift = 0.5 * (a - c) / (a - 2 * b + c)
    return (k + shift) / (n * dt)


def euler_bernoulli_f1(L, E, rho, radius):
    A = np.pi * radius**2
    I = np.pi * radius**4 / 4
    return 1.8751**2 / (2 * np.pi) * np.sqrt(E * I / (rho * A * L**4))


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
