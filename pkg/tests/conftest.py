import math
import os

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from usc_waveguide import SystemParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def usc():
    """Symmetric ultrastrong-coupling point used throughout."""
    return SystemParams()


@pytest.fixture
def uncoupled():
    return SystemParams(lambda1=0.0, lambda2=0.0)


@pytest.fixture
def asym():
    return SystemParams(lambda2=0.2)


@st.composite
def params_strategy(draw, symmetric=False, theta=None):
    l1 = draw(st.floats(0.0, 0.3))
    l2 = l1 if symmetric else draw(st.floats(0.0, 0.3))
    th = draw(st.floats(0.0, math.pi / 2)) if theta is None else theta
    delta = draw(st.floats(1.0, 3.0))
    return SystemParams(delta=delta, lambda1=l1, lambda2=l2, theta=th)


def random_params(n, seed=20240521):
    """Deterministic grid of ``n`` parameter draws over the stated ranges."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        l1, l2 = rng.uniform(0.0, 0.3, 2)
        out.append(SystemParams(delta=float(rng.uniform(1.0, 3.0)), lambda1=float(l1),
                                lambda2=float(l2), theta=float(rng.uniform(0.0, math.pi / 2))))
    return out


# --- acceptance summary ---------------------------------------------------------

ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
