"""
Shared fixtures for the edge-triangle laboratory tests.

Parameter points used across modules:
- the critical point (27/8, ln 2 - 3/2)
- a point on the critical curve, (4, q(4)) with q traced by the solver
- the Erdos-Renyi origin (0, 0) and the uniqueness point (1, 0)
"""
import pytest

from src.core.settings import reset_settings
from src.phase.solver import ModelParams, critical_curve_h


@pytest.fixture
def origin_params():
    """alpha = 0, h = 0: independent fair-coin edges."""
    return ModelParams(alpha=0.0, h=0.0)


@pytest.fixture
def uniqueness_params():
    """alpha = 1, h = 0: unique maximizer u* ~ 0.5847."""
    return ModelParams(alpha=1.0, h=0.0)


@pytest.fixture
def critical_params():
    return ModelParams.critical_point()


@pytest.fixture(scope="session")
def on_curve_params():
    """(4, q(4)) on the first-order curve."""
    return ModelParams(alpha=4.0, h=critical_curve_h(4.0))


@pytest.fixture
def fresh_settings(monkeypatch, tmp_path):
    """Settings rebuilt from a clean environment, writing results under tmp_path."""
    monkeypatch.setenv("ETLAB_OUTPUT_DIR", str(tmp_path / "results"))
    reset_settings()
    yield
    reset_settings()
