import warnings

import pytest

from quadsense import IntegratorConfig, SystemParams, WeakCouplingWarning

# Large-J sweeps legitimately leave the weak-coupling regime; the warning is
# exercised explicitly in test_model.
warnings.simplefilter("ignore", WeakCouplingWarning)


def fig2_params(**overrides):
    """Parameter set of the reference quadrature-evolution figure."""
    base = dict(g_m=1.0e-6, delta=100.01, omega_m=100.0, gamma_m=1.0e-4,
                drive_E=5.0e6, n_th=6.0e4)
    base.update(overrides)
    return SystemParams(**base)


def fast_params(**overrides):
    """Fig. 2-like set with heavy mechanical damping: stabilizes by t=600.

    Used where a test needs the full sensing pipeline but not the expensive
    long-horizon transient of the lightly damped set.
    """
    return fig2_params(gamma_m=1.0e-2, **overrides)


@pytest.fixture(scope="session")
def default_cfg():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def short_cfg():
    return IntegratorConfig(t_end=2.0)
