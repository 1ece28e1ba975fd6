import math

import numpy as np
import pytest

from sqcav import SystemConfig, reference_config


def rand_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def rand_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def fig_cfg() -> SystemConfig:
    """Reference parameter set, balanced, at the default truncation."""
    return reference_config()


@pytest.fixture(scope="session")
def fig_cfg_vac() -> SystemConfig:
    return reference_config(n=0.0, m=0.0)


def alpha_zero_t3_config(kappa_over_beta: float = 14.0, n: float = 0.5, n_max: int = 15):
    """Three-level config with balanced shifts (Omega_r = 2 g sqrt(N))."""
    g_mhz = 24.0
    om_r = 2.0 * g_mhz * math.sqrt(n)
    kap = 4.2
    beta = kap / kappa_over_beta
    delta_r = g_mhz * om_r / (2.0 * beta)
    return SystemConfig.from_mhz(
        n=n,
        m=math.sqrt(n * (n + 1.0)),
        kappa_mhz=kap,
        g_mhz=g_mhz,
        omega_r_mhz=om_r,
        delta_r_mhz=delta_r,
        n_max=n_max,
    )
