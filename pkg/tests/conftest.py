import numpy as np
import pytest

from causal_pvar.panel import PanelDataset
from causal_pvar.scenarios import simulate_var_panel


def make_var_panel(phi, n_units, n_times, seed, mu=None, burn=50, n_policies=1,
                   noise_scale=1.0):
    """Stationary VAR panel driven by i.i.d. Gaussian innovations."""
    phi = np.asarray(phi, dtype=float)
    m = phi.shape[-1]
    rng = np.random.default_rng(seed)
    if mu is None:
        mu = np.zeros((n_units, m))
    innov = noise_scale * rng.standard_normal((n_units, n_times + burn, m))
    panel = simulate_var_panel(phi, mu, innov, n_policies=n_policies)
    return PanelDataset(panel.values[:, -n_times:, :], n_policies, panel.variable_names)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
