"""Growth experiments and long closed-box runs at full resolution (--runslow)"""

from pathlib import Path

import numpy as np
import pytest
from scipy.signal import find_peaks

from neurite_growth.core.config import load_config
from neurite_growth.core.integrator import StepperConfig, Termination, run
from neurite_growth.core.validation import box_constraint_monitor, total_mass

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

pytestmark = pytest.mark.slow


def _run(name):
    resolved = load_config(CONFIG_DIR / name).build()
    record = run(resolved.state, resolved.stepper, resolved.functions, resolved.params, resolved.grid)
    assert not box_constraint_monitor(record, resolved.params.rho_cap).violated
    assert record.min_length >= min(resolved.params.ell_min) - 1e-12
    return record


def test_shorter_neurite_overtakes_with_weak_release():
    record = _run("experiment-1.yaml")
    assert record.termination is Termination.STATIONARY
    L1, L2 = record.final_state.lengths
    assert L2 > L1


def test_longer_neurite_stays_longer_with_strong_release():
    record = _run("experiment-1-large-alpha.yaml")
    assert np.all(record.lengths[:, 0] > record.lengths[:, 1])


def test_retrograde_feedback_produces_growth_cycles():
    record = _run("experiment-2.yaml")
    assert record.termination is Termination.STATIONARY
    for j in range(2):
        series = record.lengths[:, j]
        maxima, _ = find_peaks(series, prominence=1e-3)
        minima, _ = find_peaks(-series, prominence=1e-3)
        assert maxima.size and minima.size
        assert minima.max() > maxima.min()
    L1, L2 = record.final_state.lengths
    assert max(L1, L2) / min(L1, L2) >= 1.3


def test_closed_box_conserves_mass_over_many_steps():
    resolved = load_config(CONFIG_DIR / "closed-box.yaml").build()
    cfg = StepperConfig(tau=1e-4, t_end=10.0, stationarity_tol=1e-14)
    record = run(resolved.state, cfg, resolved.functions, resolved.params, resolved.grid)
    m0 = total_mass(resolved.state, resolved.grid, resolved.params)
    assert record.n_steps == 100_000 or record.termination is Termination.STATIONARY
    assert np.max(record.mass_residual) / m0 <= 1e-12
