from dataclasses import replace

import numpy as np
import pytest

from qrnode.calibration import (
    COLLECTION_EFFICIENCY, LOCK_DRIFT, MEMORY_PARAMS, MEMORY_SCHEME, fit_lock_drift, fit_memory,
)
from qrnode.spectral_memory import afc_prepare, echo_efficiency, gaussian_pulse


def test_memory_fit_reproduces_frozen_parameters():
    fitted = fit_memory()
    assert fitted.jitter_rms == MEMORY_PARAMS.jitter_rms
    assert fitted.peak_od == pytest.approx(MEMORY_PARAMS.peak_od, rel=1e-9)


def test_lock_fit_reproduces_frozen_drift():
    fitted = fit_lock_drift()
    for name, model in LOCK_DRIFT.items():
        assert fitted[name].diffusion == pytest.approx(model.diffusion, rel=1e-12)
        assert fitted[name].lock_residual_rms == pytest.approx(model.lock_residual_rms, rel=1e-12)


def test_fitted_depth_sits_on_rising_branch():
    effs = []
    for d in (MEMORY_PARAMS.peak_od, MEMORY_PARAMS.peak_od * 1.05):
        p = replace(MEMORY_PARAMS, peak_od=d)
        spec = afc_prepare(MEMORY_SCHEME, p)
        effs.append(echo_efficiency(spec, gaussian_pulse(spec, 90e-9)))
    assert effs[0] == pytest.approx(0.079, abs=1e-9)
    assert effs[1] > effs[0]


def test_collection_efficiency_is_a_loss():
    assert 0 < COLLECTION_EFFICIENCY < 1
    assert np.isclose(COLLECTION_EFFICIENCY * 0.079, 0.068)
