from __future__ import annotations

import numpy as np
import pytest

from kreinlab.errors import InputError
from kreinlab.verify import IDENTITIES, VerifyConfig, check_instance, draw_instance, run_suite


def test_instances_are_deterministic_and_in_range():
    cfg = VerifyConfig(instances=5)
    a, b = draw_instance(9, 3, cfg), draw_instance(9, 3, cfg)
    assert np.array_equal(a.T.A0, b.T.A0) and a.samples == b.samples
    for i in range(20):
        inst = draw_instance(1, i, cfg)
        assert 2 <= inst.T.N <= 12 and 1 <= inst.T.m <= min(4, inst.T.N)
        assert len(inst.samples) == 8
        assert sum(z.imag > 0 for z in inst.samples) == 5


def test_check_instance_reports_every_identity():
    inst = draw_instance(0, 0, VerifyConfig())
    res = check_instance(inst, np.random.default_rng(0))
    assert set(res) == set(IDENTITIES)
    assert all(v <= 1e-10 for v in res.values())


def test_config_validation():
    for bad in (VerifyConfig(instances=0), VerifyConfig(n_min=3, n_max=2), VerifyConfig(n_max=65),
                VerifyConfig(m_min=0), VerifyConfig(tol=0.0), VerifyConfig(m_min=13)):
        with pytest.raises(InputError):
            bad.validate()


def test_pass_flag_follows_tolerances():
    rep = run_suite(VerifyConfig(seed=2, instances=3))
    assert rep["pass"] and rep["failed"] == []
    assert all(rep["worst_residuals"][k] <= rep["tolerances"][k] for k in IDENTITIES)
    rep = run_suite(VerifyConfig(seed=2, instances=3, tol=1e-30))
    assert not rep["pass"]
    assert rep["failed"] == sorted(k for k in IDENTITIES if rep["worst_residuals"][k] > rep["tolerances"][k])


def test_large_dimensions_are_accepted():
    rep = run_suite(VerifyConfig(seed=4, instances=1, n_min=40, n_max=40, m_min=4, m_max=4))
    assert rep["pass"]
