import numpy as np
import pytest

from anamorph.errors import NoShotsInBranch, UnsupportedDesign
from anamorph.qops import PermSpec, QotpKey
from anamorph.scheme import AnamorphicKey, encrypt_direct
from anamorph.states import basis_state, maximally_mixed
from anamorph.tomography import (
    ShotLog,
    ShotRecord,
    TomographyPlan,
    dcm_finite,
    linear_inversion_estimate,
    plan_shots,
    sample_plan,
    sample_shot,
    sample_shots,
    shot_model,
)

from test_qops import ZeroRng

KEY = AnamorphicKey(1, 1, QotpKey.zero(1), QotpKey.zero(1), PermSpec.identity(4), 4)
CT = encrypt_direct(maximally_mixed(2), basis_state(0, 2), KEY)


def test_plan_sizes():
    assert plan_shots(1, 0.25, 0.1).n_shots == 354
    assert plan_shots(1, 0.1, 0.05).n_shots == 2499
    assert plan_shots(2, 0.25, 0.1, design="singleton").n_shots % 15 == 0
    with pytest.raises(UnsupportedDesign):
        plan_shots(2, 0.25, 0.1)
    p = plan_shots(1, 0.25, 0.1)
    assert sum(p.allocation) == p.n_shots
    assert np.isclose(p.inclusion_probability().sum(), 1.0)
    with pytest.raises(UnsupportedDesign):
        plan_shots(1, 0.25, 0.1, design="bogus")


def test_overview_shot_model():
    m = shot_model(CT, KEY.perm)
    assert np.isclose(m.p0, 0.75)
    assert np.isclose(m.expectations[0, 1], 1 / 3)
    assert np.isclose(m.expectations[1, 1], -1.0)


def test_batch_matches_single_draws():
    m = shot_model(CT, KEY.perm)
    batch = sample_shots(m, (1, 2, 3), 50, np.random.default_rng(9))
    rng = np.random.default_rng(9)
    singles = [sample_shot(CT, KEY.perm, (1, 2, 3), "X", rng) for _ in range(50)]
    assert batch.records() == singles


def test_zero_stream_and_empty_branch():
    m = shot_model(CT, KEY.perm)
    log = sample_shots(m, (1,), 5, ZeroRng())
    assert list(log.branch) == [0] * 5 and list(log.outcome) == [1] * 5
    plan = TomographyPlan(2, 0.25, 0.1, "frames", 5, (5, 0, 0))
    with pytest.raises(NoShotsInBranch):
        linear_inversion_estimate(log, plan)
    est = linear_inversion_estimate(log, plan, allow_empty_branch=True)
    assert np.allclose(est.D1_hat, 0)


def test_log_helpers():
    recs = [ShotRecord(0, 1, 1), ShotRecord(1, 3, -1)]
    log = ShotLog.from_records(recs)
    assert log.records() == recs
    assert len(ShotLog.concat([log, log])) == 4
    assert list(log.to_csv_rows(1, trial=2)) == [(2, 0, 0, "Z", 1), (2, 1, 1, "Y", -1)]


def test_estimator_converges():
    n = 300_000
    plan = TomographyPlan(2, 0.1, 0.1, "frames", n, (n // 3,) * 3)
    plan = TomographyPlan(2, 0.1, 0.1, "frames", sum(plan.allocation), plan.allocation)
    res = dcm_finite(CT, KEY, plan, np.random.default_rng(1))
    assert res.b_error_l2 < 0.01
    assert np.allclose(res.mc_hat, basis_state(0, 2), atol=0.05)
    est = linear_inversion_estimate(sample_plan(shot_model(CT, KEY.perm), plan, np.random.default_rng(2)), plan)
    assert np.isclose(np.trace(est.D0_hat + est.D1_hat).real, 1.0)
