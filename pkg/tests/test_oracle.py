import numpy as np
import pytest

from conftest import make_instance, make_params, make_profile
from tsrelay.fixed_source import solve_fixed_source
from tsrelay.joint import solve_joint
from tsrelay.model import LN2, RelayDesign, SolveReport, naf_design
from tsrelay.oracle import (
    GridSpec,
    grid_search_fixed,
    grid_search_joint,
    kkt_residual,
    verify_design,
)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(steps=1)
    with pytest.raises(ValueError):
        GridSpec(x_max=-1.0)


def test_grid_fixed_no_energy():
    params = make_params(D=1, n=4, eta=0.0)
    _, prof = make_instance(params, seed=1)
    res = grid_search_fixed(prof, params, GridSpec(steps=51, eps_steps=51))
    assert res.rate == 0.0
    assert np.all(res.x == 0.0)


def test_grid_fixed_refinement_never_decreases():
    params = make_params(D=1, n=4)
    _, prof = make_instance(params, seed=2)
    coarse = grid_search_fixed(prof, params, GridSpec(steps=101, eps_steps=101))
    fine = grid_search_fixed(prof, params, GridSpec(steps=1001, eps_steps=1001))
    assert fine.rate >= coarse.rate


def test_grid_fixed_refuses_many_streams():
    params = make_params(D=4, n=4)
    _, prof = make_instance(params, seed=3)
    with pytest.raises(ValueError):
        grid_search_fixed(prof, params, GridSpec(steps=11, eps_steps=11))


def test_grid_fixed_two_streams_brackets_solver():
    params = make_params(D=2, n=4)
    _, prof = make_instance(params, seed=4)
    _, report = solve_fixed_source(prof, params)
    res = grid_search_fixed(prof, params, GridSpec(steps=201, eps_steps=201))
    assert res.rate <= report.rate + 1e-9
    assert report.rate - res.rate <= res.resolution


def test_grid_joint_refuses_multi_stream():
    params = make_params(D=2, n=4)
    _, prof = make_instance(params, seed=5)
    with pytest.raises(ValueError):
        grid_search_joint(prof, params, GridSpec(steps=11, eps_steps=11))


def test_grid_joint_no_energy():
    params = make_params(D=1, n=4, eta=0.0)
    _, prof = make_instance(params, seed=6)
    res = grid_search_joint(prof, params, GridSpec(steps=51, eps_steps=51))
    assert res.rate == 0.0


def test_grid_joint_power_at_boundary():
    params = make_params(D=1, n=4)
    _, prof = make_instance(params, seed=7)
    res = grid_search_joint(prof, params, GridSpec(steps=101, eps_steps=101))
    assert res.d[0] > 0
    assert res.q[0] == pytest.approx(params.P)


def test_grid_joint_brackets_solver():
    params = make_params(D=1, n=4)
    for seed in range(3):
        _, prof = make_instance(params, seed=800 + seed)
        _, report = solve_joint(prof, params)
        res = grid_search_joint(prof, params, GridSpec(steps=101, eps_steps=101))
        assert res.rate <= report.rate + 1e-9
        assert report.rate - res.rate <= res.resolution


# ------------------------------------------------------------- kkt residual


def test_kkt_residual_small_on_solver_output():
    for seed in range(6):
        params = make_params(D=[1, 2, 4][seed % 3], n=4)
        _, prof = make_instance(params, seed=900 + seed)
        _, fixed_report = solve_fixed_source(prof, params)
        assert kkt_residual(fixed_report, prof, params, "fixed") <= 1e-7
        _, joint_report = solve_joint(prof, params)
        assert kkt_residual(joint_report, prof, params, "joint") <= 1e-7


def test_kkt_residual_detects_perturbation():
    params = make_params(D=2, n=4)
    _, prof = make_instance(params, seed=20)
    _, report = solve_fixed_source(prof, params)
    bumped = SolveReport(
        rate=report.rate,
        epsilon=report.epsilon,
        x_or_d=report.x_or_d * 1.1,
        q_alloc=report.q_alloc,
        mu=report.mu,
        iterations=report.iterations,
    )
    assert kkt_residual(bumped, prof, params, "fixed") > 1e-3

    _, joint_report = solve_joint(prof, params)
    bumped_joint = SolveReport(
        rate=joint_report.rate,
        epsilon=joint_report.epsilon,
        x_or_d=joint_report.x_or_d * 1.1,
        q_alloc=joint_report.q_alloc,
        mu=joint_report.mu,
        iterations=joint_report.iterations,
    )
    assert kkt_residual(bumped_joint, prof, params, "joint") > 1e-3


def test_kkt_residual_inactive_branch():
    # all-zero x with the multiplier below every activation threshold
    params = make_params(D=2, n=2)
    prof = make_profile([1.0, 0.5], [1.0, 2.0], 1.0, params)
    a = params.rho1 * prof.alpha
    mu_lo = float(np.min(LN2 * (1 + a) / (a * prof.beta)))
    report = SolveReport(
        rate=0.0,
        epsilon=0.0,
        x_or_d=np.zeros(2),
        q_alloc=np.zeros(0),
        mu=0.5 * mu_lo,
        iterations=0,
    )
    assert kkt_residual(report, prof, params, "fixed") <= 1e-10


def test_kkt_residual_rejects_unknown_kind():
    params = make_params(D=1, n=4)
    _, prof = make_instance(params, seed=21)
    _, report = solve_fixed_source(prof, params)
    with pytest.raises(ValueError):
        kkt_residual(report, prof, params, "bogus")


# ------------------------------------------------------------ verify_design


def test_verify_design_passes_naf_full_stream():
    params = make_params(D=4, n=4)
    ch, prof = make_instance(params, seed=22)
    _, fixed_report = solve_fixed_source(prof, params)
    naf = naf_design(ch, params, fixed_report.epsilon)
    report = verify_design(ch, naf, params)
    assert report.passed
    names = {c.name: c for c in report.checks}
    assert names["rate_match"].skipped


def test_verify_design_flags_infeasible():
    params = make_params(D=2, n=2)
    ch, _ = make_instance(params, seed=23)
    bad = RelayDesign(
        f_mat=np.eye(2, dtype=complex),
        q_mat=0.5 * np.eye(2, dtype=complex),
        q_tilde=0.5 * np.eye(2, dtype=complex),
        epsilon=0.0,
        scheme="naf",
    )
    report = verify_design(ch, bad, params)
    assert not report.passed
    names = {c.name: c for c in report.checks}
    assert not names["harvest_slack"].passed
    assert "FAIL" in str(report)


def test_verify_design_passes_solver_outputs():
    params = make_params(D=2, n=4)
    ch, prof = make_instance(params, seed=24)
    design, _ = solve_joint(prof, params)
    assert verify_design(ch, design, params).passed
