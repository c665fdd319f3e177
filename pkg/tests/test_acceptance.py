"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines
on passing runs too.  Criteria that bound wall time assert the bound.
"""

import time
from collections import defaultdict

import numpy as np

from conftest import make_instance, make_params
from tsrelay.fixed_source import solve_fixed_source
from tsrelay.joint import assemble_design, solve_joint
from tsrelay.model import (
    harvest_budget,
    harvest_constraint_slack,
    harvested_power_max,
    rate_matrix_form,
    rate_scalar_form,
)
from tsrelay.oracle import GridSpec, grid_search_fixed, grid_search_joint, kkt_residual
from tsrelay.sweep import SweepConfig, rows_to_csv, run_sweep

STREAM_CYCLE = (1, 2, 4)


def _report(tag: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{tag} failed: {detail}"


def _mixed_instances(count, seed0, antennas=(4, 6)):
    for i in range(count):
        d = STREAM_CYCLE[i % 3]
        n = antennas[i % len(antennas)]
        params = make_params(D=d, n=n)
        ch, prof = make_instance(params, seed=seed0 + i)
        yield params, ch, prof


def test_c01_scalar_matrix_rate_equivalence():
    rng = np.random.default_rng(11)
    t0 = time.time()
    worst = 0.0
    for params, ch, prof in _mixed_instances(200, seed0=10_000):
        d = rng.random(params.D) * 5.0
        q = rng.random(params.D)
        q *= params.P / np.sum(q)
        eps = float(rng.random() * 0.95)
        design = assemble_design(prof, d, q, eps, params)
        scalar = rate_scalar_form(prof, d, q, eps, params)
        matrix = rate_matrix_form(ch, design, params)
        worst = max(worst, abs(scalar - matrix) / max(abs(matrix), 1e-12))
    elapsed = time.time() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    _report("C1 rate-equivalence", ok,
            f"max rel err {worst:.2e} over 200 instances, {elapsed:.1f}s")


def test_c02_fixed_source_oracle_match():
    t0 = time.time()
    grid = GridSpec(steps=2001, eps_steps=2001)
    worst_gap = -np.inf
    worst_ratio = 0.0
    for i in range(20):
        params = make_params(D=1, n=4)
        _, prof = make_instance(params, seed=20_000 + i)
        _, report = solve_fixed_source(prof, params)
        res = grid_search_fixed(prof, params, grid)
        gap = report.rate - res.rate
        worst_gap = max(worst_gap, res.rate - report.rate)
        worst_ratio = max(worst_ratio, gap / res.resolution if res.resolution else 0.0)
        assert gap >= -1e-9, "grid beat the closed form"
        assert gap <= res.resolution, "solver strayed outside the grid resolution"
    elapsed = time.time() - t0
    ok = elapsed < 120.0
    _report("C2 fixed-oracle", ok,
            f"20 instances, worst gap/bound {worst_ratio:.2e}, {elapsed:.1f}s")


def test_c03_joint_oracle_match():
    t0 = time.time()
    grid = GridSpec(steps=201, eps_steps=201)
    worst_ratio = 0.0
    for i in range(20):
        params = make_params(D=1, n=4)
        _, prof = make_instance(params, seed=30_000 + i)
        _, report = solve_joint(prof, params)
        res = grid_search_joint(prof, params, grid)
        gap = report.rate - res.rate
        worst_ratio = max(worst_ratio, gap / res.resolution if res.resolution else 0.0)
        assert gap >= -1e-9, "grid beat the alternating solver"
        assert gap <= res.resolution, "solver strayed outside the grid resolution"
    elapsed = time.time() - t0
    ok = elapsed < 300.0
    _report("C3 joint-oracle", ok,
            f"20 instances, worst gap/bound {worst_ratio:.2e}, {elapsed:.1f}s")


def test_c04_kkt_residuals():
    worst_fixed = 0.0
    worst_joint = 0.0
    for params, _, prof in _mixed_instances(100, seed0=40_000):
        _, fixed_report = solve_fixed_source(prof, params)
        worst_fixed = max(worst_fixed, kkt_residual(fixed_report, prof, params, "fixed"))
        _, joint_report = solve_joint(prof, params)
        worst_joint = max(worst_joint, kkt_residual(joint_report, prof, params, "joint"))
    ok = worst_fixed <= 1e-7 and worst_joint <= 1e-7
    _report("C4 kkt-residuals", ok,
            f"max fixed {worst_fixed:.2e}, max joint {worst_joint:.2e}, 100 instances")


def test_c05_constraint_tightness():
    worst_slack = 0.0
    worst_power = 0.0
    for params, ch, prof in _mixed_instances(100, seed0=50_000):
        budget = harvest_budget(prof.g1, params)
        for design, report in (
            solve_fixed_source(prof, params),
            solve_joint(prof, params),
        ):
            slack = harvest_constraint_slack(ch, design, params)
            scale = max(1.0, report.epsilon * params.eta * budget)
            worst_slack = max(worst_slack, abs(slack) / scale)
        _, joint_report = solve_joint(prof, params)
        if np.any(joint_report.x_or_d > 0):
            worst_power = max(
                worst_power,
                abs(float(np.sum(joint_report.q_alloc)) - params.P) / params.P,
            )
    ok = worst_slack <= 1e-8 and worst_power <= 1e-9
    _report("C5 constraint-tightness", ok,
            f"max |slack|/scale {worst_slack:.2e}, max |sum q - P|/P {worst_power:.2e}")


def test_c06_monotone_convergence():
    iters = []
    all_monotone = True
    all_converged = True
    for params, _, prof in _mixed_instances(100, seed0=60_000):
        _, report = solve_joint(prof, params)
        trace = np.asarray(report.objective_trace)
        if trace.size > 1:
            all_monotone &= bool(np.all(np.diff(trace) >= -1e-12))
        all_converged &= report.converged and report.iterations <= 500
        iters.append(report.iterations)
    median_iters = float(np.median(iters))
    ok = all_monotone and all_converged and median_iters <= 50
    _report("C6 monotone-convergence", ok,
            f"median {median_iters:.0f} iterations, max {max(iters)}, "
            f"monotone={all_monotone}, converged={all_converged}")


def test_c07_per_instance_dominance():
    cfg = SweepConfig(p0_dbm=(20.0,), antennas=(4,), trials=200, seed=70_000)
    rows = run_sweep(cfg)
    by_key = defaultdict(dict)
    for r in rows:
        by_key[r.trial][r.scheme] = r.rate_bits
    worst = np.inf
    for trial, rates in by_key.items():
        worst = min(worst, rates["joint"] - rates["fixed-source"])
        worst = min(worst, rates["fixed-source"] - rates["naf"])
    ok = worst >= -1e-9
    _report("C7 dominance", ok, f"min ordered margin {worst:.2e} over 200 trials")


def test_c08_harvest_covariance_optimality():
    rng = np.random.default_rng(8)
    worst_margin = np.inf
    for i in range(20):
        params = make_params(D=2, n=4)
        ch, _ = make_instance(params, seed=80_000 + i)
        power, _ = harvested_power_max(ch.h1_tilde, params)
        for _ in range(1000):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            s = a @ a.conj().T
            s *= params.P0 / np.real(np.trace(s))
            rival = np.real(np.trace(ch.h1_tilde @ s @ ch.h1_tilde.conj().T))
            rival += params.sigma1_sq * params.D
            worst_margin = min(worst_margin, power - rival)
    ok = worst_margin >= -1e-10
    _report("C8 harvest-optimality", ok,
            f"min margin {worst_margin:.2e} over 20x1000 covariances")


def test_c09_trend_reproduction():
    t0 = time.time()
    cfg = SweepConfig(trials=200, seed=90_000)
    rows = run_sweep(cfg)
    acc = defaultdict(list)
    for r in rows:
        acc[(r.scheme, r.n_antennas, r.p0_dbm)].append(r.rate_bits)
    means = {k: float(np.mean(v)) for k, v in acc.items()}
    p0s = sorted(cfg.p0_dbm)

    monotone = all(
        np.all(np.diff([means[(s, n, p)] for p in p0s]) >= 0.0)
        for s in cfg.schemes
        for n in cfg.antennas
    )
    n_dominance = all(
        means[(s, 6, p)] >= means[(s, 4, p)] for s in cfg.schemes for p in p0s
    )
    gap_widens = all(
        (means[("joint", 6, p)] - means[("fixed-source", 6, p)])
        >= (means[("joint", 4, p)] - means[("fixed-source", 4, p)])
        for p in p0s
    )
    elapsed = time.time() - t0
    ok = monotone and n_dominance and gap_widens and elapsed < 600.0
    _report("C9 trend-reproduction", ok,
            f"monotone={monotone}, N6>=N4={n_dominance}, gap-widens={gap_widens}, "
            f"{elapsed:.0f}s for 200 trials")


def test_c10_csv_determinism():
    cfg = SweepConfig(p0_dbm=(0.0, 30.0), antennas=(3,), trials=3, seed=100_000)
    first = rows_to_csv(run_sweep(cfg))
    second = rows_to_csv(run_sweep(cfg))
    ok = first == second
    _report("C10 determinism", ok,
            f"{len(first.splitlines()) - 1} rows byte-identical across two runs")
