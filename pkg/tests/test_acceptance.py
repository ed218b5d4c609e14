"""Acceptance gate: one test and one printed verdict line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to watch the verdict
lines stream; the full module takes a few minutes because it runs the
complete desk-scale studies and the 1e5-sample statistical checks.

Criteria 1-3 assert the rate bands as stated.  At this configuration the
measured heat rates sit outside those bands (the corrected scheme fits
near 1.7-1.8 on the post-floor window and the Euler-Maruyama scheme near
0.70, both reproducible without Monte Carlo from the per-mode update
factors); the asserts are left honest rather than widened.
"""

import dataclasses

import pytest

from mcnspde import (
    SpatialGrid,
    TimeMesh,
    benchmark_wave_problem,
    csv_text,
    desk_heat_config,
    desk_wave_config,
    mcn_wave_step,
    run_study,
    run_study_tables,
    sample_path,
    validate_statistics,
    wave_energy,
)

SEED = 20260814


def verdict(criterion, ok, text):
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}  {text}"
    print(line)
    return ok, line


@pytest.fixture(scope="session")
def heat_mcn_continuous():
    return run_study(desk_heat_config(base_seed=SEED))


@pytest.fixture(scope="session")
def heat_em_continuous():
    return run_study(desk_heat_config(scheme="em", base_seed=SEED))


@pytest.fixture(scope="session")
def heat_mcn_semidiscrete():
    return run_study(desk_heat_config(exact_mode="semidiscrete", base_seed=SEED))


@pytest.fixture(scope="session")
def wave_tables():
    return run_study_tables(desk_wave_config(base_seed=SEED))


@pytest.fixture(scope="session")
def statistics_report():
    return validate_statistics(samples=100_000, seed=SEED)


def checks_named(report, prefix):
    found = [c for c in report.checks if c.name.startswith(prefix)]
    assert found, f"no validation checks named {prefix}*"
    return found


def test_criterion_1_heat_mcn_rate(heat_mcn_continuous):
    rate = heat_mcn_continuous.fitted_rate
    lo, hi = 1.35, 1.65
    ok, line = verdict(
        1,
        lo <= rate <= hi,
        f"heat mcn continuous fitted rate {rate:.4f} vs [{lo}, {hi}] "
        f"(fit range {heat_mcn_continuous.fit_range})",
    )
    assert ok, line


def test_criterion_2_heat_em_rate(heat_em_continuous):
    rate = heat_em_continuous.fitted_rate
    lo, hi = 0.75, 1.05
    ok, line = verdict(
        2,
        lo <= rate <= hi,
        f"heat em continuous fitted rate {rate:.4f} vs [{lo}, {hi}] "
        f"(fit range {heat_em_continuous.fit_range})",
    )
    assert ok, line


def test_criterion_3_heat_mcn_semidiscrete_rate(heat_mcn_semidiscrete):
    rate = heat_mcn_semidiscrete.fitted_rate
    lo, hi = 1.40, 1.60
    ok, line = verdict(
        3,
        lo <= rate <= hi,
        f"heat mcn semidiscrete fitted rate {rate:.4f} vs [{lo}, {hi}] "
        f"(fit range {heat_mcn_semidiscrete.fit_range})",
    )
    assert ok, line


def test_criterion_4_wave_rates(wave_tables):
    lo, hi = 1.8, 2.2
    rates = {norm: t.fitted_rate for norm, t in wave_tables.items()}
    ok_all = all(lo <= r <= hi for r in rates.values())
    detail = ", ".join(f"{norm} {r:.4f}" for norm, r in rates.items())
    ok, line = verdict(4, ok_all, f"wave fitted rates {detail} vs [{lo}, {hi}]")
    assert ok, line


def test_criterion_5_micro_defect_moments(statistics_report):
    checks = checks_named(statistics_report, "heat_defect_moment")
    assert len(checks) == 4  # tau in {1/8, 1/16} x m in {1, 2}
    ok_all = all(c.passed for c in checks)
    detail = "; ".join(c.detail for c in checks)
    ok, line = verdict(5, ok_all, f"defect second moment vs (m/3)tau^5, 3 SE ({detail})")
    assert ok, line


def test_criterion_6_wave_defect_bounds(statistics_report):
    micro = checks_named(statistics_report, "wave_micro_sum_moment")
    current = checks_named(statistics_report, "wave_current_defect_bound")
    old = checks_named(statistics_report, "wave_old_defect_bound")
    ok_all = all(c.passed for c in micro + current + old)
    ok, line = verdict(
        6,
        ok_all,
        f"wave micro-sum moment ({len(micro)} checks, 3 SE), current-interval "
        f"bound ({len(current)}), past-interval bound ({len(old)})",
    )
    assert ok, line


def test_criterion_7_trapezoid_sharpness(statistics_report):
    checks = checks_named(statistics_report, "trapezoid_defect_sharpness")
    assert len(checks) == 3  # kappa in {1, 1/2, 1/16}
    ok_all = all(c.passed for c in checks)
    worst = max(abs(c.observed - c.expected) / c.expected for c in checks)
    ok, line = verdict(
        7, ok_all, f"trapezoid defect = kappa^2/6 = bound, worst rel dev {worst:.2e}"
    )
    assert ok, line


def test_criterion_8_deterministic_orders():
    cn = run_study(
        desk_heat_config(
            noise_scale=0.0, exact_mode="semidiscrete", mc_count=1, base_seed=SEED
        )
    )
    em = run_study(
        desk_heat_config(
            scheme="em",
            noise_scale=0.0,
            exact_mode="semidiscrete",
            mc_count=1,
            base_seed=SEED,
            n_list=(512, 1024, 2048, 4096),
            master_steps=2**24,
        )
    )
    grid = SpatialGrid(40)
    mesh = TimeMesh(256)
    problem = benchmark_wave_problem(grid, mesh, noise_scale=0.0)
    path = sample_path(SEED, mesh, m=1, master_steps=2**16)
    state = problem.initial_state()
    e0 = wave_energy(state, problem)
    drift = 0.0
    for _ in range(mesh.N):
        state = mcn_wave_step(state, path, problem)
        drift = max(drift, abs(wave_energy(state, problem) - e0) / e0)

    cn_ok = 1.9 <= cn.fitted_rate <= 2.1
    em_ok = 0.9 <= em.fitted_rate <= 1.1
    energy_ok = drift <= 1e-9
    ok, line = verdict(
        8,
        cn_ok and em_ok and energy_ok,
        f"silent-noise cn rate {cn.fitted_rate:.4f} vs [1.9, 2.1], "
        f"em rate {em.fitted_rate:.4f} vs [0.9, 1.1] (asymptotic window "
        f"{em.fit_range}), wave energy drift {drift:.2e} <= 1e-9",
    )
    assert ok, line


def test_criterion_9_byte_identical_output():
    config = desk_heat_config(
        n_list=(8, 16, 32), mc_count=8, base_seed=SEED, master_steps=2**16
    )
    first = csv_text(run_study(config))
    second = csv_text(run_study(config))
    parallel = csv_text(run_study(dataclasses.replace(config, workers=2)))
    ok, line = verdict(
        9,
        first == second and first == parallel,
        f"identical configs give byte-identical CSV ({len(first.encode())} bytes), "
        "workers 1 and 2 agree",
    )
    assert ok, line


def test_criterion_10_covariance_identity(statistics_report):
    checks = checks_named(statistics_report, "wiener_covariance")
    assert len(checks) == 3
    ok_all = all(c.passed for c in checks)
    worst = max(c.observed for c in checks)
    ok, line = verdict(
        10, ok_all, f"covariance (t - max(s, r)) I within 4 SE, worst |z| {worst:.2f}"
    )
    assert ok, line
