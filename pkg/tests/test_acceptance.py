"""End-to-end acceptance suite at full production scale (256x256, dt=0.1).

Each test prints one PASS/FAIL line so the whole battery reads as a
checklist (`pytest tests/test_acceptance.py -v -s`).  A few checks pin
external reference values that converged numerics provably do not
reproduce; those tests assert the reference values anyway and are
expected to fail, with the measured values printed alongside.  The
companion analysis lives outside the package.
"""

import numpy as np
import pytest

from oracles import laplace_U_closed_form
from vpcontrol import solver
from vpcontrol.control import pack_params, unpack_params
from vpcontrol.core import RecordFlags, make_grid, total_mass
from vpcontrol.dispersion import find_root, laplace_U, synthesize_guess
from vpcontrol.equilibria import build_initial_condition
from vpcontrol.io_formats import fit_growth_rate
from vpcontrol.landscape import AxisSpec, LandscapeResult, LandscapeSpec, count_local_minima, sweep
from vpcontrol.objectives import ObjectiveKind, objective_from_trace
from vpcontrol.optimize import ObjectiveEvaluator, OptimizerConfig, gd_constant, gd_wolfe
from vpcontrol.presets import BUMP_ON_TAIL, TWO_STREAM, sample_init

# Reference values being reproduced (dispersion roots, residuals at those
# roots, control coefficients, growth-rate constants).
REF_TS_ROOT = 0.236 + 0.0j
REF_TS_RESIDUAL = 9.564044e-4
REF_BOT_ROOT = 0.230 - 0.324j
REF_BOT_RESIDUAL = 3.756278e-3
REF_TS_B1 = -1.28741e-3
REF_BOT_A1 = 1.41014e-3
REF_BOT_B1 = -3.20268e-4
REF_TS_SLOPE = 0.472
REF_BOT_SLOPE = 0.460


def _report(criterion, ok, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


# ------------------------------------------------------------------ fixtures


@pytest.fixture(scope="module")
def ts_h0_trace():
    return solver.run(TWO_STREAM.config())


@pytest.fixture(scope="module")
def bot_h0_trace():
    return solver.run(BUMP_ON_TAIL.config())


@pytest.fixture(scope="module")
def ts_root():
    return find_root(TWO_STREAM.equilibrium, 1, TWO_STREAM.grid())


@pytest.fixture(scope="module")
def bot_root():
    return find_root(BUMP_ON_TAIL.equilibrium, 1, BUMP_ON_TAIL.grid())


@pytest.fixture(scope="module")
def ts_guess(ts_root):
    p = TWO_STREAM
    return synthesize_guess(p.equilibrium, p.perturbation, p.grid(), [1], roots={1: ts_root})


@pytest.fixture(scope="module")
def bot_guess(bot_root):
    p = BUMP_ON_TAIL
    return synthesize_guess(p.equilibrium, p.perturbation, p.grid(), [1], roots={1: bot_root})


@pytest.fixture(scope="module")
def ts_guess_trace(ts_guess):
    return solver.run(TWO_STREAM.config().with_control(ts_guess))


@pytest.fixture(scope="module")
def bot_guess_trace(bot_guess):
    return solver.run(BUMP_ON_TAIL.config().with_control(bot_guess))


def _four_objective_curves(preset, axis_index, order):
    """29-sample cut of all four objectives along one packed coefficient.

    One forward solve per sample records the energy and KL series, from
    which the four objectives are reduced; this matches four separate
    sweeps exactly (the solver is deterministic) at a quarter of the cost.
    """
    values = np.linspace(-0.07, 0.07, 29)
    base = preset.config(record=RecordFlags(kl_series=True))
    curves = {k: np.empty(29) for k in (ObjectiveKind.KL, ObjectiveKind.EE, ObjectiveKind.KLT, ObjectiveKind.EET)}
    for i, val in enumerate(values):
        theta = np.zeros(2 * order)
        theta[axis_index] = val
        cfg = base.with_control(unpack_params(theta, order, base.grid.k0))
        trace = solver.run(cfg)
        for kind in curves:
            curves[kind][i] = objective_from_trace(kind, trace, cfg)
    return values, curves


def _as_result(preset, axis_index, order, objective, values, curve):
    spec = LandscapeSpec(
        objective=objective,
        base_config=preset.config(),
        order=order,
        axes=(AxisSpec(axis_index, -0.07, 0.07, 29),),
    )
    return LandscapeResult(
        spec=spec,
        axis_values=[values],
        values=curve,
        ok=np.ones(curve.size, dtype=bool),
    )


@pytest.fixture(scope="module")
def ts_1d_curves():
    return _four_objective_curves(TWO_STREAM, axis_index=2, order=2)  # b1 axis


@pytest.fixture(scope="module")
def bot_1d_curves():
    return _four_objective_curves(BUMP_ON_TAIL, axis_index=0, order=1)  # a1 axis


@pytest.fixture(scope="module")
def ts_near_eet_sweep():
    # 21x21 resolution on the near box (the criterion accepts 21x21 or 41x41)
    spec = LandscapeSpec(
        objective=ObjectiveKind.EET,
        base_config=TWO_STREAM.config(),
        order=2,
        axes=(AxisSpec(2, -0.003, 0.001, 21), AxisSpec(3, -0.003, 0.001, 21)),
    )
    return sweep(spec)


@pytest.fixture(scope="module")
def ts_near_gd(ts_h0_trace):
    preset = TWO_STREAM
    evaluator = ObjectiveEvaluator(ObjectiveKind.EET, preset.config(), preset.under_order)
    config = OptimizerConfig(
        init=np.array([0.0, 0.0, -0.002, 0.0]),  # near-box start on the b coefficients
        mask=preset.under_mask(),
        stepsize=preset.constant_stepsize,
        max_iters=200,
        fd_step=1e-6,
        f_tol=1e-4,
    )
    return gd_constant(evaluator, config)


@pytest.fixture(scope="module")
def bot_near_gd(bot_h0_trace):
    preset = BUMP_ON_TAIL
    evaluator = ObjectiveEvaluator(ObjectiveKind.EET, preset.config(), preset.under_order)
    config = OptimizerConfig(
        init=np.array([0.002, 0.0005]),  # near-box start on (a1, b1)
        mask=preset.under_mask(),
        stepsize=preset.constant_stepsize,
        max_iters=200,
        fd_step=1e-6,
        f_tol=1e-4,
    )
    return gd_constant(evaluator, config)


@pytest.fixture(scope="module")
def ts_far_wolfe():
    preset = TWO_STREAM
    evaluator = ObjectiveEvaluator(ObjectiveKind.EE, preset.config(), preset.under_order)
    theta0 = sample_init("far", preset, preset.under_order, preset.under_mask(), seed=7)
    config = OptimizerConfig(
        init=theta0,
        method="wolfe",
        mask=preset.under_mask(),
        max_iters=10,
        fd_step=1e-6,
    )
    return gd_wolfe(evaluator, config)


# ------------------------------------------------------------------ criterion 1


def test_criterion_1_dispersion_roots(ts_root, bot_root):
    """Roots and residuals match the reference values."""
    ts_res = abs(1.0 + laplace_U(TWO_STREAM.equilibrium, 0.2, REF_TS_ROOT))
    bot_res = abs(1.0 + laplace_U(BUMP_ON_TAIL.equilibrium, 0.1, REF_BOT_ROOT))
    ok = (
        abs(ts_root.s0 - REF_TS_ROOT) <= 5e-3
        and abs(bot_root.s0 - REF_BOT_ROOT) <= 5e-3
        and abs(ts_res - REF_TS_RESIDUAL) <= 0.2 * REF_TS_RESIDUAL
        and abs(bot_res - REF_BOT_RESIDUAL) <= 0.2 * REF_BOT_RESIDUAL
    )
    _report(
        1,
        ok,
        f"roots found {ts_root.s0:.6f} / {bot_root.s0:.6f} vs reference "
        f"{REF_TS_ROOT} / {REF_BOT_ROOT}; |1+L[U]| at reference points "
        f"{ts_res:.3e} / {bot_res:.3e} vs {REF_TS_RESIDUAL:.3e} / {REF_BOT_RESIDUAL:.3e}",
    )
    # converged quadrature and the independent closed form agree on the
    # found roots to high precision, so a mismatch is in the reference
    assert abs(1.0 + laplace_U_closed_form(TWO_STREAM.equilibrium, 0.2, ts_root.s0)) < 1e-6
    assert abs(1.0 + laplace_U_closed_form(BUMP_ON_TAIL.equilibrium, 0.1, bot_root.s0)) < 1e-6
    assert abs(ts_root.s0 - REF_TS_ROOT) <= 5e-3
    assert abs(bot_root.s0 - REF_BOT_ROOT) <= 5e-3
    assert abs(ts_res - REF_TS_RESIDUAL) <= 0.2 * REF_TS_RESIDUAL
    assert abs(bot_res - REF_BOT_RESIDUAL) <= 0.2 * REF_BOT_RESIDUAL


# ------------------------------------------------------------------ criterion 2


def test_criterion_2_two_stream_guess(ts_guess):
    b1 = ts_guess.b[0]
    ok = abs(abs(b1) - abs(REF_TS_B1)) <= 0.05 * abs(REF_TS_B1) and b1 < 0
    _report(2, ok, f"two-stream guess b1 = {b1:.6e} vs reference {REF_TS_B1:.6e} (5%, sign)")
    assert b1 < 0
    assert abs(b1) == pytest.approx(abs(REF_TS_B1), rel=0.05)


def test_criterion_2_bump_on_tail_guess(bot_guess):
    a1, b1 = bot_guess.a[0], bot_guess.b[0]
    ok = (
        abs(abs(a1) - abs(REF_BOT_A1)) <= 0.05 * abs(REF_BOT_A1)
        and abs(abs(b1) - abs(REF_BOT_B1)) <= 0.05 * abs(REF_BOT_B1)
        and a1 > 0
        and b1 < 0
    )
    _report(
        2,
        ok,
        f"bump-on-tail guess (a1, b1) = ({a1:.6e}, {b1:.6e}) vs reference "
        f"({REF_BOT_A1:.6e}, {REF_BOT_B1:.6e}) (5%, signs)",
    )
    assert a1 > 0 and b1 < 0
    assert abs(a1) == pytest.approx(abs(REF_BOT_A1), rel=0.05)
    assert abs(b1) == pytest.approx(abs(REF_BOT_B1), rel=0.05)


# ------------------------------------------------------------------ criterion 3


def test_criterion_3_growth_rates_match_found_roots(ts_h0_trace, bot_h0_trace, ts_root, bot_root):
    ts_slope = fit_growth_rate(ts_h0_trace.times, ts_h0_trace.energy, TWO_STREAM.growth_window)
    bot_slope = fit_growth_rate(bot_h0_trace.times, bot_h0_trace.energy, BUMP_ON_TAIL.growth_window)
    ts_pred = 2 * ts_root.s0.real
    bot_pred = 2 * bot_root.s0.real
    ok = abs(ts_slope / ts_pred - 1) <= 0.10 and abs(bot_slope / bot_pred - 1) <= 0.10
    _report(
        3,
        ok,
        f"fitted slopes {ts_slope:.4f} / {bot_slope:.4f} vs 2*Re(s0) "
        f"{ts_pred:.4f} / {bot_pred:.4f} (10%)",
    )
    assert ts_slope == pytest.approx(ts_pred, rel=0.10)
    assert bot_slope == pytest.approx(bot_pred, rel=0.10)


def test_criterion_3_two_stream_reference_slope(ts_h0_trace):
    slope = fit_growth_rate(ts_h0_trace.times, ts_h0_trace.energy, TWO_STREAM.growth_window)
    ok = abs(slope / REF_TS_SLOPE - 1) <= 0.10
    _report(3, ok, f"two-stream slope {slope:.4f} vs reference {REF_TS_SLOPE} (10%)")
    assert slope == pytest.approx(REF_TS_SLOPE, rel=0.10)


def test_criterion_3_bump_on_tail_reference_slope(bot_h0_trace):
    slope = fit_growth_rate(bot_h0_trace.times, bot_h0_trace.energy, BUMP_ON_TAIL.growth_window)
    ok = abs(slope / REF_BOT_SLOPE - 1) <= 0.10
    _report(3, ok, f"bump-on-tail slope {slope:.4f} vs reference {REF_BOT_SLOPE} (10%)")
    assert slope == pytest.approx(REF_BOT_SLOPE, rel=0.10)


# ------------------------------------------------------------------ criterion 4


def test_criterion_4_guess_suppression(ts_h0_trace, bot_h0_trace, ts_guess_trace, bot_guess_trace):
    ts_ratio = ts_guess_trace.energy[-1] / ts_h0_trace.energy[-1]
    bot_ratio = bot_guess_trace.energy[-1] / bot_h0_trace.energy[-1]
    ok = ts_ratio <= 1e-2 and bot_ratio <= 1e-2
    _report(4, ok, f"energy ratios at T with the synthesized field: {ts_ratio:.3e} / {bot_ratio:.3e} (<= 1e-2)")
    assert ts_ratio <= 1e-2
    assert bot_ratio <= 1e-2


def test_criterion_4_reference_coefficients_reported(ts_h0_trace, bot_h0_trace):
    # informational companion: the literal reference coefficients
    from vpcontrol.control import ControlField

    ts_field = ControlField(a=[-6.31537e-9], b=[REF_TS_B1], k0=0.2)
    bot_field = ControlField(a=[REF_BOT_A1], b=[REF_BOT_B1], k0=0.1)
    ts_ratio = solver.run(TWO_STREAM.config().with_control(ts_field)).energy[-1] / ts_h0_trace.energy[-1]
    bot_ratio = solver.run(BUMP_ON_TAIL.config().with_control(bot_field)).energy[-1] / bot_h0_trace.energy[-1]
    _report(
        4,
        ts_ratio <= 1e-2,
        f"(informational) literal reference coefficients: ratios {ts_ratio:.3e} / {bot_ratio:.3e}",
    )
    assert ts_ratio <= 1e-2  # the two-stream reference field still suppresses


# ------------------------------------------------------------------ criterion 5


@pytest.mark.parametrize(
    "kind,expected",
    [
        (ObjectiveKind.EET, "eq1"),
        (ObjectiveKind.KLT, "eq1"),
        (ObjectiveKind.EE, "ge2"),
        (ObjectiveKind.KL, "ge2"),
    ],
)
def test_criterion_5_two_stream_landscape(ts_1d_curves, kind, expected):
    values, curves = ts_1d_curves
    result = _as_result(TWO_STREAM, 2, 2, kind, values, curves[kind])
    count = count_local_minima(result)
    ok = count == 1 if expected == "eq1" else count >= 2
    _report(5, ok, f"two-stream {kind.value} interior minima = {count} (want {'1' if expected == 'eq1' else '>=2'})")
    if expected == "eq1":
        assert count == 1
    else:
        assert count >= 2


@pytest.mark.parametrize(
    "kind,expected",
    [
        (ObjectiveKind.EET, "eq1"),
        (ObjectiveKind.KLT, "eq1"),
        (ObjectiveKind.EE, "ge2"),
        (ObjectiveKind.KL, "ge2"),
    ],
)
def test_criterion_5_bump_on_tail_landscape(bot_1d_curves, kind, expected):
    values, curves = bot_1d_curves
    result = _as_result(BUMP_ON_TAIL, 0, 1, kind, values, curves[kind])
    count = count_local_minima(result)
    ok = count == 1 if expected == "eq1" else count >= 2
    _report(5, ok, f"bump-on-tail {kind.value} interior minima = {count} (want {'1' if expected == 'eq1' else '>=2'})")
    if expected == "eq1":
        assert count == 1
    else:
        assert count >= 2


# ------------------------------------------------------------------ criterion 6


def test_criterion_6_basin_consistency(ts_near_eet_sweep, ts_guess):
    result = ts_near_eet_sweep
    assert result.n_failed == 0
    idx = np.unravel_index(int(np.argmin(result.values)), result.values.shape)
    b1_grid = result.axis_values[0][idx[0]]
    b2_grid = result.axis_values[1][idx[1]]
    cell = result.axis_values[0][1] - result.axis_values[0][0]
    guess_b1, guess_b2 = ts_guess.b[0], 0.0
    ok = abs(b1_grid - guess_b1) <= 2 * cell and abs(b2_grid - guess_b2) <= 2 * cell
    _report(
        6,
        ok,
        f"grid minimizer ({b1_grid:.5f}, {b2_grid:.5f}) vs guess ({guess_b1:.5f}, {guess_b2:.5f}), "
        f"cell {cell:.5f} (within 2 cells)",
    )
    assert abs(b1_grid - guess_b1) <= 2 * cell
    assert abs(b2_grid - guess_b2) <= 2 * cell


# ------------------------------------------------------------------ criterion 7


def _check_suppression(preset, hist, h0_trace, label):
    final = unpack_params(hist.final_params, preset.under_order, preset.grid().k0)
    trace = solver.run(preset.config().with_control(final))
    ratio = trace.energy[-1] / h0_trace.energy[-1]
    mono = float(np.mean(np.diff(hist.objectives) <= 0)) if hist.n_iterations else 1.0
    ok = ratio <= 1e-2 and hist.n_iterations <= 200 and mono >= 0.95
    _report(
        7,
        ok,
        f"{label}: ratio {ratio:.3e} after {hist.n_iterations} iterations "
        f"(status {hist.status}), monotone fraction {mono:.3f}",
    )
    assert hist.n_iterations <= 200
    assert ratio <= 1e-2
    assert mono >= 0.95


def test_criterion_7_two_stream_constant_gd(ts_near_gd, ts_h0_trace):
    _check_suppression(TWO_STREAM, ts_near_gd, ts_h0_trace, "two-stream EET near-init")


def test_criterion_7_bump_on_tail_constant_gd(bot_near_gd, bot_h0_trace):
    _check_suppression(BUMP_ON_TAIL, bot_near_gd, bot_h0_trace, "bump-on-tail EET near-init")


# ------------------------------------------------------------------ criterion 8


def test_criterion_8_non_physical_trap(ts_far_wolfe, ts_h0_trace):
    hist = ts_far_wolfe
    inf_norm = float(np.max(np.abs(hist.final_params)))
    final_ee = hist.objectives[-1]
    baseline = ts_h0_trace.energy[-1]
    ok = inf_norm > 0.1 and final_ee < baseline
    _report(
        8,
        ok,
        f"Wolfe far-init terminal ||theta||_inf = {inf_norm:.3f} (> 0.1), "
        f"final EE {final_ee:.3e} vs baseline {baseline:.3e}",
    )
    assert inf_norm > 0.1
    assert final_ee < baseline


# ------------------------------------------------------------------ criterion 9


def test_criterion_9_mass_conservation_full_run(ts_h0_trace):
    cfg = TWO_STREAM.config()
    m0 = total_mass(build_initial_condition(cfg.equilibrium, cfg.perturbation, cfg.grid), cfg.grid)
    m1 = total_mass(ts_h0_trace.final_state, cfg.grid)
    drift = abs(m1 - m0) / m0
    ok = drift <= 1e-8
    _report(9, ok, f"two-stream preset full-run mass drift {drift:.3e} (<= 1e-8)")
    # boundary-vanishing companion (the preset's equilibrium does not vanish
    # at |v| = 6, its boundary level is ~1.5e-3 of the interior maximum)
    wide = TWO_STREAM.config(grid=make_grid(256, 256, 10 * np.pi, 9.0))
    wide_trace = solver.run(wide)
    w0 = total_mass(build_initial_condition(wide.equilibrium, wide.perturbation, wide.grid), wide.grid)
    w1 = total_mass(wide_trace.final_state, wide.grid)
    wide_drift = abs(w1 - w0) / w0
    print(f"   (boundary-vanishing variant, Lv=9: drift {wide_drift:.3e})")
    assert wide_drift <= 1e-8
    assert drift <= 1e-8


def test_criterion_9_equilibrium_fixed_point():
    cfg = TWO_STREAM.config(eps=0.0)
    trace = solver.run(cfg)
    state0 = build_initial_condition(cfg.equilibrium, cfg.perturbation, cfg.grid)
    dev = float(np.max(np.abs(trace.final_state.values - state0.values)))
    ok = dev <= 1e-12
    _report(9, ok, f"unperturbed equilibrium deviation over full run {dev:.3e} (<= 1e-12)")
    assert dev <= 1e-12


def test_criterion_9_poisson_analytic():
    grid = make_grid(256, 8, 10 * np.pi, 1.0)
    x = grid.x_nodes()
    cos_err = np.max(
        np.abs(
            solver.solve_poisson(1.0 + 0.3 * np.cos(grid.k0 * x), grid).values
            - (-(0.3 / grid.k0) * np.sin(grid.k0 * x))
        )
    )
    sin_err = np.max(
        np.abs(
            solver.solve_poisson(1.0 + 0.2 * np.sin(2 * grid.k0 * x), grid).values
            - ((0.2 / (2 * grid.k0)) * np.cos(2 * grid.k0 * x))
        )
    )
    ok = cos_err <= 1e-10 and sin_err <= 1e-10
    _report(9, ok, f"Poisson analytic cases: max errors {cos_err:.2e}, {sin_err:.2e} (<= 1e-10)")
    assert cos_err <= 1e-10 and sin_err <= 1e-10


def test_criterion_9_wolfe_conditions_on_accepted_steps(ts_far_wolfe):
    infos = ts_far_wolfe.wolfe_info
    assert infos, "no accepted line-search steps recorded"
    clean = [i for i in infos if not i.warning]
    violations = [i for i in clean if not i.satisfied]
    # re-verify both inequalities from the recorded quantities
    for info in clean:
        assert info.phi_alpha <= info.phi0 + 1e-4 * info.alpha * info.dphi0 + 1e-12
        assert abs(info.dphi_alpha) <= 0.9 * abs(info.dphi0) + 1e-12
    ok = not violations
    _report(
        9,
        ok,
        f"strong-Wolfe inequalities re-verified on {len(clean)} accepted steps "
        f"({len(infos) - len(clean)} budget-limited steps carry warnings)",
    )
    assert not violations


# ------------------------------------------------------------------ criterion 10


def test_criterion_10_gradient_richardson_consistency(ts_guess):
    preset = TWO_STREAM
    evaluator = ObjectiveEvaluator(ObjectiveKind.EET, preset.config(), preset.under_order)
    theta = np.zeros(4)
    theta[2] = ts_guess.b[0]
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(3):
        d = np.zeros(4)
        d[[2, 3]] = rng.normal(size=2)
        d /= np.linalg.norm(d)
        derivs = {}
        for h in (1e-6, 5e-7):
            derivs[h] = (evaluator(theta + h * d) - evaluator(theta - h * d)) / (2 * h)
        rel = abs(derivs[1e-6] - derivs[5e-7]) / abs(derivs[5e-7])
        worst = max(worst, rel)
    ok = worst <= 0.01
    _report(10, ok, f"EET directional derivatives at the guess: worst h vs h/2 deviation {worst:.2%} (<= 1%)")
    assert worst <= 0.01
