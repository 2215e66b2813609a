import numpy as np
import pytest

from oracles import kl_by_double_loop, l2_by_double_loop
from vpcontrol import solver
from vpcontrol.core import DistributionState, RecordFlags, SolverBlowUp, make_grid
from vpcontrol.equilibria import MultiplicativeCosine, TwoStream, build_initial_condition, eval_equilibrium
from vpcontrol.objectives import (
    OBJECTIVE_FAILURE,
    ObjectiveKind,
    evaluate_objective,
    kl_divergence,
    l2_misfit,
    objective_from_trace,
)
from vpcontrol.presets import TWO_STREAM

TS = TwoStream()
GRID = make_grid(32, 48, 10 * np.pi, 6.0)


def _sampled_equilibrium():
    return build_initial_condition(TS, MultiplicativeCosine(eps=0.0), GRID)


def _perturbed():
    return build_initial_condition(TS, MultiplicativeCosine(eps=0.001), GRID)


# -------------------------------------------------------------------- KL


def test_kl_vanishes_at_equilibrium():
    assert kl_divergence(_sampled_equilibrium(), TS, GRID) == 0.0


def test_kl_initial_data_matches_double_loop_oracle():
    state = _perturbed()
    feq = eval_equilibrium(TS, GRID.v_nodes())
    oracle = kl_by_double_loop(state.values, feq, GRID.dx, GRID.dv)
    got = kl_divergence(state, TS, GRID)
    assert got == pytest.approx(oracle, rel=1e-12)
    # second-order expansion: (eps^2/4) * Lx * box mass, within a few percent
    box_mass = feq.sum() * GRID.dv
    assert got == pytest.approx(0.001**2 / 4 * GRID.Lx * box_mass, rel=0.01)


def test_kl_uniform_inflation_closed_form():
    state = _perturbed()
    c = 0.25
    inflated = DistributionState(values=(1 + c) * state.values, time=0.0)
    kl0 = kl_divergence(state, TS, GRID)
    mass = state.values.sum() * GRID.dx * GRID.dv
    expected = (1 + c) * (kl0 + mass * np.log(1 + c))
    assert kl_divergence(inflated, TS, GRID) == pytest.approx(expected, rel=1e-12)
    assert kl_divergence(inflated, TS, GRID) > kl0


def test_kl_floor_handles_zero_cells():
    values = _sampled_equilibrium().values.copy()
    values[:, :4] = 0.0  # dead cells contribute nothing
    state = DistributionState(values=values)
    assert np.isfinite(kl_divergence(state, TS, GRID))


# -------------------------------------------------------------------- L2


def test_l2_vanishes_at_equilibrium():
    assert l2_misfit(_sampled_equilibrium(), TS, GRID) == 0.0


def test_l2_constant_offset_closed_form():
    c = 0.01
    state = DistributionState(values=_sampled_equilibrium().values + c)
    expected = 0.5 * c**2 * GRID.Lx * 2 * GRID.Lv
    assert l2_misfit(state, TS, GRID) == pytest.approx(expected, rel=1e-12)


def test_l2_initial_data_matches_oracle():
    state = _perturbed()
    feq = eval_equilibrium(TS, GRID.v_nodes())
    oracle = l2_by_double_loop(state.values, feq, GRID.dx, GRID.dv)
    got = l2_misfit(state, TS, GRID)
    assert got == pytest.approx(oracle, rel=1e-12)
    # (eps^2/4) * Lx * sum feq^2 dv with the discrete velocity sum
    expected = 0.001**2 / 4 * GRID.Lx * float((feq**2).sum() * GRID.dv)
    assert got == pytest.approx(expected, rel=1e-12)


# ------------------------------------------------------------ evaluate_objective


def _small_config(eps=0.001, T=1.0):
    return TWO_STREAM.config(eps=eps, T=T, grid=GRID)


def test_unperturbed_time_integrated_energy_is_zero():
    value = evaluate_objective(ObjectiveKind.EET, _small_config(eps=0.0))
    assert value < 1e-20


def test_final_energy_grows_from_perturbation():
    ee = evaluate_objective(ObjectiveKind.EE, _small_config(T=2.0))
    assert ee > 0.0


def test_eet_lower_bound_left_rectangle():
    cfg = _small_config(T=2.0)
    trace = solver.run(cfg.with_record(RecordFlags()))
    eet = evaluate_objective(ObjectiveKind.EET, cfg)
    assert eet >= cfg.dt * trace.energy[0] > 0.0


def test_time_integrated_matches_snapshot_recomputation():
    cfg = _small_config(T=1.0).with_record(
        RecordFlags(kl_series=True, l2_series=True, snapshots=True)
    )
    trace = solver.run(cfg)
    klt_series = float(trace.kl_series[:-1].sum()) * cfg.dt
    klt_snapshots = (
        sum(kl_divergence(s, cfg.equilibrium, cfg.grid) for s in trace.snapshots[:-1]) * cfg.dt
    )
    assert klt_series == pytest.approx(klt_snapshots, rel=1e-10)
    l2t_series = float(trace.l2_series[:-1].sum()) * cfg.dt
    l2t_snapshots = (
        sum(l2_misfit(s, cfg.equilibrium, cfg.grid) for s in trace.snapshots[:-1]) * cfg.dt
    )
    assert l2t_series == pytest.approx(l2t_snapshots, rel=1e-10)


@pytest.mark.parametrize("kind", list(ObjectiveKind))
def test_all_objectives_nonnegative(kind):
    value = evaluate_objective(kind, _small_config(T=1.0))
    assert 0.0 <= value < OBJECTIVE_FAILURE


def test_blow_up_maps_to_sentinel(monkeypatch):
    def explode(cfg):
        raise SolverBlowUp("boom")

    monkeypatch.setattr(solver, "run", explode)
    assert evaluate_objective(ObjectiveKind.EE, _small_config()) == OBJECTIVE_FAILURE


def test_missing_series_is_an_error():
    cfg = _small_config(T=0.5)
    trace = solver.run(cfg.with_record(RecordFlags()))
    with pytest.raises(ValueError):
        objective_from_trace(ObjectiveKind.KLT, trace, cfg)
