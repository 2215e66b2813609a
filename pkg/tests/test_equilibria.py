import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import fourier_by_quadrature, perturbation_fourier_by_quadrature
from vpcontrol.core import AliasingError, make_grid
from vpcontrol.equilibria import (
    AdditiveBumpCosine,
    BumpOnTail,
    MultiplicativeCosine,
    TwoStream,
    build_initial_condition,
    equilibrium_velocity_fourier,
    eval_equilibrium,
    perturbation_velocity_fourier,
)

TS = TwoStream(alpha=0.5, mu=2.4)
BOT = BumpOnTail(v1=-3.0, v2=4.5)


def test_two_stream_symmetry_at_half_weight():
    assert eval_equilibrium(TS, 2.4) == pytest.approx(eval_equilibrium(TS, -2.4), rel=1e-15)


def test_two_stream_center_value():
    # both Gaussians contribute exp(-2.88)/2 at v = 0
    expected = np.exp(-2.88) / np.sqrt(2 * np.pi)
    assert eval_equilibrium(TS, 0.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("spec,half_width", [(TS, 30.0), (BOT, 30.0)])
def test_unit_mass_by_quadrature(spec, half_width):
    mass = quad(lambda v: eval_equilibrium(spec, v), -half_width, half_width, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_bump_on_tail_unit_mass_on_preset_box():
    mass = quad(lambda v: eval_equilibrium(BOT, v), -9.0, 9.0, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_positivity_everywhere():
    v = np.linspace(-30, 30, 4001)
    assert np.all(eval_equilibrium(TS, v) > 0)
    assert np.all(eval_equilibrium(BOT, v) > 0)


def test_fourier_at_zero_is_total_mass():
    assert equilibrium_velocity_fourier(TS, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert equilibrium_velocity_fourier(BOT, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_two_stream_fourier_closed_form():
    expected = np.cos(2.4) * np.exp(-0.5)
    got = equilibrium_velocity_fourier(TS, 1.0)
    assert got.real == pytest.approx(expected, rel=1e-12)
    assert abs(got.imag) < 1e-15
    # independent quadrature oracle
    assert got == pytest.approx(fourier_by_quadrature(TS, 1.0), abs=1e-8)


def test_bump_on_tail_fourier_closed_form():
    expected = 0.9 * np.exp(6j) * np.exp(-2.0) + 0.1 * np.exp(-9j) * np.exp(-0.5)
    got = equilibrium_velocity_fourier(BOT, 2.0)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(fourier_by_quadrature(BOT, 2.0), abs=1e-8)


@pytest.mark.parametrize("spec", [TS, BOT])
@pytest.mark.parametrize("m", [-3.0, -1.0, 0.5, 1.0, 2.7, 10.0])
def test_fourier_matches_quadrature(spec, m):
    assert equilibrium_velocity_fourier(spec, m) == pytest.approx(
        fourier_by_quadrature(spec, m), abs=1e-8
    )


@given(m=st.floats(min_value=-10.0, max_value=10.0))
@settings(max_examples=60, deadline=None)
def test_fourier_bounded_by_mass(m):
    for spec in (TS, BOT):
        amp = abs(equilibrium_velocity_fourier(spec, m))
        assert amp <= 1.0 + 1e-12
        if abs(m) > 1e-3:
            assert amp < 1.0


def test_perturbation_fourier_multiplicative_equals_equilibrium():
    pert = MultiplicativeCosine(eps=0.001, mode=1)
    for m in (0.0, 0.7, 2.0):
        assert perturbation_velocity_fourier(pert, TS, m) == pytest.approx(
            equilibrium_velocity_fourier(TS, m), rel=1e-14
        )


def test_perturbation_fourier_bump_mass():
    pert = AdditiveBumpCosine(eps=0.001, mode=1)
    assert perturbation_velocity_fourier(pert, BOT, 0.0) == pytest.approx(0.1, abs=1e-14)


def test_perturbation_fourier_bump_closed_form():
    pert = AdditiveBumpCosine(eps=0.001, mode=1)
    expected = 0.1 * np.exp(-4.5j) * np.exp(-1.0 / 8.0)
    got = perturbation_velocity_fourier(pert, BOT, 1.0)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(perturbation_fourier_by_quadrature(pert, BOT, 1.0), abs=1e-8)


def test_initial_condition_unperturbed_is_x_independent():
    grid = make_grid(32, 32, 10 * np.pi, 6.0)
    state = build_initial_condition(TS, MultiplicativeCosine(eps=0.0, mode=1), grid)
    assert np.all(state.values == state.values[0][None, :])


def test_initial_condition_cosine_peak():
    grid = make_grid(64, 64, 10 * np.pi, 6.0)
    state = build_initial_condition(TS, MultiplicativeCosine(eps=0.001, mode=1), grid)
    feq0 = eval_equilibrium(TS, grid.v_nodes())
    j = int(np.argmin(np.abs(grid.v_nodes())))
    ratio = state.values[:, j] / feq0[j]
    assert ratio.max() == pytest.approx(1.001, abs=1e-12)


def test_additive_perturbation_has_zero_x_average():
    grid = make_grid(64, 64, 20 * np.pi, 9.0)
    state = build_initial_condition(BOT, AdditiveBumpCosine(eps=0.001, mode=1), grid)
    feq = eval_equilibrium(BOT, grid.v_nodes())
    residual = state.values - feq[None, :]
    assert np.max(np.abs(residual.mean(axis=0))) < 1e-18


def test_unresolvable_mode_rejected():
    grid = make_grid(16, 16, 10 * np.pi, 6.0)
    with pytest.raises(AliasingError):
        build_initial_condition(TS, MultiplicativeCosine(eps=0.001, mode=8), grid)
