import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deformable_bell import analytic, density, gamma
from deformable_bell.analytic import DesignError, DetectorQuadruple, InconsistentQuadrupleError

PI = math.pi
angle = st.floats(min_value=-PI, max_value=PI, allow_nan=False, exclude_max=True)


@pytest.mark.parametrize("theta, expected", [
    (0.0, 1.0), (PI / 2, 0.0), (-PI / 2, 0.0), (PI / 4, 0.5), (-PI, -1.0), (PI, -1.0),
])
def test_corr_flat(theta, expected):
    assert analytic.corr_flat(theta) == pytest.approx(expected, abs=1e-15)


def test_corr_deform_quantum_is_cosine(qmap):
    assert analytic.corr_deform(qmap, PI / 3) == pytest.approx(0.5, abs=1e-9)
    t = np.linspace(-PI, PI, 721)
    assert np.max(np.abs(analytic.corr_deform(qmap, t) - np.cos(t))) <= 1e-9


@pytest.mark.parametrize("theta", [PI / 4, -PI / 4, 3 * PI / 4, -3 * PI / 4])
def test_uniform_recovers_flat(umap, theta):
    assert analytic.corr_deform(umap, theta) == pytest.approx(analytic.corr_flat(theta), abs=1e-12)


@pytest.mark.parametrize("which", ["umap", "qmap", "petal_map"])
def test_calibration(which, request):
    m = request.getfixturevalue(which)
    assert analytic.corr_deform(m, 0.0) == 1.0
    for t in (PI / 2, -PI / 2):
        assert analytic.corr_deform(m, t) == pytest.approx(0.0, abs=1e-9)
    assert analytic.corr_deform(m, PI) == pytest.approx(-1.0, abs=1e-12)


@settings(deadline=None)
@given(angle)
def test_even_and_half_turn_antisymmetric(petal_map, theta):
    e = analytic.corr_deform(petal_map, theta)
    assert e == analytic.corr_deform(petal_map, -theta)
    from deformable_bell.circle import wrap
    assert analytic.corr_deform(petal_map, wrap(PI - theta)) == pytest.approx(-e, abs=1e-9)


def test_corr_deform_equals_mass_form(petal_map):
    t = np.linspace(-PI, PI, 257)
    mass = np.abs(density.cdf(petal_map.density, t) - density.cdf(petal_map.density, 0.0))
    assert np.max(np.abs(analytic.corr_deform(petal_map, t) - (1 - 4 * mass))) <= 1e-12


def test_chsh_examples(qmap):
    q = DetectorQuadruple.canonical()
    assert analytic.chsh_value(analytic.corr_flat, q) == pytest.approx(2.0, abs=1e-15)
    assert analytic.chsh_value(lambda t: analytic.corr_deform(qmap, t), q) == pytest.approx(
        2 * math.sqrt(2), abs=1e-9)
    assert analytic.chsh_value(analytic.corr_flat, (0, 0, 0, 0)) == 2.0


def test_inconsistent_quadruple_rejected():
    with pytest.raises(InconsistentQuadrupleError):
        DetectorQuadruple(0.1, 0.2, 0.3, 0.5)
    with pytest.raises(InconsistentQuadrupleError):
        analytic.chsh_values(analytic.corr_flat, [[0.1, 0.2, 0.3, 0.5]])


def test_quadruple_from_orientations_is_consistent():
    q = DetectorQuadruple.from_orientations(0.0, PI / 2, -PI / 4, PI / 4)
    assert q.as_tuple() == pytest.approx((-PI / 4, PI / 4, -3 * PI / 4, -PI / 4))


def test_algebraic_ceiling_for_any_bounded_correlator():
    rng = np.random.default_rng(11)
    o = rng.uniform(-PI, PI, (2000, 4))
    q = np.stack([o[:, 2] - o[:, 0], o[:, 3] - o[:, 0], o[:, 2] - o[:, 1], o[:, 3] - o[:, 1]], -1)
    from deformable_bell.circle import wrap
    q = wrap(q)
    for corr in (np.cos, np.sin, lambda t: np.sign(np.cos(3 * t)), analytic.corr_flat):
        assert np.all(analytic.chsh_values(corr, q) <= 4.0)


def test_holonomy_quantum_canonical(qmap):
    rep = analytic.holonomy(qmap, DetectorQuadruple.canonical())
    exact = PI * (1 - math.sqrt(2))
    assert exact == pytest.approx(-1.3012902, abs=1e-7)
    assert rep.delta_raw == pytest.approx(exact, abs=1e-9)
    assert rep.delta_wrapped == rep.delta_raw
    g = lambda t: gamma.gamma_inverse(qmap, t)  # noqa: E731
    assert rep.delta_raw == pytest.approx(3 * g(PI / 4) - g(3 * PI / 4), abs=1e-15)


def test_holonomy_uniform_and_degenerate(umap, qmap):
    assert analytic.holonomy(umap, DetectorQuadruple.canonical()).delta_raw == pytest.approx(0, abs=1e-12)
    assert analytic.holonomy(qmap, (0, 0, 0, 0)).delta_raw == 0.0


def test_holonomy_raw_can_leave_the_circle(qmap):
    # chain shifts add on the real line; the wrapped value is reported alongside
    q = DetectorQuadruple.from_orientations(0.0, 3.0, -3.0, 0.5)
    rep = analytic.holonomy(qmap, q)
    from deformable_bell.circle import wrap
    assert rep.delta_wrapped == wrap(rep.delta_raw)


def test_design_cosine_recovers_quantum():
    t = np.linspace(0, PI, 2049)
    d = analytic.design_density(t, np.cos(t))
    assert d.grid_size == 4097
    assert np.max(np.abs(d.values - np.abs(np.sin(d.nodes)) / 4)) <= 1e-6


def test_design_linear_recovers_uniform():
    t = np.linspace(0, PI, 2049)
    d = analytic.design_density(t, 1 - 2 * t / PI)
    assert np.max(np.abs(d.values - 1 / (2 * PI))) <= 1e-9


def test_design_rejects_rising_segment():
    t = np.linspace(0, PI, 513)
    e = np.cos(t)
    bump = np.abs(t - PI / 2) < 0.05
    e[bump] = 0.3 + 0.2 * np.cos(10 * (t[bump] - PI / 2))
    with pytest.raises(DesignError) as exc:
        analytic.design_density(t, e)
    assert exc.value.constraint == "non_negativity"


@pytest.mark.parametrize("e0, epi", [(0.9, -1.0), (1.0, -0.8)])
def test_design_rejects_endpoints(e0, epi):
    t = np.linspace(0, PI, 257)
    e = np.cos(t)
    e[0], e[-1] = e0, epi
    with pytest.raises(DesignError) as exc:
        analytic.design_density(t, e)
    assert exc.value.constraint == "endpoint"


def test_design_rejects_broken_half_turn_symmetry():
    # monotone with the right endpoints, but E(pi - t) != -E(t)
    t = np.linspace(0, PI, 1025)
    e = 2 * (1 - t / PI) ** 2 - 1
    with pytest.raises(DesignError):
        analytic.design_density(t, e)


def test_design_round_trip_through_correlation(petal_map):
    theta, e = analytic.correlation_table(petal_map, 2049)
    d = analytic.design_density(theta, e)
    assert np.max(np.abs(d.values - petal_map.density.values)) <= 1e-6
