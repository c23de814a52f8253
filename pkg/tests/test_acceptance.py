"""Exit criteria: one test per criterion, each at its stated tolerance."""

import json
import math

import numpy as np
from scipy import stats

from conftest import four_petal_table
from deformable_bell import analytic, density, game, gamma
from deformable_bell import montecarlo as mc
from deformable_bell.analytic import DetectorQuadruple
from deformable_bell.circle import wrap
from deformable_bell.montecarlo import ExperimentConfig

PI = math.pi
SQRT2 = math.sqrt(2)
CANON = DetectorQuadruple.canonical()
# an estimate with stderr 0 (e_hat = +-1) must match to rounding
ZERO_SE_FLOOR = 1e-12


def _within(est, k=4.0):
    return abs(est.e_hat - est.e_analytic) <= max(k * est.stderr, ZERO_SE_FLOOR)


def _random_quadruples(rng, n):
    o = rng.uniform(-PI, PI, (n, 4))  # a1, a2, b1, b2
    return wrap(np.stack([o[:, 2] - o[:, 0], o[:, 3] - o[:, 0],
                          o[:, 2] - o[:, 1], o[:, 3] - o[:, 1]], axis=-1))


def test_ac01_flat_correlation_law(criterion):
    thetas = [0.0, PI / 4, -PI / 4, PI / 2, -PI / 2, 3 * PI / 4, -3 * PI / 4, -PI]
    closed = all(analytic.corr_flat(t) == 1 - (2 / PI) * abs(t) for t in thetas)
    est = mc.run_sweep("flat", thetas, 10**6, seed=101)
    worst = max(abs(e.z_score) if e.stderr else 0.0 for e in est)
    ok = closed and all(_within(e) for e in est)
    criterion(1, "flat correlation law, closed form + MC n=1e6 within 4 stderr", ok,
              f"max |z| = {worst:.2f}")


def test_ac02_quantum_deformed_correlation(criterion, qmap):
    t = np.linspace(-PI, PI, 721)
    err = float(np.max(np.abs(analytic.corr_deform(qmap, t) - np.cos(t))))
    grid = np.linspace(0, PI, 9)
    est = mc.run_sweep("deform", grid, 10**6, seed=202, density="quantum")
    mc_ok = all(_within(e) for e in est) and all(
        abs(e.e_analytic - math.cos(e.theta)) <= 1e-9 for e in est)
    worst = max(abs(e.z_score) if e.stderr else 0.0 for e in est)
    criterion(2, "rho=|sin|/4 gives cos(theta): quadrature <= 1e-9 on 721 pts, MC 9 pts",
              err <= 1e-9 and mc_ok, f"quadrature err {err:.2e}, max |z| {worst:.2f}")


def test_ac03_chsh_violation(criterion, qmap):
    stat = analytic.chsh_value(lambda x: analytic.corr_deform(qmap, x), CANON)
    rep = mc.run_chsh(ExperimentConfig(model="deform", density="quantum",
                                       quadruple=CANON.as_tuple(), rounds=4 * 10**6, seed=303))
    ok = abs(stat - 2 * SQRT2) <= 1e-9 and abs(rep.statistic - 2 * SQRT2) <= 4 * rep.statistic_stderr
    criterion(3, "CHSH = 2 sqrt 2: analytic within 1e-9, MC n=4e6 within 4 stderr", ok,
              f"analytic {stat:.12f}, MC {rep.statistic:.4f} +- {rep.statistic_stderr:.4f}")


def test_ac04_flat_chsh_bound(criterion):
    rng = np.random.default_rng(404)
    rand = analytic.chsh_values(analytic.corr_flat, _random_quadruples(rng, 10**5))
    g = np.linspace(-PI, PI, 41, endpoint=False)
    a2, b1, b2 = (x.ravel() for x in np.meshgrid(g, g, g, indexing="ij"))
    a1 = np.zeros_like(a2)
    scan = analytic.chsh_values(analytic.corr_flat, wrap(np.stack(
        [b1 - a1, b2 - a1, b1 - a2, b2 - a2], axis=-1)))
    sample = max(analytic.chsh_value(analytic.corr_flat, DetectorQuadruple(*q))
                 for q in _random_quadruples(rng, 1000))
    top = float(max(rand.max(), scan.max(), sample))
    canon = analytic.chsh_value(analytic.corr_flat, CANON)
    criterion(4, "flat CHSH <= 2 + 1e-12 over 1e5 random + grid scan; canonical = 2",
              top <= 2 + 1e-12 and canon == 2.0, f"max {top:.15f}, canonical {canon!r}")


def test_ac05_pointwise_chsh_identity(criterion):
    rng = np.random.default_rng(505)
    lam, a1, a2, b1, b2 = rng.uniform(-PI, PI, (5, 10**4))
    _, combo = game.counterfactual_flat(lam, a1, a2, b1, b2)
    bad = int(np.count_nonzero(np.abs(combo) != 2))
    criterion(5, "counterfactual combination has |.| = 2 for 1e4 draws", bad == 0,
              f"{bad} exceptions")


def test_ac06_holonomy(criterion, umap, qmap):
    rng = np.random.default_rng(606)
    worst = 0.0
    for q in _random_quadruples(rng, 1000):
        rep = analytic.holonomy(umap, DetectorQuadruple(*q))
        worst = max(worst, abs(rep.delta_wrapped))
    exact = PI * (1 - SQRT2)
    q_err = abs(analytic.holonomy(qmap, CANON).delta_raw - exact)
    criterion(6, "holonomy: uniform 0 within 1e-12 (1e3 quads); quantum canonical pi(1-sqrt2) within 1e-9",
              worst <= 1e-12 and q_err <= 1e-9, f"uniform max {worst:.1e}, quantum err {q_err:.1e}")


def test_ac07_map_round_trip(criterion, umap, qmap, petal_map):
    x = np.linspace(-PI, PI, 1001)
    errs = [float(np.max(np.abs(gamma.gamma(m, gamma.gamma_inverse(m, x)) - x)))
            for m in (umap, qmap, petal_map)]
    criterion(7, "Gamma(Gamma^-1(x)) = x within 1e-9, 1001 pts, uniform/quantum/tabulated",
              max(errs) <= 1e-9, ", ".join(f"{e:.1e}" for e in errs))


def test_ac08_push_forward(criterion, umap, qmap):
    n, bins = 10**6, 64
    edges = np.linspace(-PI, PI, bins + 1)
    limit = stats.chi2.ppf(0.999, bins - 1)
    results = []
    for seed, m in ((808, umap), (809, qmap)):
        u = np.random.default_rng(seed).uniform(-PI, PI, n)
        counts = np.histogram(gamma.gamma(m, u), bins=edges)[0]
        expected = n * np.diff(density.cdf(m.density, edges))
        results.append(float(np.sum((counts - expected) ** 2 / expected)))
    criterion(8, f"push-forward chi-square (64 bins, n=1e6) below 99.9% quantile {limit:.1f}",
              max(results) < limit, "uniform {:.1f}, quantum {:.1f}".format(*results))


def test_ac09_zero_mean(criterion):
    n = 10**6
    worst = 0.0
    for model, dens in (("flat", "uniform"), ("deform", "quantum")):
        for theta in (0.0, PI / 4, PI / 2):
            z = mc.zero_mean_check(ExperimentConfig(model=model, density=dens, theta=theta,
                                                    rounds=n, seed=909))
            worst = max(worst, abs(z.mean_a), abs(z.mean_b))
    criterion(9, "single-party means within 4/sqrt(n), both models, n=1e6",
              worst <= 4 / math.sqrt(n), f"max |mean| {worst:.2e}")


def test_ac10_inverse_design(criterion):
    t = np.linspace(0, PI, 2049)
    dq = analytic.design_density(t, np.cos(t))
    err_q = float(np.max(np.abs(dq.values - np.abs(np.sin(dq.nodes)) / 4)))
    du = analytic.design_density(t, 1 - 2 * t / PI)
    err_u = float(np.max(np.abs(du.values - 1 / (2 * PI))))
    criterion(10, "design(cos) -> |sin|/4 within 1e-6; design(linear) -> 1/2pi within 1e-9 (4097 nodes)",
              dq.grid_size == 4097 and err_q <= 1e-6 and err_u <= 1e-9,
              f"{err_q:.1e}, {err_u:.1e}")


def test_ac11_determinism(criterion):
    cfg = ExperimentConfig(model="deform", density="quantum", quadruple=CANON.as_tuple(),
                           rounds=10**6, seed=1111)
    a = json.dumps(mc.run_chsh(cfg, workers=1).to_dict(), allow_nan=False)
    b = json.dumps(mc.run_chsh(cfg, workers=4).to_dict(), allow_nan=False)
    criterion(11, "run_chsh JSON bit-identical at 1 and 4 workers", a == b)


def test_ac12_gauge_invariance(criterion):
    rng = np.random.default_rng(1212)
    alpha, beta, lam, c = rng.uniform(-PI, PI, (4, 10**4))
    base = game.flat_outcomes_absolute(alpha, beta, lam)
    shifted = game.flat_outcomes_absolute(wrap(alpha + c), wrap(beta + c), wrap(lam + c))
    ok = np.array_equal(base[0], shifted[0]) and np.array_equal(base[1], shifted[1])
    criterion(12, "flat outcomes invariant under joint shifts, 1e4 cases, exact", ok)
