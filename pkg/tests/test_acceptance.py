"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed as they are
produced and again in a block at the end of the pytest session.
"""
import numpy as np
import pytest

from dampedeuler import barenblatt as bb
from dampedeuler import entropy as en
from dampedeuler import inequalities as iq
from dampedeuler.params import derive_gas_model, rate_table
from dampedeuler.quadrature import even_moment
from dampedeuler.rates import (compare_to_theory, distance_table, fit_slope,
                               weighted_estimate_monitor)
from dampedeuler.solver import Grid1D, SolverConfig, required_half_width, simulate

RESULTS = []
LEMMA_GAMMAS = (1.2, 1.5, 2.0, 3.0, 5.0)
SAMPLES = 10 ** 6


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# reference profile


def test_criterion_01_barenblatt_mass():
    worst = 0.0
    for g in (1.4, 2.0, 3.0):
        for nu in (0.0, 0.5, 0.9):
            model = derive_gas_model(g, nu)
            for M in (0.5, 1.0, 8.0):
                prof = bb.calibrate(model, M)
                for t in (0.0, 1.0, 1e2, 1e4):
                    worst = max(worst, abs(bb.mass_integral(prof, t) - M) / M)
    report(1, worst < 1e-8, f"max relative mass error {worst:.3e} (< 1e-8)")


def test_criterion_02_pme_residual_order():
    hs = np.array([1e-2, 5e-3, 2.5e-3])
    orders = []
    for g in (1.4, 2.0, 3.0):
        for nu in (0.0, 0.5, 0.9):
            prof = bb.calibrate(derive_gas_model(g, nu), 1.0)
            for t in (0.0, 1.0, 1e2, 1e4):
                res = [bb.pme_residual(prof, h, t, similarity=True) for h in hs]
                orders.append(np.polyfit(np.log(hs), np.log(res), 1)[0])
    lo, hi = min(orders), max(orders)
    report(2, lo >= 1.8 and hi <= 2.2, f"observed orders in [{lo:.4f}, {hi:.4f}] (2.0 +- 0.2)")


def test_criterion_03_darcy_identity():
    worst = 0.0
    for g, nu in ((1.4, 0.0), (2.0, 0.5), (3.0, 0.9)):
        prof = bb.calibrate(derive_gas_model(g, nu), 1.0)
        for t in (0.0, 1.0, 100.0):
            e = float(bb.support_edge(prof, t))
            x = np.linspace(-0.95 * e, 0.95 * e, 100)   # even count: x = 0 is not sampled
            ref = bb.darcy_momentum(prof, x, t)
            worst = max(worst, float(np.max(np.abs(bb.momentum(prof, x, t) - ref) / np.abs(ref))))
    report(3, worst < 1e-6, f"max pointwise relative error {worst:.3e} (< 1e-6)")


# ---------------------------------------------------------------------------
# entropy and inequalities


def test_criterion_04_entropy_normalization():
    worst_ratio = 0.0
    for g in (1.4, 2.0, 3.0, 5.0):
        lam = (3.0 - g) / (2.0 * (g - 1.0))
        ratio = even_moment(2.0, lam) / even_moment(0.0, lam)
        worst_ratio = max(worst_ratio, abs(ratio - (g - 1.0) / (2.0 * g)))
    worst_pair = 0.0
    rho, u = np.meshgrid(np.linspace(0.0, 3.0, 50), np.linspace(-2.0, 2.0, 50))
    for g in (1.4, 2.0, 3.0, 5.0):
        model = derive_gas_model(g, 0.0)
        eta, q = en.entropy_pair(model, en.EntropyWeight.quadratic(), rho, rho * u)
        ref = en.mechanical_energy(model, rho, rho * u)
        qref = en.energy_flux(model, rho, rho * u)
        worst_pair = max(worst_pair, float(np.max(np.abs(eta - ref))), float(np.max(np.abs(q - qref))))
    ok = worst_ratio < 1e-10 and worst_pair < 1e-8
    report(4, ok, f"normalization error {worst_ratio:.2e} (< 1e-10); "
                  f"quadratic pair vs energy {worst_pair:.2e} (< 1e-8)")


def test_criterion_05_density_ratio_oracles():
    infs = []
    boundary = 0.0
    rb = np.linspace(1e-3, 2.0, 200)
    for g in LEMMA_GAMMAS:
        model = derive_gas_model(g, 0.0)
        rep = iq.check_lemma31(model, samples=SAMPLES, seed=0)
        reps = (rep,) + iq.check_lemma32(model, samples=SAMPLES, seed=0)
        assert all(r.sample_count == SAMPLES for r in reps)
        infs += [(g, r.lemma_id, r.sampled_infimum, r.passed) for r in reps]
        row0 = iq.lemma31_ratio(model, rb, np.zeros_like(rb))
        row1 = iq.lemma31_ratio(model, np.zeros_like(rb), rb)
        target = g / (g - 1.0) ** ((g + 1.0) / g)
        boundary = max(boundary, float(np.max(np.abs(row0 - 1.0))),
                       float(np.max(np.abs(row1 - target))))
    ok = all(p and v > 0 for _, _, v, p in infs) and boundary < 1e-10
    low = min(infs, key=lambda r: r[2])
    report(5, ok, f"{len(infs)} reports, smallest sampled infimum {low[2]:.4g} ({low[1]}, gamma={low[0]}); "
                  f"boundary rows within {boundary:.1e} (< 1e-10)")


def test_criterion_06_pressure_region_bounds():
    details = []
    ok = True
    for g in (1.2, 1.5, 1.8):
        model = derive_gas_model(g, 0.0)
        om1, om2 = iq.check_lemma33(model, samples=SAMPLES, seed=0)
        assert om1.sample_count + om2.sample_count == SAMPLES
        target = iq.c2_constant(g)
        ok = ok and om1.sampled_infimum > 0 and om2.sampled_infimum >= target
        details.append(f"gamma={g}: Omega2 inf {om2.sampled_infimum:.5f} >= {target:.5f}, "
                       f"Omega1 inf {om1.sampled_infimum:.4g}")
    assert iq.c2_constant(1.5) == pytest.approx(0.23717, abs=5e-6)
    report(6, ok, "; ".join(details))


def test_criterion_07_remainder_properties():
    rng = np.random.default_rng(2024)
    a = np.linspace(0.0, 5.0, 501)
    worst_even = worst_h = 0.0
    worst_b = worst_m = -np.inf
    for g in LEMMA_GAMMAS:
        model = derive_gas_model(g, 0.0)
        h = en.h_function(model, a)
        h0 = (g - 1.0) ** 2 / (g * (g + 1.0)) * model.c2
        # relative: h reaches ~1e8 on [0, 5] for gamma near 1, where 1e-10 absolute is below one ulp
        worst_even = max(worst_even, float(np.max(np.abs(h - en.h_function(model, -a)) / h)))
        worst_h = max(worst_h, abs(float(en.h_function(model, 0.0)) - h0), float(np.max(h0 - h)))
        n = 10 ** 4
        rho = rng.uniform(0.01, 2.0, n)
        mom = rho * rng.uniform(-2.0, 2.0, n)
        b = en.B_function(model, rho, mom)
        step = 1e-4 * np.abs(mom) + 1e-12
        dbm = (en.B_function(model, rho, mom + step) - en.B_function(model, rho, mom - step)) / (2 * step)
        scale = model.c2 * mom ** 2 + 1e-300
        worst_b = max(worst_b, float(np.max(-b / scale)))
        worst_m = max(worst_m, float(np.max((2 * b - mom * dbm) / scale)))
    ok = worst_even < 1e-10 and worst_h < 1e-8 and worst_b <= 1e-12 and worst_m <= 1e-6
    report(7, ok, f"relative evenness error {worst_even:.1e} (< 1e-10); h(a) - h(0) >= -{max(worst_h, 0):.1e}; "
                  f"min B/scale {-worst_b:.1e}; max (2B - m dB/dm)/scale {worst_m:.1e} (<= 1e-6)")


def test_criterion_08_weighted_norm_slopes():
    g = 2.0
    q = (g + 1.0) / g
    t = np.geomspace(10.0, 1e4, 12)
    worst = 0.0
    for nu in (0.0, 0.7):
        prof = bb.calibrate(derive_gas_model(g, nu), 1.0)
        cases = [
            (lambda s: bb.weighted_lp_norm(prof, 1.0, 0.0, 1.0, s), 1.0, 0.0, 1.0, None),
            (lambda s: bb.weighted_lp_norm(prof, 0.0, 2.0, q, s), 0.0, 2.0, q, None),
            (lambda s: bb.accel_lp_norm(prof, 0.0, q, s), None, None, q, 0.0),
            (lambda s: bb.accel_lp_norm(prof, 1.0, q, s), None, None, q, 1.0),
        ]
        for f, b1, b2, p, delta in cases:
            slope = np.polyfit(np.log1p(t), np.log([f(s) for s in t]), 1)[0]
            if delta is None:
                expected = -(p * ((1 + nu) * b1 + (g - nu) * b2) - (1 + nu)) / (p * (g + 1))
            else:
                expected = -(p * (delta * (1 + nu) + 2 * g + 1 - nu) - (1 + nu)) / (p * (g + 1))
            worst = max(worst, abs(slope - expected))
    report(8, worst < 1e-3, f"max |fitted - closed-form exponent| {worst:.2e} (< 1e-3)")


# ---------------------------------------------------------------------------
# full runs


def full_run(gamma, nu, end_time, n_cells=4000, n_outputs=41):
    model = derive_gas_model(gamma, nu)
    prof = bb.calibrate(model, 1.0)
    grid = Grid1D.symmetric(required_half_width(prof, end_time), n_cells)
    times = np.concatenate([[0.0], np.geomspace(1.0, end_time, n_outputs)])
    cfg = SolverConfig(end_time=end_time, output_times=times, initial_data="box")
    snaps, diag = simulate(model, grid, cfg, 1.0)
    return model, prof, snaps, diag


@pytest.fixture(scope="module")
def run_gamma2():
    return full_run(2.0, 0.0, 1e4)


@pytest.fixture(scope="module")
def run_gamma15():
    # the late-time window lies well past the inertial transient only for
    # horizons of order 1e6 and beyond at this damping strength
    return full_run(1.5, 0.7, 1e7)


def riemann_bound(model, state):
    """max over cells of |u| + rho^theta (vacuum cells contribute 0)."""
    u = np.divide(np.abs(state.mom), state.rho, out=np.zeros_like(state.rho), where=state.rho > 0)
    return float(np.max(u + np.maximum(state.rho, 0.0) ** model.theta))


@pytest.mark.slow
def test_criterion_09_conservation_and_invariant_region(run_gamma2):
    model, prof, snaps, diag = run_gamma2
    d = diag.to_dict()
    w0 = riemann_bound(model, snaps[0])
    speed_now = max(riemann_bound(model, s) for s in snaps)
    ratio = max(float(np.max(np.divide(np.abs(s.mom), s.rho, out=np.zeros_like(s.rho), where=s.rho > 0)))
                for s in snaps)
    ok = (d["max_mass_drift"] < 1e-10 and d["min_rho"] >= 0.0
          and d["max_w"] <= w0 + 1e-8 and -d["min_z"] <= w0 + 1e-8 and speed_now <= w0 + 1e-8)
    report(9, ok, f"mass drift {d['max_mass_drift']:.2e} (< 1e-10); min rho {d['min_rho']:.2e}; "
                  f"max |u| + rho^theta {max(d['max_w'], -d['min_z']):.12f} vs initial {w0:.12f}; "
                  f"max |m|/rho over snapshots {ratio:.4f} (0 initially)")


def rate_rows(run, window=None):
    model, prof, snaps, _ = run
    table = rate_table(model)
    series = distance_table(model, prof, snaps)
    fits = [fit_slope(series[q], window) for q in ("l1_density", "lgamma_density", "eta_star_integral")]
    return table, series, {r["quantity"]: r for r in compare_to_theory(fits, table, margin=0.1)}


@pytest.mark.slow
def test_criterion_10_rates_gamma2(run_gamma2):
    table, series, rows = rate_rows(run_gamma2)
    assert table.k == pytest.approx(1 / 9 - table.epsilon)
    assert table.phi == pytest.approx(5 / 9 - table.epsilon)
    ok = all(r["verdict"] == "CONSISTENT" for r in rows.values())
    parts = [f"{q} slope {r['slope']:.4f} vs -0.9*{r['theory_rate']:.4f}" for q, r in rows.items()]
    l1 = series["l1_density"]
    early = fit_slope(l1, (100.0, 1e3)).slope
    late = fit_slope(l1, (1e3, 1e4)).slope
    print(f"  diagnostic: L1 slope on [1e2, 1e3] {early:.4f}, on [1e3, 1e4] {late:.4f}")
    report("10a", ok, "gamma=2 nu=0: " + "; ".join(parts))


@pytest.mark.slow
def test_criterion_10_rates_gamma15(run_gamma15):
    model, prof, snaps, diag = run_gamma15
    table, series, rows = rate_rows(run_gamma15)
    assert table.k == pytest.approx(0.09 - table.epsilon)
    r = rows["l1_density"]
    # sanity: the domain held the solution (same threshold as the solver's overflow check)
    ok = r["slope"] <= -0.9 * 0.09 and diag.max_boundary_mass <= 1e-12
    report("10b", ok, f"gamma=1.5 nu=0.7 T=1e7: L1 slope {r['slope']:.4f} on [{r['t_lo']:g}, {r['t_hi']:g}] "
                      f"(<= {-0.9 * 0.09:.4f}, stderr {r['stderr']:.3f}); "
                      f"wall-cell mass {diag.max_boundary_mass:.1e}")


@pytest.mark.slow
def test_criterion_11_weighted_estimates(run_gamma2):
    model, prof, snaps, _ = run_gamma2
    table = rate_table(model)
    series = distance_table(model, prof, snaps, ("lgamma_plus1_density", "energy_eta_e"))
    mon = weighted_estimate_monitor(table, series)
    ok = all(m["verdict"] == "BOUNDED" for m in mon.values()) and len(mon) == 2
    report(11, ok, "; ".join(f"{k} final-decade growth {m['final_decade_growth']:.2e} (< 1e-2)"
                             for k, m in mon.items()))
