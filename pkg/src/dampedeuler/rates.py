"""Distances between solver snapshots and the Barenblatt reference, log-log
slope fits, and one-sided comparison against the theoretical exponents.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .barenblatt import cell_averages
from .entropy import mechanical_energy, relative_entropy

__all__ = [
    "QUANTITIES", "THEORY_RATE", "RateSeries", "SlopeFit", "MassMismatch",
    "distance_series", "distance_table", "fit_slope", "default_window",
    "compare_to_theory", "weighted_estimate_monitor", "cumulative_integral",
]

QUANTITIES = (
    "l1_density", "lgamma_density", "lgamma_plus1_density", "eta_star_integral",
    "y_l2", "energy_eta_e", "dissipation",
)

# which rate-table entry bounds the decay of each quantity
THEORY_RATE = {
    "l1_density": "k",
    "lgamma_density": "mu",
    "eta_star_integral": "phi",
    "lgamma_plus1_density": "mu_star",
    "energy_eta_e": "omega",
}

MASS_RTOL = 1e-6
Y_END_RTOL = 1e-8


class MassMismatch(ValueError):
    pass


@dataclass
class RateSeries:
    quantity: str
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError(f"{self.quantity}: values must be finite and >= 0")


@dataclass
class SlopeFit:
    quantity: str
    window: tuple
    slope: float
    intercept: float
    stderr: float
    n_points: int


def _snapshot_terms(model, profile, state):
    grid = state.grid
    rho_bar, mom_bar = cell_averages(profile, grid.faces, state.time)
    return rho_bar, mom_bar


def distance_table(model, profile, snapshots, quantities=QUANTITIES):
    """All requested quantities for every snapshot, as ``{name: RateSeries}``.

    Integrals use the composite midpoint rule on the snapshot grid against
    exact cell averages of the reference.  A snapshot whose mass differs
    from the reference mass by more than 1e-6 (relative) is rejected.
    """
    if not snapshots:
        raise ValueError("no snapshots")
    grid = snapshots[0].grid
    for s in snapshots:
        if s.grid != grid:
            raise ValueError("snapshots must share one grid")
    unknown = set(quantities) - set(QUANTITIES)
    if unknown:
        raise ValueError(f"unknown quantities {sorted(unknown)}")
    dx = grid.dx
    g = model.gamma
    M = profile.mass
    out = {q: [] for q in quantities}
    for s in snapshots:
        mass = s.mass()
        if abs(mass - M) > MASS_RTOL * M:
            raise MassMismatch(f"snapshot mass {mass:.17g} differs from reference mass {M:.17g} at t={s.time:g}")
        rho_bar, mom_bar = _snapshot_terms(model, profile, s)
        diff = s.rho - rho_bar
        for q in quantities:
            if q == "l1_density":
                v = np.sum(np.abs(diff)) * dx
            elif q == "lgamma_density":
                v = np.sum(np.abs(diff) ** g) * dx
            elif q == "lgamma_plus1_density":
                v = np.sum(np.abs(diff) ** (g + 1.0)) * dx
            elif q == "eta_star_integral":
                v = np.sum(relative_entropy(model, s.rho, s.mom, rho_bar, mom_bar).eta_star) * dx
            elif q == "energy_eta_e":
                v = np.sum(mechanical_energy(model, s.rho, s.mom)) * dx
            elif q == "dissipation":
                kin = np.divide(s.mom ** 2, s.rho, out=np.zeros_like(s.rho), where=s.rho > 0)
                v = model.damping_coefficient(s.time) * np.sum(kin) * dx
            else:  # y_l2
                # y = -int_{-inf}^x (rho - rho_bar); midpoint values from prefix sums
                right = -np.cumsum(diff) * dx
                if abs(right[-1]) > Y_END_RTOL * M:
                    raise MassMismatch(f"y does not vanish at the right wall: {right[-1]:.3g}")
                mid = right + 0.5 * diff * dx
                v = np.sqrt(np.sum(mid ** 2) * dx)
            out[q].append(float(v))
    times = [s.time for s in snapshots]
    return {q: RateSeries(q, times, vals) for q, vals in out.items()}


def distance_series(model, profile, snapshots, quantity):
    return distance_table(model, profile, snapshots, (quantity,))[quantity]


def default_window(times):
    T = float(np.max(times))
    return (max(10.0, T / 100.0), T)


def fit_slope(series, window=None, min_points=5):
    """Least-squares slope of ``log(value)`` against ``log(1+t)`` on ``window``."""
    if window is None:
        window = default_window(series.times)
    t_lo, t_hi = float(window[0]), float(window[1])
    if t_lo < 1.0:
        raise ValueError("fit windows must start at t >= 1")
    sel = (series.times >= t_lo * (1 - 1e-12)) & (series.times <= t_hi * (1 + 1e-12))
    n = int(np.sum(sel))
    if n < min_points:
        raise ValueError(f"{series.quantity}: only {n} points in window [{t_lo:g}, {t_hi:g}]")
    v = series.values[sel]
    if np.any(v <= 0):
        raise ValueError(f"{series.quantity}: nonpositive value in fit window")
    x = np.log1p(series.times[sel])
    y = np.log(v)
    if np.ptp(y) == 0.0:
        # linregress divides by zero on a flat series; the answer is known
        return SlopeFit(series.quantity, (t_lo, t_hi), 0.0, float(y[0]), 0.0, n)
    res = linregress(x, y)
    return SlopeFit(series.quantity, (t_lo, t_hi), float(res.slope), float(res.intercept),
                    float(res.stderr), n)


def compare_to_theory(fits, table, margin=0.1):
    """One-sided verdicts: CONSISTENT when the measured decay is at least
    ``(1 - margin)`` times the proven rate.  Quantities with no proven rate
    get NO_THEORY."""
    rows = []
    for f in fits:
        key = THEORY_RATE.get(f.quantity)
        if key is None:
            rate, verdict = float("nan"), "NO_THEORY"
        else:
            rate = float(getattr(table, key))
            verdict = "CONSISTENT" if f.slope <= -(1.0 - margin) * rate else "INCONSISTENT"
        rows.append({
            "quantity": f.quantity, "t_lo": f.window[0], "t_hi": f.window[1],
            "slope": f.slope, "stderr": f.stderr, "theory_rate": rate, "verdict": verdict,
        })
    return rows


def _running_sup_growth(times, weighted):
    sup = np.maximum.accumulate(weighted)
    T = times[-1]
    earlier = times <= T / 10.0
    if not earlier.any():
        return sup, float("nan")
    ref = sup[earlier][-1]
    return sup, float(sup[-1] / ref - 1.0)


def weighted_estimate_monitor(table, series, growth_tol=0.01):
    """Running sups of ``(1+t)^mu_star * int|rho - rho_bar|^(gamma+1)`` and
    ``(1+t)^omega * int eta_e``; BOUNDED if the sup grew by less than
    ``growth_tol`` (relative) over the final decade of time."""
    report = {}
    for name, key in (("lgamma_plus1_density", "mu_star"), ("energy_eta_e", "omega")):
        s = series.get(name)
        if s is None:
            continue
        rate = float(getattr(table, key))
        w = (1.0 + s.times) ** rate * s.values
        sup, growth = _running_sup_growth(s.times, w)
        if np.isnan(growth):
            verdict = "INSUFFICIENT_DATA"
        else:
            verdict = "BOUNDED" if growth < growth_tol else "UNBOUNDED"
        report[name] = {"rate": rate, "sup": float(sup[-1]), "final_decade_growth": growth,
                        "verdict": verdict}
    return report


def cumulative_integral(series, weight_power=0.0):
    """Trapezoid ``int_{t_0}^t (1+s)^weight_power value(s) ds`` at each sample."""
    f = (1.0 + series.times) ** weight_power * series.values
    inc = 0.5 * (f[1:] + f[:-1]) * np.diff(series.times)
    return np.concatenate([[0.0], np.cumsum(inc)])
