"""Sampled certification of the algebraic inequalities behind the decay proof.

Each check sweeps pairs ``(rho, rho_bar)`` in ``[0, C]^2`` and records the
infimum of the ratio LHS/RHS together with the pair attaining it.  All the
ratios are homogeneous of degree zero, so they are evaluated through the
relative shift ``d = (rho - rho_bar)/rho_bar``; this keeps the near-diagonal
samples (``|d|`` down to 1e-12) free of cancellation.

Samples are deterministic given ``seed``.
"""
from dataclasses import dataclass, field, asdict
from enum import Enum
from math import factorial

import numpy as np

from .entropy import bregman_shift
from .params import DomainError
from .quadrature import graded_integral

__all__ = [
    "LemmaReport", "RegionTag", "sample_pairs", "classify_region",
    "lemma31_ratio", "lemma32_ratios", "lemma33_ratios",
    "check_lemma31", "check_lemma32", "check_lemma33", "check_taylor_remainder",
    "taylor_sides", "c2_constant",
]

DEFAULT_TOL = 1e-12


@dataclass
class LemmaReport:
    lemma_id: str
    sampled_infimum: float
    witness: tuple
    target_constant: object
    passed: bool
    sample_count: int
    seed: int = 0
    tolerance: float = DEFAULT_TOL
    extra: dict = field(default_factory=dict)

    @property
    def pass_(self):
        return self.passed

    def to_dict(self):
        out = asdict(self)
        out["witness"] = list(self.witness)
        return out


def _verdict(inf, target, tol):
    ok = bool(np.isfinite(inf) and inf > 0.0)
    if target is not None:
        ok = ok and inf >= target - tol
    return ok


class RegionTag(Enum):
    Omega1 = "Omega1"
    Omega2 = "Omega2"


def classify_region(rho, rho_bar):
    """Omega2 iff both densities are positive and ``|rho - rho_bar| < rho_bar/2``.

    Scalars give a :class:`RegionTag`; arrays give a boolean mask (True for Omega2).
    """
    r = np.asarray(rho, dtype=float)
    rb = np.asarray(rho_bar, dtype=float)
    mask = (r != 0.0) & (rb != 0.0) & (np.abs(r - rb) < 0.5 * rb)
    if mask.ndim == 0:
        return RegionTag.Omega2 if bool(mask) else RegionTag.Omega1
    return mask


def sample_pairs(cap, samples, seed=0):
    """Deterministic sample of ``[0, cap]^2`` with the diagonal removed.

    Mix: a uniform grid that contains both axes, log-spaced points hugging
    each axis, near-diagonal pairs ``rho = rho_bar (1 +- 10^-j)`` for
    ``j = 1..12``, and uniform random points for the remainder.  Exactly
    ``samples`` pairs are returned.
    """
    if cap <= 0:
        raise DomainError("cap must be positive")
    samples = int(samples)
    if samples < 100:
        raise DomainError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    side = max(int(np.sqrt(samples / 4.0)), 2)
    g = np.linspace(0.0, cap, side)
    gr, gb = np.meshgrid(g, g, indexing="ij")
    parts_r, parts_b = [gr.ravel()], [gb.ravel()]

    n_axis = samples // 8
    small = cap * 10.0 ** rng.uniform(-12.0, 0.0, n_axis)
    other = rng.uniform(0.0, cap, n_axis)
    half = n_axis // 2
    parts_r += [small[:half], other[half:]]
    parts_b += [other[:half], small[half:]]

    j = np.arange(1, 13)
    n_diag = max(samples // 8 // 24, 1)
    base = rng.uniform(0.0, cap, n_diag)
    base = np.where(base == 0.0, 0.5 * cap, base)
    for sgn in (1.0, -1.0):
        rb = np.repeat(base, len(j))
        rr = rb * (1.0 + sgn * np.tile(10.0 ** -j.astype(float), n_diag))
        keep = rr <= cap
        parts_r.append(rr[keep])
        parts_b.append(rb[keep])

    r = np.concatenate(parts_r)
    b = np.concatenate(parts_b)
    off = r != b
    r, b = r[off], b[off]
    # top up with off-diagonal random points so exactly `samples` pairs remain
    while len(r) < samples:
        rest = samples - len(r)
        rr, bb = rng.uniform(0.0, cap, rest), rng.uniform(0.0, cap, rest)
        off = rr != bb
        r, b = np.concatenate([r, rr[off]]), np.concatenate([b, bb[off]])
    return r[:samples], b[:samples]


def _shift(rho, rho_bar):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rho_bar > 0.0, (rho - rho_bar) / np.where(rho_bar > 0.0, rho_bar, 1.0), np.inf)


def lemma31_ratio(model, rho, rho_bar):
    """``[rho^(g+1) - ...] / [rho^g - ...]^((g+1)/g)``; equal to 1 on ``rho_bar = 0``."""
    g = model.gamma
    rho, rho_bar = np.broadcast_arrays(np.asarray(rho, float), np.asarray(rho_bar, float))
    d = _shift(rho, rho_bar)
    fin = np.isfinite(d)
    dd = np.where(fin, d, 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = bregman_shift(dd, g + 1.0) / bregman_shift(dd, g) ** ((g + 1.0) / g)
    return np.where(fin, r, 1.0)


def lemma32_ratios(model, rho, rho_bar):
    """The three ratios of the two-sided power-difference bounds.

    Returns ``(r_pow, r_breg, r_diff)``:
    ``(rho^g - rb^g)(rho - rb) / |rho - rb|^(g+1)``,
    ``[rho^(g+1) - rb^(g+1) - (g+1) rb^g (rho - rb)] / D`` and
    ``(rho^g - rb^g)(rho - rb) / D`` with ``D = (rho^(g-1) + rb^(g-1))(rho - rb)^2``.
    All three equal 1 on ``rho_bar = 0``.
    """
    g = model.gamma
    rho, rho_bar = np.broadcast_arrays(np.asarray(rho, float), np.asarray(rho_bar, float))
    d = _shift(rho, rho_bar)
    fin = np.isfinite(d)
    dd = np.where(fin, d, 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.expm1(g * np.log1p(dd))          # (1+d)^g - 1
        den = ((1.0 + dd) ** (g - 1.0) + 1.0) * dd * dd
        r_pow = diff * np.sign(dd) / np.abs(dd) ** g
        r_breg = bregman_shift(dd, g + 1.0) / den
        r_diff = diff * dd / den
    one = np.ones_like(dd)
    return tuple(np.where(fin, r, one) for r in (r_pow, r_breg, r_diff))


def c2_constant(gamma):
    return gamma * (gamma - 1.0) / 2.0 * 0.4 ** (2.0 - gamma)


def lemma33_ratios(model, rho, rho_bar):
    """Ratios of the pressure Bregman term to its two lower bounds.

    Returns ``(r1, r2, r2_literal)``:
    ``P*/|rho - rb|^g`` (the Omega1 bound), ``P*/(rb^(g-2) (rho - rb)^2)``
    (the quadratic Omega2 bound) and
    ``P*/(rb^(g-2) |rho - rb|^g)`` (the Omega2 bound with exponent ``g``).
    """
    g = model.gamma
    rho, rho_bar = np.broadcast_arrays(np.asarray(rho, float), np.asarray(rho_bar, float))
    d = _shift(rho, rho_bar)
    fin = np.isfinite(d)
    dd = np.where(fin, d, 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = bregman_shift(dd, g)
        r1 = b / np.abs(dd) ** g
        r2 = b / (dd * dd)
        r2_lit = r2 * np.abs(dd) ** (2.0 - g) * np.where(fin, rho_bar, 1.0) ** (2.0 - g)
    # rho_bar = 0: P* = rho^g = |rho - rb|^g; the Omega2 forms never apply there
    return np.where(fin, r1, 1.0), np.where(fin, r2, np.nan), np.where(fin, r2_lit, np.nan)


def _inf_report(lemma_id, ratio, rho, rho_bar, target, samples, seed, tol, extra=None):
    i = int(np.nanargmin(ratio))
    inf = float(ratio[i])
    return LemmaReport(
        lemma_id=lemma_id, sampled_infimum=inf, witness=(float(rho[i]), float(rho_bar[i])),
        target_constant=target, passed=_verdict(inf, target, tol), sample_count=int(samples),
        seed=int(seed), tolerance=tol, extra=extra or {},
    )


def check_lemma31(model, cap=2.0, samples=10 ** 6, seed=0, tol=DEFAULT_TOL):
    rho, rho_bar = sample_pairs(cap, samples, seed)
    r = lemma31_ratio(model, rho, rho_bar)
    g = model.gamma
    extra = {
        "rho_bar_zero_value": 1.0,
        "rho_zero_value": g / (g - 1.0) ** ((g + 1.0) / g),
    }
    return _inf_report("lemma31", r, rho, rho_bar, None, len(rho), seed, tol, extra)


def check_lemma32(model, cap=2.0, samples=10 ** 6, seed=0, tol=DEFAULT_TOL):
    """Three reports: the power bound (target 1), d1 (lower) and d2 (upper).

    For d2 the swept ratio is inverted, so ``sampled_infimum = 1/d2`` and the
    sampled supremum ``d2`` itself sits in ``extra["sampled_supremum"]``.
    """
    rho, rho_bar = sample_pairs(cap, samples, seed)
    r_pow, r_breg, r_diff = lemma32_ratios(model, rho, rho_bar)
    n = len(rho)
    pow_rep = _inf_report("lemma32_power", r_pow, rho, rho_bar, 1.0, n, seed, tol)
    lower = np.minimum(r_breg, r_diff)
    d1 = _inf_report("lemma32_d1", lower, rho, rho_bar, None, n, seed, tol)
    upper = np.maximum(r_breg, r_diff)
    d2 = _inf_report("lemma32_d2", 1.0 / upper, rho, rho_bar, None, n, seed, tol,
                     {"sampled_supremum": float(np.max(upper))})
    return pow_rep, d1, d2


def check_lemma33(model, cap=2.0, samples=10 ** 6, seed=0, tol=DEFAULT_TOL):
    """Reports for the two regions of the pressure lower bound (``1 < gamma < 2``).

    The Omega2 verdict uses the quadratic form ``rb^(g-2) (rho - rb)^2`` with
    target ``g(g-1)/2 (2/5)^(2-g)``.  The same bound with ``|rho - rb|^g`` in
    place of the square degenerates at the diagonal (the ratio tends to 0),
    so its sampled infimum is only recorded in ``extra``.
    """
    g = model.gamma
    if not 1.0 < g < 2.0:
        raise DomainError("the region bounds are stated for 1 < gamma < 2")
    rho, rho_bar = sample_pairs(cap, samples, seed)
    r1, r2, r2_lit = lemma33_ratios(model, rho, rho_bar)
    om2 = classify_region(rho, rho_bar)
    n1, n2 = int(np.sum(~om2)), int(np.sum(om2))
    rep1 = _inf_report("lemma33_omega1", r1[~om2], rho[~om2], rho_bar[~om2], None, n1, seed, tol,
                       {"rho_zero_value": g - 1.0})
    lit = r2_lit[om2]
    j = int(np.argmin(lit))
    rep2 = _inf_report("lemma33_omega2", r2[om2], rho[om2], rho_bar[om2], c2_constant(g), n2, seed, tol,
                       {"literal_exponent_infimum": float(lit[j]),
                        "literal_exponent_witness": [float(rho[om2][j]), float(rho_bar[om2][j])]})
    return rep1, rep2


def _falling(k, j):
    out = 1.0
    for i in range(j):
        out *= k - i
    return out


def _deriv(k, j, x):
    """j-th derivative of |x|^k (for j <= k, or anywhere x != 0)."""
    x = np.asarray(x, dtype=float)
    c = _falling(k, j)
    if c == 0.0:
        return np.zeros_like(x)
    s = np.sign(x) ** j if j % 2 else np.ones_like(x)
    return c * s * np.abs(x) ** (k - j)


def taylor_sides(k, n, u, z, order=48, return_scale=False):
    """Both sides of the integral-remainder Taylor formula for ``|xi|^k``.

    LHS: ``f(u+z) - sum_{j<=n} f^(j)(z) u^j / j!``;
    RHS: ``u^(n+1) int_0^1 (1-s)^n/n! f^(n+1)(su+z) ds``.
    The kink of ``f^(n+1)`` at ``s0 = -z/u`` is treated with Jacobi weights.
    With ``return_scale`` the sum of the magnitudes of the LHS summands (the
    size of its rounding error) is returned as well.
    """
    u, z = np.broadcast_arrays(np.atleast_1d(np.asarray(u, float)), np.atleast_1d(np.asarray(z, float)))
    u, z = u.ravel(), z.ravel()
    lhs = np.abs(u + z) ** k
    scale = np.abs(lhs)
    for j in range(n + 1):
        term = _deriv(k, j, z) * u ** j / factorial(j)
        lhs = lhs - term
        scale = scale + np.abs(term)

    beta = k - n - 1.0
    c = _falling(k, n + 1) / factorial(n)
    rhs = np.zeros_like(u)
    live = (u != 0.0) & (c != 0.0)
    if np.any(live):
        ul, zl = u[live], z[live]
        s0 = -zl / ul
        cross = (s0 > 0.0) & (s0 < 1.0)
        val = np.zeros_like(ul)
        # no crossing: sign of (su+z) is constant on [0, 1]
        nc = ~cross
        if np.any(nc):
            un, zn, s0n = ul[nc], zl[nc], s0[nc]
            sgn_path = np.sign(zn + 0.5 * un) ** (n + 1)
            f = lambda s: (1.0 - s) ** n * np.abs(s * un[:, None] + zn[:, None]) ** beta
            lo_gap = np.where(s0n <= 0.0, -s0n, np.inf)
            hi_gap = np.where(s0n >= 1.0, s0n - 1.0, np.inf)
            val[nc] = sgn_path * graded_integral(f, 0.0, 1.0, lo_gap=lo_gap, hi_gap=hi_gap, order=order)
        if np.any(cross):
            uc, s0c = ul[cross], s0[cross]
            a = np.abs(uc) ** beta
            # |su+z| = |u| |s - s0|; sign(su+z) = sign(u) sign(s - s0)
            left = graded_integral(lambda s: (1.0 - s) ** n, 0.0, s0c, 0.0, beta, order=order)
            right = graded_integral(lambda s: (1.0 - s) ** n, s0c, 1.0, beta, 0.0, order=order)
            su = np.sign(uc) ** (n + 1)
            val[cross] = a * su * (right + (-1.0) ** (n + 1) * left)
        rhs[live] = c * ul ** (n + 1) * val
    if return_scale:
        return lhs, rhs, scale
    return lhs, rhs


def check_taylor_remainder(k, n, samples=10 ** 4, seed=0, tol=1e-9, box=2.0):
    """Sweep ``(u, z)`` in ``[-box, box]^2`` comparing both sides of the formula.

    The swept score is ``1 - |L - R| / S`` with ``S`` the magnitude of the
    LHS summands plus ``|R|``; the LHS is a difference of terms much larger
    than itself when ``|u|`` is small, so ``S`` is the honest error scale.
    The report passes iff the infimum score is within ``tol`` of 1.
    Samples where the path ``su + z`` crosses 0 are kept when the remainder
    integrand is integrable there (``k - n - 1 > -1``) and resampled otherwise.
    """
    if k < 0 or n < 0 or n > k:
        raise DomainError("need 0 <= n <= k")
    n = int(n)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-box, box, samples)
    z = rng.uniform(-box, box, samples)
    if k - n - 1.0 <= -1.0:
        # f^(n+1) has a non-integrable (or delta) singularity at 0: keep same-sign paths
        bad = np.sign(z) != np.sign(u + z)
        z[bad] = np.where(u[bad] >= 0.0, 1.0, -1.0) * (np.abs(z[bad]) + np.abs(u[bad]))
    lhs, rhs, scale = taylor_sides(k, n, u, z, return_scale=True)
    scale = scale + np.abs(rhs)
    err = np.where(scale > 0.0, np.abs(lhs - rhs) / np.where(scale > 0.0, scale, 1.0), 0.0)
    score = 1.0 - err
    i = int(np.argmin(score))
    inf = float(score[i])
    return LemmaReport(
        lemma_id="taylor_remainder", sampled_infimum=inf, witness=(float(u[i]), float(z[i])),
        target_constant=1.0, passed=_verdict(inf, 1.0, tol), sample_count=int(samples),
        seed=int(seed), tolerance=tol,
        extra={"k": float(k), "n": n, "max_scaled_error": float(err[i])},
    )
