"""Gauss-Jacobi rules for integrands with algebraic endpoint singularities.

Every integral in this package has the shape

    int_lo^hi  f(x) (x - lo)^a (hi - x)^b  dx

with ``f`` smooth inside the interval but possibly singular just outside it
(another kink of the integrand sitting close to an endpoint).  Plain
Gauss-Jacobi handles the endpoint powers; a geometric grading toward each
endpoint keeps the rule accurate when an outside singularity is near.
"""
from functools import lru_cache

import numpy as np
from scipy.special import betaln, roots_jacobi, roots_legendre

__all__ = ["jacobi_rule", "graded_integral", "weighted_integral", "power_moment", "even_moment"]

MAX_LEVELS = 48
# above this weight exponent the Jacobi nodes crowd into a vanishing
# neighbourhood of the peak and fixed-order rules lose accuracy
MAX_RULE_EXPONENT = 20.0


@lru_cache(maxsize=256)
def _reference_rule(n, alpha, beta):
    if alpha == 0.0 and beta == 0.0:
        t, w = roots_legendre(n)
    else:
        t, w = roots_jacobi(n, alpha, beta)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def jacobi_rule(n, alpha, beta, lo=-1.0, hi=1.0):
    """Nodes and weights for ``int_lo^hi f(x) (hi-x)^alpha (x-lo)^beta dx``."""
    if alpha <= -1.0 or beta <= -1.0:
        raise ValueError("Jacobi exponents must exceed -1")
    t, w = _reference_rule(int(n), float(alpha), float(beta))
    half = 0.5 * (hi - lo)
    return lo + half * (1.0 + t), w * half ** (alpha + beta + 1.0)


def _levels(length, gap):
    with np.errstate(divide="ignore"):
        ratio = np.where(gap > 0, length / (2.0 * np.where(gap > 0, gap, 1.0)), np.inf)
    k = np.ceil(np.log2(np.maximum(ratio, 1.0)))
    k = np.where(np.isfinite(k), k, MAX_LEVELS)
    return int(min(np.max(k, initial=0.0), MAX_LEVELS))


@lru_cache(maxsize=256)
def _graded_template(n, lo_exp, hi_exp, k_lo, k_hi):
    """Relative nodes/weights on [0, 1] with grading toward both ends.

    Returns (r, w, kind) where kind is 1 for nodes of the piece touching 0,
    2 for the piece touching 1 and 0 elsewhere.  Weights of touching pieces
    already contain the endpoint power (relative units).
    """
    lower = np.concatenate([[0.0], 0.5 * 2.0 ** -np.arange(k_lo, -1, -1)])
    upper = 1.0 - 0.5 * 2.0 ** -np.arange(0, k_hi + 1)
    breaks = np.concatenate([lower, upper[1:], [1.0]])
    rs, ws, kinds = [], [], []
    last = len(breaks) - 2
    for j in range(len(breaks) - 1):
        a, b = breaks[j], breaks[j + 1]
        if j == 0:
            r, w = jacobi_rule(n, 0.0, lo_exp, a, b)
            kinds.append(np.full(n, 1))
        elif j == last:
            r, w = jacobi_rule(n, hi_exp, 0.0, a, b)
            kinds.append(np.full(n, 2))
        else:
            r, w = jacobi_rule(n, 0.0, 0.0, a, b)
            kinds.append(np.zeros(n, dtype=int))
        rs.append(r)
        ws.append(w)
    out = np.concatenate(rs), np.concatenate(ws), np.concatenate(kinds)
    for arr in out:
        arr.setflags(write=False)
    return out


def graded_integral(func, lo, hi, lo_exp=0.0, hi_exp=0.0, lo_gap=np.inf, hi_gap=np.inf, order=32):
    """Batched ``int_lo^hi func(x) (x-lo)^lo_exp (hi-x)^hi_exp dx``.

    ``lo`` and ``hi`` may be arrays (one integral per entry).  ``func`` gets
    nodes of shape ``(batch, nodes)`` and must return the smooth factor at
    those nodes; if it closes over per-entry data, every interval must have
    positive length (zero-length rows are dropped before the call).  ``lo_gap``/``hi_gap`` give the distance from each endpoint
    to the nearest singularity of ``func`` outside the interval; pieces are
    graded geometrically so that no piece is longer than that distance.
    Zero-length intervals contribute 0.
    """
    lo, hi, lo_gap, hi_gap = np.broadcast_arrays(
        np.atleast_1d(np.asarray(lo, dtype=float)), np.atleast_1d(np.asarray(hi, dtype=float)),
        np.asarray(lo_gap, dtype=float), np.asarray(hi_gap, dtype=float))
    length = hi - lo
    if np.any(length < 0):
        raise ValueError("interval with hi < lo")
    live = length > 0
    out = np.zeros(lo.shape)
    if not np.any(live):
        return out
    L = length[live]
    k_lo = _levels(L, lo_gap[live])
    k_hi = _levels(L, hi_gap[live])
    r, w, kind = _graded_template(int(order), float(lo_exp), float(hi_exp), k_lo, k_hi)

    x = lo[live][:, None] + L[:, None] * r[None, :]
    vals = np.asarray(func(x), dtype=float)
    vals = np.broadcast_to(vals, x.shape)
    dist_lo = L[:, None] * r[None, :]
    dist_hi = L[:, None] * (1.0 - r[None, :])
    # endpoint powers: carried by the weight on the touching piece, explicit elsewhere
    f_lo = np.where(kind == 1, 1.0, dist_lo ** lo_exp) if lo_exp != 0.0 else 1.0
    f_hi = np.where(kind == 2, 1.0, dist_hi ** hi_exp) if hi_exp != 0.0 else 1.0
    scale = np.where(kind == 1, L[:, None] ** (1.0 + lo_exp),
                     np.where(kind == 2, L[:, None] ** (1.0 + hi_exp), L[:, None]))
    out[live] = np.sum(vals * f_lo * f_hi * scale * w[None, :], axis=1)
    return out


def weighted_integral(func, lam, order=64, adaptive=True, rtol=1e-10, max_order=512):
    """``int_{-1}^{1} func(z) (1-z^2)^lam dz`` for smooth scalar-valued ``func``.

    With ``adaptive`` the order is doubled until two successive values agree
    to ``rtol`` (relative, absolute floor 1e-300) or ``max_order`` is hit.
    """
    def once(n):
        return graded_integral(lambda z: func(z), -1.0, 1.0, lam, lam, order=n)[0]

    n = int(order)
    val = once(n)
    if not adaptive:
        return val
    while n < max_order:
        n2 = 2 * n
        new = once(n2)
        if abs(new - val) <= rtol * max(abs(new), 1e-300):
            return new
        n, val = n2, new
    return val


def power_moment(shift, power, lam, signed=False, order=32):
    """``int_{-1}^{1} |shift+z|^power (1-z^2)^lam dz`` for an array of shifts.

    With ``signed`` the integrand carries an extra ``sign(shift+z)``.
    ``power`` and ``lam`` must exceed -1.
    """
    b = np.atleast_1d(np.asarray(shift, dtype=float))
    out = np.zeros(b.shape)
    q = float(power)
    lam = float(lam)

    inner = np.abs(b) < 1.0
    if np.any(inner):
        bi = b[inner]
        # [-1, -b]: sign negative, factor (1-z)^lam smooth, z=1 sits 1+b beyond -b
        left = graded_integral(lambda z: (1.0 - z) ** lam, -1.0, -bi, lam, q,
                               hi_gap=1.0 + bi, order=order)
        right = graded_integral(lambda z: (1.0 + z) ** lam, -bi, 1.0, q, lam,
                                lo_gap=1.0 - bi, order=order)
        out[inner] = right - left if signed else right + left

    edge = np.abs(b) == 1.0
    if np.any(edge):
        be = b[edge]
        # the kink coincides with an endpoint, exponents merge
        pos = be > 0
        val = graded_integral(np.ones_like, -1.0, 1.0, lam + q, lam, order=order)[0]
        out[edge] = np.where(pos, val, -val if signed else val)

    outer = np.abs(b) > 1.0
    if np.any(outer):
        bo = b[outer]
        gap = np.abs(bo) - 1.0
        lo_gap = np.where(bo > 1.0, gap, np.inf)
        hi_gap = np.where(bo < -1.0, gap, np.inf)

        def f(z):
            return np.abs(bo[:, None] + z) ** q

        val = graded_integral(f, -1.0, 1.0, lam, lam, lo_gap=lo_gap, hi_gap=hi_gap, order=order)
        out[outer] = np.sign(bo) * val if signed else val
    return out


def even_moment(power, lam, order=64):
    """``int_-1^1 |z|^power (1-z^2)^lam dz``.

    Computed by Gauss-Jacobi quadrature; for ``lam`` beyond
    ``MAX_RULE_EXPONENT`` (gamma very close to 1) the Beta-function value
    ``B((power+1)/2, lam+1)`` is returned instead.
    """
    if lam > MAX_RULE_EXPONENT:
        return float(np.exp(betaln(0.5 * (power + 1.0), lam + 1.0)))
    return float(power_moment(0.0, power, lam, order=order)[0])
