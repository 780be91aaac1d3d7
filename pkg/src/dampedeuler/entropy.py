"""Weak entropy pairs, mechanical energy, relative entropy and the auxiliary
functions ``h``, ``h1``, ``B`` attached to the power entropy.

Conventions
-----------
* ``u = m / rho`` and, at vacuum, ``m^2 / rho := 0`` (``m`` must vanish there).
* The measure ``(1-z^2)^lam dz`` is used *raw* for the power weight and
  *normalized* (divided by its total mass) for the quadratic weight; only the
  normalized version turns the quadratic pair into mechanical energy.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_legendre

from .params import DomainError
from .quadrature import graded_integral, jacobi_rule, power_moment

__all__ = [
    "EntropyWeight", "RelativeEntropyValue", "chi", "entropy_pair",
    "mechanical_energy", "energy_flux", "relative_entropy", "bregman_power", "bregman_shift",
    "h_function", "h1_function", "B_function", "power_entropy",
]


@dataclass(frozen=True)
class EntropyWeight:
    kind: str
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("quadratic", "power", "custom"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom weight needs a function")

    @classmethod
    def quadratic(cls):
        return cls("quadratic")

    @classmethod
    def power(cls):
        return cls("power")

    @classmethod
    def custom(cls, func):
        return cls("custom", func)

    @property
    def normalized_default(self):
        return self.kind == "quadratic"


@dataclass(frozen=True)
class RelativeEntropyValue:
    eta_star: np.ndarray
    p_star: np.ndarray
    q_star_flux: np.ndarray
    q_quad: np.ndarray


def chi(model, xi, rho, u):
    """Entropy kernel ``(rho^(gamma-1) - (xi-u)^2)_+^lam`` (zero off its support)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("rho must be nonnegative")
    base = rho ** (model.gamma - 1.0) - (np.asarray(xi, dtype=float) - u) ** 2
    pos = base > 0.0
    return np.where(pos, np.where(pos, base, 1.0) ** model.lam, 0.0)


def _states(rho, m):
    rho, m = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(m, dtype=float))
    if np.any(rho < 0):
        raise DomainError("rho must be nonnegative")
    vac = rho == 0.0
    if np.any(vac & (m != 0.0)):
        raise DomainError("vacuum state with nonzero momentum")
    u = np.divide(m, rho, out=np.zeros_like(m), where=~vac)
    return rho, m, u, vac


def _smooth_moments(model, g, rho, u, rtol=1e-10, order=64, max_order=512):
    """Raw ``rho int g(u + z rho^theta) (1-z^2)^lam dz`` and the matching flux."""
    c = rho ** model.theta

    def once(n):
        z, w = jacobi_rule(n, model.lam, model.lam)
        xi = u[..., None] + c[..., None] * z
        gv = np.asarray(g(xi), dtype=float)
        eta = rho * np.sum(gv * w, axis=-1)
        q = rho * np.sum(gv * (u[..., None] + model.theta * c[..., None] * z) * w, axis=-1)
        return eta, q

    n = order
    eta, q = once(n)
    while n < max_order:
        n *= 2
        eta2, q2 = once(n)
        scale = np.maximum(np.abs(eta2), 1e-300)
        done = np.all(np.abs(eta2 - eta) <= rtol * scale) and np.all(
            np.abs(q2 - q) <= rtol * np.maximum(np.abs(q2), scale))
        eta, q = eta2, q2
        if done:
            break
    return eta, q


def power_entropy(model, rho, m):
    """Raw-measure power entropy pair, ``g = |xi|^(2 gamma/(gamma-1))``."""
    rho, m, u, vac = _states(rho, m)
    g = model.gamma
    q_exp = 2.0 * g / (g - 1.0)
    a = np.divide(u, rho ** model.theta, out=np.zeros_like(u), where=~vac)
    flat = a.ravel()
    j0 = power_moment(flat, q_exp, model.lam, order=model.quad_order).reshape(a.shape)
    j1 = power_moment(flat, q_exp + 1.0, model.lam, signed=True, order=model.quad_order).reshape(a.shape)
    eta = rho ** (g + 1.0) * j0
    flux = rho ** (g + 1.0 + model.theta) * (model.theta * j1 + (1.0 - model.theta) * a * j0)
    return eta, flux


def entropy_pair(model, weight, rho, m, normalized=None):
    """Entropy/flux pair generated by ``weight`` at the states ``(rho, m)``.

    ``normalized`` defaults to True for the quadratic weight and False
    otherwise.
    """
    if normalized is None:
        normalized = weight.normalized_default
    rho, m, u, vac = _states(rho, m)
    if weight.kind == "power":
        eta, q = power_entropy(model, rho, m)
    else:
        g = (lambda xi: 0.5 * xi * xi) if weight.kind == "quadratic" else weight.func
        eta, q = _smooth_moments(model, g, rho, u)
    if normalized:
        eta = eta / model.weight_mass
        q = q / model.weight_mass
    return eta, q


def mechanical_energy(model, rho, m):
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    pos = rho > 0.0
    kin = np.divide(m * m, rho, out=np.zeros(np.broadcast(rho, m).shape), where=pos)
    return 0.5 * kin + model.kappa / (model.gamma - 1.0) * rho ** model.gamma


def energy_flux(model, rho, m):
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    pos = rho > 0.0
    u = np.divide(m, rho, out=np.zeros(np.broadcast(rho, m).shape), where=pos)
    g = model.gamma
    return 0.5 * m * u * u + model.kappa * g / (g - 1.0) * rho ** (g - 1.0) * m


def bregman_shift(d, k):
    """``(1+d)^k - 1 - k d`` for ``d >= -1``, accurate for small ``|d|``."""
    d = np.asarray(d, dtype=float)
    near = np.abs(d) < 0.1
    with np.errstate(divide="ignore"):
        direct = np.expm1(k * np.log1p(d)) - k * d
    # binomial series sum_{j>=2} C(k, j) d^j; |d| < 0.1 so 17 terms reach rounding
    dn = np.where(near, d, 0.0)
    term = np.ones_like(dn)
    coef = 1.0
    series = np.zeros_like(dn)
    for j in range(1, 18):
        coef *= (k - j + 1.0) / j
        term = term * dn
        if j >= 2:
            series = series + coef * term
    return np.where(near, series, direct)


def bregman_power(x, k):
    """``x^k - 1 - k (x - 1)`` for ``x >= 0``."""
    return bregman_shift(np.asarray(x, dtype=float) - 1.0, k)


def relative_entropy(model, rho, m, rho_bar, m_bar):
    """Relative mechanical energy of ``(rho, m)`` with respect to ``(rho_bar, m_bar)``.

    ``Q*`` is evaluated in the equivalent form ``(m - rho u_bar)^2 / rho`` and
    ``P*`` through :func:`bregman_shift`, so both are nonnegative to rounding.
    """
    rho, m, u, vac = _states(rho, m)
    rho_bar, m_bar, u_bar, vac_bar = _states(rho_bar, m_bar)
    rho, m, rho_bar, m_bar = np.broadcast_arrays(rho, m, rho_bar, m_bar)
    u, u_bar = np.broadcast_arrays(u, u_bar)
    vac = rho == 0.0
    vac_bar = rho_bar == 0.0
    g = model.gamma

    d = np.divide(rho - rho_bar, rho_bar, out=np.zeros_like(rho), where=~vac_bar)
    p_star = np.where(vac_bar, rho ** g, rho_bar ** g * bregman_shift(d, g))
    p_star = np.maximum(p_star, 0.0)

    dm = m - rho * u_bar
    q_quad = np.divide(dm * dm, rho, out=np.zeros_like(rho), where=~vac)
    eta_star = 0.5 * q_quad + model.kappa / (g - 1.0) * p_star

    # relative flux q(v) - q(v_bar) - grad eta(v_bar) . (f(v) - f(v_bar)); diagnostic only
    eta_rho_bar = -0.5 * u_bar ** 2 + model.kappa * g / (g - 1.0) * rho_bar ** (g - 1.0)
    kin = np.divide(m * m, rho, out=np.zeros_like(rho), where=~vac)
    kin_bar = np.divide(m_bar * m_bar, rho_bar, out=np.zeros_like(rho), where=~vac_bar)
    flux_m = kin + model.kappa * rho ** g
    flux_m_bar = kin_bar + model.kappa * rho_bar ** g
    q_flux = (energy_flux(model, rho, m) - energy_flux(model, rho_bar, m_bar)
              - eta_rho_bar * (m - m_bar) - u_bar * (flux_m - flux_m_bar))
    return RelativeEntropyValue(eta_star=eta_star, p_star=p_star, q_star_flux=q_flux, q_quad=q_quad)


def h_function(model, a):
    """``h(a) = int |a + z|^(2/(gamma-1)) (1-z^2)^lam dz``; even, minimal at 0."""
    a = np.asarray(a, dtype=float)
    out = power_moment(a.ravel(), 2.0 / (model.gamma - 1.0), model.lam, order=model.quad_order)
    return out.reshape(a.shape)


def h1_function(model, rho, a):
    """``h1 = rho a int sign(a+z) |a+z|^((3-gamma)/(gamma-1)) (1-z^2)^lam dz`` (>= 0)."""
    rho, a = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(a, dtype=float))
    p = 2.0 / (model.gamma - 1.0) - 1.0
    mom = power_moment(a.ravel(), p, model.lam, signed=True, order=model.quad_order).reshape(a.shape)
    return rho * a * mom


# below this |a| the s-integral of h(sa) - h(0) is used (h is analytic there)
_SMALL_A = 0.5


def _b_small(model, a, order=24):
    s, w = roots_legendre(order)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    h0 = h_function(model, 0.0)
    hs = h_function(model, a[:, None] * s[None, :])
    return np.sum((1.0 - s) * w * (hs - h0), axis=1)


def _b_large(model, a, order):
    """``int (1-z^2)^lam int_0^1 (1-s)|sa+z|^p ds dz`` with the s-integral in closed form."""
    p = 2.0 / (model.gamma - 1.0)
    lam = model.lam

    def inner(z, aa):
        c = aa + z

        def G(v):
            av = np.abs(v)
            return c * np.sign(v) * av ** (p + 1.0) / (p + 1.0) - av ** (p + 2.0) / (p + 2.0)

        return (G(z + aa) - G(z)) / aa ** 2

    z1 = np.clip(np.minimum(0.0, -a), -1.0, 1.0)
    z2 = np.clip(np.maximum(0.0, -a), -1.0, 1.0)
    total = np.zeros_like(a)

    def piece(mask, lo, hi, touch_lo, touch_hi):
        if not np.any(mask):
            return
        al = a[mask][:, None]
        lo = lo[mask] if np.ndim(lo) else lo
        hi = hi[mask] if np.ndim(hi) else hi
        # the weight factor at a touched end goes into the Jacobi rule
        f_lo = (lambda z: 1.0) if touch_lo else (lambda z: (1.0 + z) ** lam)
        f_hi = (lambda z: 1.0) if touch_hi else (lambda z: (1.0 - z) ** lam)
        total[mask] += graded_integral(
            lambda z: f_lo(z) * f_hi(z) * inner(z, al), lo, hi,
            lam if touch_lo else 0.0, lam if touch_hi else 0.0,
            lo_gap=np.inf if touch_lo else lo + 1.0, hi_gap=np.inf if touch_hi else 1.0 - hi,
            order=order)

    piece(z1 > -1.0, -1.0, z1, True, False)
    piece(z2 < 1.0, z2, 1.0, False, True)
    mid = z2 > z1
    piece(mid & (z1 > -1.0) & (z2 < 1.0), z1, z2, False, False)
    piece(mid & (z1 == -1.0), z1, z2, True, False)
    piece(mid & (z2 == 1.0), z1, z2, False, True)
    return total


def B_function(model, rho, m):
    """Remainder ``B = eta_power - C1 rho^(gamma+1) - C2 m^2`` of the power entropy.

    Evaluated as ``m^2 K int_0^1 (1-s)(h(sa) - h(0)) ds`` for small ``a`` and
    with the inner ``s``-integral in closed form otherwise, ``a = u/rho^theta``.
    """
    rho, m, u, vac = _states(rho, m)
    shape = rho.shape
    rho, m, u, vac = rho.ravel(), m.ravel(), u.ravel(), vac.ravel()
    g = model.gamma
    K = 2.0 * g * (g + 1.0) / (g - 1.0) ** 2
    a = np.divide(u, rho ** model.theta, out=np.zeros_like(u), where=~vac)
    core = np.zeros_like(a)
    small = (np.abs(a) < _SMALL_A) & (a != 0.0)
    if np.any(small):
        core[small] = K * _b_small(model, a[small])
    big = np.abs(a) >= _SMALL_A
    if np.any(big):
        core[big] = K * _b_large(model, a[big], max(model.quad_order, 48)) - model.c2
    return (m * m * core).reshape(shape)
