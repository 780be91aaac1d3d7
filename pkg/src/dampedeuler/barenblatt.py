"""Self-similar Barenblatt solution of the time-weighted porous medium equation.

    rho_t = (1+t)^nu (rho^gamma)_xx,     m = -(1+t)^nu (rho^gamma)_x

All evaluators take ``t >= 0`` and broadcast over ``x``.  Integrals over the
support are done in the similarity variable ``xi = x (1+t)^(-(1+nu)/(gamma+1))``
so their accuracy does not depend on ``t``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .params import DomainError, GasModel
from .quadrature import even_moment, graded_integral

__all__ = [
    "BarenblattProfile", "calibrate", "density", "velocity", "momentum",
    "darcy_momentum", "acceleration_ratio", "support_edge", "weighted_lp_norm", "accel_lp_norm",
    "pme_residual", "pme_residual_of", "cell_averages", "mass_integral",
]


@dataclass(frozen=True)
class BarenblattProfile:
    model: GasModel
    mass: float
    a0: float
    b0: float

    @property
    def spread(self):
        """Growth exponent (1+nu)/(gamma+1) of the support."""
        return (1.0 + self.model.nu) / (self.model.gamma + 1.0)

    @property
    def xi_edge(self):
        return np.sqrt(self.a0 / self.b0)


def _shape_integral(gamma, order):
    return even_moment(0.0, 1.0 / (gamma - 1.0), order)


def calibrate(model, mass):
    """Fix the amplitude A0 so the profile carries total mass ``mass``."""
    mass = float(mass)
    if not np.isfinite(mass) or mass <= 0.0:
        raise DomainError(f"mass must be positive, got {mass!r}")
    g, nu = model.gamma, model.nu
    b0 = (g - 1.0) * (1.0 + nu) / (2.0 * g * (g + 1.0))
    rhs = mass * np.sqrt(b0) / _shape_integral(g, model.quad_order)
    a0 = rhs ** (2.0 * (g - 1.0) / (g + 1.0))
    return BarenblattProfile(model=model, mass=mass, a0=a0, b0=b0)


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("Barenblatt evaluators need t >= 0")
    return t


def _base(profile, x, t):
    T = 1.0 + t
    return profile.a0 - profile.b0 * np.asarray(x, dtype=float) ** 2 * T ** (-2.0 * profile.spread)


def density(profile, x, t):
    t = _check_time(t)
    base = np.maximum(_base(profile, x, t), 0.0)
    return (1.0 + t) ** (-profile.spread) * base ** (1.0 / (profile.model.gamma - 1.0))


def velocity(profile, x, t):
    """Darcy velocity; zero outside the support by convention."""
    t = _check_time(t)
    x = np.asarray(x, dtype=float)
    inside = _base(profile, x, t) > 0.0
    return np.where(inside, profile.spread * x / (1.0 + t), 0.0)


def momentum(profile, x, t):
    return density(profile, x, t) * velocity(profile, x, t)


def darcy_momentum(profile, x, t):
    """``-(1+t)^nu (rho^gamma)_x`` from the analytic x-derivative of the
    pressure profile ``T^(-k gamma) (A0 - B0 xi^2)_+^(gamma/(gamma-1))``."""
    t = _check_time(t)
    x = np.asarray(x, dtype=float)
    g, nu = profile.model.gamma, profile.model.nu
    T = 1.0 + t
    k = profile.spread
    base = np.maximum(_base(profile, x, t), 0.0)
    d_base = -2.0 * profile.b0 * x * T ** (-2.0 * k)
    d_pressure = T ** (-k * g) * g / (g - 1.0) * base ** (1.0 / (g - 1.0)) * d_base
    return -T ** nu * d_pressure


def acceleration_ratio(profile, x, t):
    """``R/rho = u_t + u u_x`` of the reference flow (zero outside the support)."""
    t = _check_time(t)
    x = np.asarray(x, dtype=float)
    k = profile.spread
    inside = _base(profile, x, t) > 0.0
    return np.where(inside, -k * (1.0 - k) * x / (1.0 + t) ** 2, 0.0)


def support_edge(profile, t):
    t = _check_time(t)
    return profile.xi_edge * (1.0 + t) ** profile.spread


def _similarity_moment(profile, dens_power, abs_x_power, order=None):
    """``int (A0 - B0 xi^2)_+^dens_power |xi|^abs_x_power d xi``."""
    order = order or profile.model.quad_order
    e = profile.xi_edge
    b0 = profile.b0

    def f(xi):
        return (b0 * (e + xi)) ** dens_power

    # (A0 - B0 xi^2) = B0 (e - xi)(e + xi); even integrand, fold onto [0, e]
    return 2.0 * graded_integral(f, 0.0, e, abs_x_power, dens_power, lo_gap=e, order=order)[0]


def weighted_lp_norm(profile, beta1, beta2, p, t):
    """``|| rho^beta1 |u|^beta2 ||_{L^p}`` of the reference solution at time ``t``."""
    g = profile.model.gamma
    if p < 1.0:
        raise DomainError("p must be >= 1")
    if beta2 < 0.0:
        raise DomainError("beta2 must be >= 0")
    # the stated range includes equality, but the integral diverges there
    if beta1 <= -(g - 1.0) / p:
        raise DomainError(f"beta1 must exceed -(gamma-1)/p = {-(g - 1.0) / p}")
    t = _check_time(t)
    T = 1.0 + t
    k = profile.spread
    core = _similarity_moment(profile, p * beta1 / (g - 1.0), p * beta2)
    scale = T ** (-k * p * beta1) * (k * T ** (k - 1.0)) ** (p * beta2) * T ** k
    return (scale * core) ** (1.0 / p)


def accel_lp_norm(profile, delta, p, t):
    """``|| rho^delta (R/rho) ||_{L^p}`` over the support at time ``t``."""
    g = profile.model.gamma
    if p < 1.0:
        raise DomainError("p must be >= 1")
    if delta < 0.0:
        raise DomainError("delta must be >= 0")
    t = _check_time(t)
    T = 1.0 + t
    k = profile.spread
    core = _similarity_moment(profile, p * delta / (g - 1.0), p)
    amp = k * (1.0 - k)
    scale = T ** (-k * p * delta) * (amp * T ** (k - 2.0)) ** p * T ** k
    return (scale * core) ** (1.0 / p)


def pme_residual_of(func, x, t, h, gamma, nu):
    """Centered-difference residual of ``rho_t - (1+t)^nu (rho^gamma)_xx``.

    ``func(x, t)`` is any density field; differences use step ``h`` in both
    time and space, so the residual of an exact solution is O(h^2).
    """
    x = np.asarray(x, dtype=float)
    d_t = (func(x, t + h) - func(x, t - h)) / (2.0 * h)
    p = lambda y: np.asarray(func(y, t), dtype=float) ** gamma
    d_xx = (p(x + h) - 2.0 * p(x) + p(x - h)) / h ** 2
    return d_t - (1.0 + t) ** nu * d_xx


def pme_residual(profile, h, t, x=None, interior_fraction=0.8, similarity=False):
    """Max-norm PME residual at interior points (default: 101 points on
    ``|x| <= interior_fraction * edge``).

    With ``similarity=True`` the step is ``h * (1+t)^spread``, i.e. ``h`` is
    measured in the self-similar variable.  A fixed physical step at late
    times is far below the profile's length scale, and the residual then
    sits at the rounding floor instead of showing its truncation order.
    """
    t = float(_check_time(t))
    if h <= 0.0:
        raise DomainError("need h > 0")
    if similarity:
        h = h * (1.0 + t) ** profile.spread
    if h > t + 1.0:
        raise DomainError("need h <= 1 + t")
    edge = float(support_edge(profile, t))
    if x is None:
        x = np.linspace(-interior_fraction * edge, interior_fraction * edge, 101)
    x = np.asarray(x, dtype=float)
    # the edge moves during [t-h, t+h]; keep clear of it by 5h plus that motion
    clearance = 5.0 * h + edge - float(support_edge(profile, max(t - h, 0.0)))
    if np.any(np.abs(x) > edge - clearance):
        raise DomainError("evaluation points must stay 5h inside the support")
    g, nu = profile.model.gamma, profile.model.nu

    def rho(y, s):
        T = 1.0 + s
        base = np.maximum(profile.a0 - profile.b0 * y ** 2 * T ** (-2.0 * profile.spread), 0.0)
        return T ** (-profile.spread) * base ** (1.0 / (g - 1.0))

    return float(np.max(np.abs(pme_residual_of(rho, x, t, h, g, nu))))


def _upper_tail(profile, y):
    """Normalized mass of the profile beyond ``y`` in units of xi/xi_edge."""
    e = 1.0 / (profile.model.gamma - 1.0)
    y = np.clip(y, -1.0, 1.0)
    pos = 0.5 * betainc(e + 1.0, 0.5, 1.0 - np.abs(y) ** 2)
    return np.where(y >= 0.0, pos, 1.0 - pos)


def cell_averages(profile, faces, t):
    """Exact cell averages of density and momentum between consecutive ``faces``.

    Uses the closed-form primitive (an incomplete Beta function for the
    density, an elementary one for the momentum) so the averaged reference
    has total mass equal to ``profile.mass`` to rounding.
    """
    t = float(_check_time(t))
    faces = np.asarray(faces, dtype=float)
    width = np.diff(faces)
    if np.any(width <= 0):
        raise ValueError("faces must be strictly increasing")
    T = 1.0 + t
    k = profile.spread
    y = faces * T ** (-k) / profile.xi_edge
    tail = _upper_tail(profile, y)
    # use whichever tail is small to keep edge cells accurate
    left_tail = _upper_tail(profile, -y)
    lo, hi = y[:-1], y[1:]
    mass_right = tail[:-1] - tail[1:]
    mass_left = left_tail[1:] - left_tail[:-1]
    cell_mass = np.where(lo >= 0.0, mass_right, np.where(hi <= 0.0, mass_left, 1.0 - tail[1:] - left_tail[:-1]))
    rho_avg = profile.mass * cell_mass / width

    e = 1.0 / (profile.model.gamma - 1.0)
    xi = faces * T ** (-k)
    prim = -np.maximum(profile.a0 - profile.b0 * xi ** 2, 0.0) ** (e + 1.0) / (2.0 * profile.b0 * (e + 1.0))
    first_moment = T ** k * np.diff(prim)
    mom_avg = (k / T) * first_moment / width
    return rho_avg, mom_avg


def mass_integral(profile, t, order=None):
    """Total mass at time ``t`` by quadrature in the similarity variable."""
    t = float(_check_time(t))
    T = 1.0 + t
    k = profile.spread
    # dx = T^k d xi and rho = T^-k (.)^(1/(gamma-1)): the powers of T cancel,
    # but keep them explicit so the t-dependence is actually exercised
    core = _similarity_moment(profile, 1.0 / (profile.model.gamma - 1.0), 0.0, order)
    return T ** (-k) * T ** k * core
