"""Gas/damping constants and the theoretical decay exponents."""
from dataclasses import dataclass

import numpy as np

from .quadrature import even_moment

__all__ = ["DomainError", "GasModel", "RateTable", "derive_gas_model", "rate_table", "DEFAULT_EPSILON"]

DEFAULT_EPSILON = 1e-3


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class GasModel:
    gamma: float
    nu: float
    kappa: float
    alpha: float
    theta: float
    lam: float
    c1: float
    c2: float
    # C2 recomputed from its own integral, kept to expose the C2/C1 identity
    c2_direct: float
    weight_mass: float
    quad_order: int = 64

    @property
    def nu_break(self):
        """Damping exponent where the two rate branches meet, gamma/(gamma+2)."""
        return self.gamma / (self.gamma + 2.0)

    @property
    def first_branch(self):
        return self.nu <= self.nu_break

    def pressure(self, rho):
        return self.kappa * np.asarray(rho, dtype=float) ** self.gamma

    def sound_speed(self, rho):
        # sqrt(p'(rho)) = theta * rho^theta for this choice of kappa
        return self.theta * np.asarray(rho, dtype=float) ** self.theta

    def damping_coefficient(self, t):
        return self.alpha * (1.0 + np.asarray(t, dtype=float)) ** (-self.nu)


def _check_gamma_nu(gamma, nu):
    if not np.isfinite(gamma) or gamma <= 1.0:
        raise DomainError(f"gamma must be > 1, got {gamma!r}")
    if not np.isfinite(nu) or not 0.0 <= nu < 1.0:
        raise DomainError(f"nu must lie in [0, 1), got {nu!r}")


def derive_gas_model(gamma, nu, quad_order=64):
    """Build a :class:`GasModel` from the adiabatic and damping exponents.

    ``c1`` and ``c2`` are Gauss-Jacobi integrals against ``(1-z^2)^lam``;
    ``lam`` is negative for ``gamma > 3`` so a weight-adapted rule is used.
    """
    gamma = float(gamma)
    nu = float(nu)
    _check_gamma_nu(gamma, nu)
    if int(quad_order) < 2:
        raise DomainError("quad_order must be at least 2")
    kappa = (gamma - 1.0) ** 2 / (4.0 * gamma)
    theta = 0.5 * (gamma - 1.0)
    lam = (3.0 - gamma) / (2.0 * (gamma - 1.0))
    c1 = even_moment(2.0 * gamma / (gamma - 1.0), lam, quad_order)
    c2_direct = (gamma * (gamma + 1.0) / (gamma - 1.0) ** 2
                 * even_moment(2.0 / (gamma - 1.0), lam, quad_order))
    weight_mass = even_moment(0.0, lam, quad_order)
    return GasModel(
        gamma=gamma, nu=nu, kappa=kappa, alpha=kappa, theta=theta, lam=lam,
        c1=c1, c2=2.0 * gamma * (gamma + 1.0) / (gamma - 1.0) ** 2 * c1,
        c2_direct=c2_direct, weight_mass=weight_mass, quad_order=int(quad_order),
    )


@dataclass(frozen=True)
class RateTable:
    """Decay exponents for one model and slack ``epsilon``.

    ``mu`` follows the weaker ``-epsilon`` convention; ``mu_plus_eps`` keeps
    the opposite sign of epsilon for reference.
    """
    k: float
    mu: float
    phi: float
    mu_star: float
    theta_star: float
    omega: float
    epsilon: float
    mu_plus_eps: float
    first_branch: bool


def rate_table(model, epsilon=DEFAULT_EPSILON):
    if not 0.0 < epsilon < 0.01:
        raise DomainError(f"epsilon must lie in (0, 0.01), got {epsilon!r}")
    g, nu, eps = model.gamma, model.nu, float(epsilon)
    if model.first_branch:
        k0 = g / (2.0 * (g + 1.0) ** 2) * (1.0 + nu)
        mu0 = (g * g + g - 1.0) / (g + 1.0) ** 2 * (1.0 + nu)
        mu_star0 = 1.0 + nu - (nu + 1.0) / (2.0 * (g + 1.0))
        theta_star = nu
    else:
        k0 = g / (2.0 * (g + 1.0)) * (1.0 - nu)
        mu0 = (2.0 * g - 1.0 - nu) / (g + 1.0)
        mu_star0 = 1.5 + 0.5 * nu - (nu + 1.0) / (g + 1.0)
        theta_star = (g - nu) / (g + 1.0)
    # the relative-entropy exponent coincides with mu branch by branch
    phi0 = mu0
    return RateTable(
        k=k0 - eps, mu=mu0 - eps, phi=phi0 - eps, mu_star=mu_star0 - eps,
        theta_star=theta_star, omega=(g - 1.0) * (nu + 1.0) / (g + 1.0) - eps,
        epsilon=eps, mu_plus_eps=mu0 + eps, first_branch=model.first_branch,
    )
