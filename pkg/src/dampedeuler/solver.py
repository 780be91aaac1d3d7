"""Finite-volume solver for the damped isentropic Euler equations in 1D.

    rho_t + m_x = 0
    m_t + (m^2/rho + kappa rho^gamma)_x = -alpha (1+t)^(-nu) m

Spatial discretisation: Rusanov flux with an optional minmod (MUSCL)
reconstruction of the conserved variables, reflective walls.  Time: Strang
splitting, with the damping integrated exactly and the hyperbolic part
advanced by two-stage SSP Runge-Kutta.

The region ``{rho >= 0, u + rho^theta <= C, u - rho^theta >= -C}`` is convex
in ``(rho, m)`` and invariant for the Riemann problem.  With the wave speed
bound ``max(1, theta) (|u| + rho^theta)`` the first-order update is a convex
combination of states in that region whenever ``dt s / dx <= 1/2``.  The
second-order update is checked after each stage; offending cells are
recomputed with zero slopes (first order) around them.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .barenblatt import calibrate, cell_averages, density, support_edge
from .params import DomainError

__all__ = [
    "Grid1D", "FluidState", "SolverConfig", "RunDiagnostics", "SolverError", "CflError",
    "InvariantViolation", "DomainOverflow", "initialize", "hyperbolic_step",
    "damping_factor", "damping_step", "advance", "simulate", "required_half_width",
    "wave_speed",
]

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
TINY_ABS = 16.0 * np.finfo(float).smallest_subnormal
RHO_NORMAL = np.finfo(float).tiny
# positivity of a first-order stage needs dt * s / dx <= 1/2
STAGE_LIMIT = 0.5
MAX_FALLBACK_PASSES = 3
DOMAIN_MARGIN = 1.2


class SolverError(RuntimeError):
    pass


class CflError(SolverError):
    pass


class InvariantViolation(SolverError):
    pass


class DomainOverflow(SolverError):
    pass


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) < 4:
            raise DomainError("need at least 4 cells")
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")

    @classmethod
    def symmetric(cls, half_width, n_cells):
        return cls(-float(half_width), float(half_width), int(n_cells))

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self):
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self):
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


@dataclass
class FluidState:
    time: float
    rho: np.ndarray
    mom: np.ndarray
    grid: Grid1D
    c_inv: float

    def mass(self):
        return float(np.sum(self.rho) * self.grid.dx)

    def velocity(self):
        return np.divide(self.mom, self.rho, out=np.zeros_like(self.mom), where=self.rho > 0)

    def copy(self):
        return replace(self, rho=self.rho.copy(), mom=self.mom.copy())


@dataclass
class SolverConfig:
    cfl: float = 0.45
    limiter: str = "minmod"
    density_floor: float = 0.0
    end_time: float = 1.0
    output_times: Sequence[float] = ()
    initial_data: str = "box"
    box_half_width: Optional[float] = None
    perturbation: float = 0.1
    custom_rho: Optional[np.ndarray] = None
    custom_mom: Optional[np.ndarray] = None
    # mass allowed in the two outermost cells on either side before aborting
    overflow_fraction: float = 1e-12
    invariant_tol: float = 1e-8

    def validate(self):
        if not 0.0 < self.cfl <= 1.0:
            raise DomainError("cfl must lie in (0, 1]")
        if self.cfl > STAGE_LIMIT:
            # accepted by contract, but every step then relies on the retry path
            log.warning("cfl %.3g exceeds the positivity bound %.2g", self.cfl, STAGE_LIMIT)
        if self.limiter not in ("none", "minmod"):
            raise DomainError(f"unknown limiter {self.limiter!r}")
        if self.density_floor < 0:
            raise DomainError("density_floor must be >= 0")
        if not self.end_time >= 0:
            raise DomainError("end_time must be >= 0")
        ts = np.asarray(list(self.output_times), dtype=float)
        if ts.size and (np.any(np.diff(ts) <= 0) or ts[0] < 0 or ts[-1] > self.end_time):
            raise DomainError("output_times must be strictly increasing within [0, end_time]")
        if self.initial_data not in ("box", "barenblatt_perturbed", "custom"):
            raise DomainError(f"unknown initial data {self.initial_data!r}")
        return self


@dataclass
class RunDiagnostics:
    mass_initial: float = 0.0
    c_inv: float = 0.0
    steps: int = 0
    rejected_steps: int = 0
    fallback_cells: int = 0
    full_first_order_stages: int = 0
    rounding_repairs: int = 0
    floor_removed_mass: float = 0.0
    min_rho: float = np.inf
    max_speed_ratio: float = 0.0
    max_w: float = -np.inf
    min_z: float = np.inf
    max_mass_drift: float = 0.0
    max_boundary_mass: float = 0.0
    max_dissipation_residual: float = -np.inf
    dissipation_residual_integral: float = 0.0

    def to_dict(self):
        return {k: (float(v) if isinstance(v, (float, np.floating)) else int(v))
                for k, v in self.__dict__.items()}


# ---------------------------------------------------------------------------
# setup


def required_half_width(profile, end_time):
    return DOMAIN_MARGIN * float(support_edge(profile, end_time))


def _overlap(faces, lo, hi):
    return np.clip(np.minimum(faces[1:], hi) - np.maximum(faces[:-1], lo), 0.0, None)


def initialize(model, grid, config, mass):
    """Initial cell averages for the configured data, with ``C_inv`` fixed.

    ``C_inv = max(u + rho^theta, -(u - rho^theta))`` over the initial cells,
    i.e. the bound on the Riemann invariants that the scheme preserves.
    """
    config.validate()
    profile = calibrate(model, mass)
    need = required_half_width(profile, config.end_time)
    if grid.x_max < need or grid.x_min > -need:
        raise DomainError(
            f"domain too small: the reference support at t={config.end_time:g} needs "
            f"[-{need:.6g}, {need:.6g}] (x_max >= {need:.6g}); got [{grid.x_min:g}, {grid.x_max:g}]")
    faces = grid.faces
    dx = grid.dx
    if config.initial_data == "box":
        half = config.box_half_width or float(support_edge(profile, 0.0))
        if half <= 0 or half > min(grid.x_max, -grid.x_min):
            raise DomainError("box does not fit in the domain")
        rho = mass / (2.0 * half) * _overlap(faces, -half, half) / dx
        mom = np.zeros_like(rho)
    elif config.initial_data == "barenblatt_perturbed":
        edge = float(support_edge(profile, 0.0))
        t_nodes, t_w = np.polynomial.legendre.leggauss(8)
        x = grid.centers[:, None] + 0.5 * dx * t_nodes[None, :]
        dens = density(profile, x, 0.0) * (1.0 + config.perturbation * np.sin(np.pi * x / edge))
        rho = 0.5 * np.sum(dens * t_w, axis=1)
        rho *= mass / (np.sum(rho) * dx)
        _, mom = cell_averages(profile, faces, 0.0)
    else:
        if config.custom_rho is None:
            raise DomainError("custom initial data needs custom_rho")
        rho = np.array(config.custom_rho, dtype=float)
        mom = np.zeros_like(rho) if config.custom_mom is None else np.array(config.custom_mom, dtype=float)
        if rho.shape != (grid.n_cells,) or mom.shape != rho.shape:
            raise DomainError("custom data must have one value per cell")
        if np.any(~np.isfinite(rho)) or np.any(rho < 0):
            raise DomainError("custom density must be finite and nonnegative")
        if np.any((rho == 0) & (mom != 0)):
            raise DomainError("custom momentum must vanish where the density does")
        total = np.sum(rho) * dx
        if total <= 0:
            raise DomainError("custom density carries no mass")
        scale = mass / total
        rho, mom = rho * scale, mom * scale
    pos = rho > 0
    u = np.divide(mom, rho, out=np.zeros_like(mom), where=pos)
    c_inv = float(np.max(np.where(pos, np.abs(u) + rho ** model.theta, 0.0)))
    return FluidState(time=0.0, rho=rho, mom=mom, grid=grid, c_inv=c_inv)


# ---------------------------------------------------------------------------
# hyperbolic part


def _velocity(rho, mom):
    # exact division wherever rho > 0: clamping the denominator would
    # underestimate |u| (and the signal speed) for subnormal densities
    return np.divide(mom, rho, out=np.zeros(np.broadcast(rho, mom).shape), where=rho > 0.0)


def wave_speed(model, rho, mom):
    """Upper bound on the Riemann-fan speeds: ``max(1, theta)(|u| + rho^theta)``."""
    u = _velocity(rho, mom)
    return max(1.0, model.theta) * (np.abs(u) + np.maximum(rho, 0.0) ** model.theta)


def _flux(model, rho, mom):
    u = _velocity(rho, mom)
    return mom, mom * u + model.kappa * np.maximum(rho, 0.0) ** model.gamma


def _with_ghosts(rho, mom):
    r = np.concatenate([rho[1::-1], rho, rho[:-3:-1]])
    m = np.concatenate([-mom[1::-1], mom, -mom[:-3:-1]])
    return r, m


def _minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _admissible(model, rho, mom, c_inv):
    """Membership in the invariant region (exact, no slack)."""
    ok = rho >= 0.0
    r = np.maximum(rho, 0.0)
    room = r * (c_inv - r ** model.theta)
    return ok & (np.abs(mom) <= room) & ((r > 0.0) | (mom == 0.0))


def _euler_stage(model, rho, mom, dt, dx, c_inv, limiter, first_order):
    """One forward-Euler update.

    Returns ``(rho, mom, bad, max_face_speed, (tol_rho, tol_mom), flushed)``
    where ``bad`` flags cells outside the invariant region by more than
    rounding and ``flushed`` is the mass of subnormal cells set to vacuum.
    """
    n = rho.size
    R, Mo = _with_ghosts(rho, mom)          # length n + 4; cell i sits at i + 2
    if limiter == "minmod":
        dR, dM = np.diff(R), np.diff(Mo)
        sR = np.zeros_like(R)
        sM = np.zeros_like(Mo)
        sR[1:-1] = _minmod(dR[:-1], dR[1:])
        sM[1:-1] = _minmod(dM[:-1], dM[1:])
        # the mirrored ghost cells inherit the interior decision
        fo = np.concatenate([first_order[1::-1], first_order, first_order[:-3:-1]])
        sR[fo] = 0.0
        sM[fo] = 0.0
        lo_r, lo_m = R - 0.5 * sR, Mo - 0.5 * sM
        hi_r, hi_m = R + 0.5 * sR, Mo + 0.5 * sM
        ok = _admissible(model, lo_r, lo_m, c_inv) & _admissible(model, hi_r, hi_m, c_inv)
        sR[~ok] = 0.0
        sM[~ok] = 0.0
        lo_r, lo_m = R - 0.5 * sR, Mo - 0.5 * sM
        hi_r, hi_m = R + 0.5 * sR, Mo + 0.5 * sM
    else:
        lo_r, lo_m, hi_r, hi_m = R, Mo, R, Mo
    # faces between extended cells j and j+1 for j = 1 .. n+1
    rl, ml = hi_r[1:n + 2], hi_m[1:n + 2]
    rr, mr = lo_r[2:n + 3], lo_m[2:n + 3]
    s = np.maximum(wave_speed(model, rl, ml), wave_speed(model, rr, mr))
    fl_r, fl_m = _flux(model, rl, ml)
    fr_r, fr_m = _flux(model, rr, mr)
    F_r = 0.5 * (fl_r + fr_r) - 0.5 * s * (rr - rl)
    F_m = 0.5 * (fl_m + fr_m) - 0.5 * s * (mr - ml)
    # exact zero mass flux through the walls (mirror symmetry gives it up to rounding)
    F_r[0] = 0.0
    F_r[-1] = 0.0
    lam = dt / dx
    new_r = rho - lam * np.diff(F_r)
    new_m = mom - lam * np.diff(F_m)
    # densities below the smallest normal double carry no relative precision
    # (their momenta round in absolute subnormal units); treat them as vacuum
    flush = np.abs(new_r) < RHO_NORMAL
    flushed = float(np.sum(new_r[flush])) * dx
    new_r = np.where(flush, 0.0, new_r)
    new_m = np.where(flush, 0.0, new_m)

    # rounding scale of each update: size of the terms that were summed
    scale_r = np.abs(rho) + lam * (np.abs(F_r[1:]) + np.abs(F_r[:-1]))
    scale_m = np.abs(mom) + lam * (np.abs(F_m[1:]) + np.abs(F_m[:-1]))
    # relative rounding plus an absolute floor: subnormal results round in
    # units of the smallest subnormal, not relative to their size
    tol_r = 64.0 * EPS * scale_r + TINY_ABS
    tol_m = 64.0 * EPS * scale_m + 2.0 * c_inv * tol_r + TINY_ABS
    pos = np.maximum(new_r, 0.0)
    room = pos * (c_inv - pos ** model.theta)
    excess = np.abs(new_m) - room
    bad = (new_r < -tol_r) | (excess > tol_m)
    return new_r, new_m, bad, float(np.max(s)), (tol_r, tol_m), flushed


def _repair(model, rho, mom, c_inv, tols):
    """Project rounding-level violations back onto the invariant region."""
    tol_r, tol_m = tols
    neg = rho < 0.0
    rho = np.where(neg, 0.0, rho)
    room = np.maximum(rho * (c_inv - rho ** model.theta), 0.0)
    clip = np.abs(mom) > room
    mom = np.where(clip, np.sign(mom) * room, mom)
    return rho, mom, int(np.sum(neg | clip))


def _stage(model, rho, mom, dt, dx, c_inv, limiter, diag):
    first_order = np.zeros(rho.size, dtype=bool)
    for attempt in range(MAX_FALLBACK_PASSES + 2):
        if attempt == MAX_FALLBACK_PASSES + 1:
            first_order[:] = True
            if diag is not None:
                diag.full_first_order_stages += 1
        lim = limiter if not first_order.all() else "none"
        new_r, new_m, bad, smax, tols, flushed = _euler_stage(model, rho, mom, dt, dx, c_inv, lim, first_order)
        if dt * smax / dx > STAGE_LIMIT * (1.0 + 1e-12):
            raise CflError(f"stage Courant number {dt * smax / dx:.4g} exceeds {STAGE_LIMIT}")
        if not bad.any():
            break
        if lim == "none":
            i = int(np.argmax(bad))
            raise InvariantViolation(
                f"first-order stage left the invariant region at cell {i}: "
                f"rho={new_r[i]:.17g}, m={new_m[i]:.17g}, C={c_inv:.17g}")
        grow = bad.copy()
        grow[1:] |= bad[:-1]
        grow[:-1] |= bad[1:]
        if diag is not None:
            diag.fallback_cells += int(np.sum(grow & ~first_order))
        first_order |= grow
    new_r, new_m, n_fix = _repair(model, new_r, new_m, c_inv, tols)
    if diag is not None:
        diag.rounding_repairs += n_fix
        diag.floor_removed_mass += flushed
    return new_r, new_m


def max_wave_speed(model, state):
    return float(np.max(wave_speed(model, state.rho, state.mom)))


def hyperbolic_step(model, state, dt, cfl=0.45, limiter="minmod", diag=None):
    """Advance the flux part by ``dt`` with two-stage SSP Runge-Kutta.

    Raises :class:`CflError` if ``dt`` exceeds ``cfl * dx / s_max`` for the
    current state or if a stage would exceed the positivity bound.
    """
    dx = state.grid.dx
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return state.copy()
    smax = max_wave_speed(model, state)
    if dt * smax > cfl * dx * (1.0 + 1e-12):
        raise CflError(f"dt={dt:.6g} violates CFL: limit {cfl * dx / smax:.6g}")
    c = state.c_inv
    r1, m1 = _stage(model, state.rho, state.mom, dt, dx, c, limiter, diag)
    r2, m2 = _stage(model, r1, m1, dt, dx, c, limiter, diag)
    rho = 0.5 * (state.rho + r2)
    mom = 0.5 * (state.mom + m2)
    return replace(state, time=state.time + dt, rho=rho, mom=mom)


# ---------------------------------------------------------------------------
# damping


def damping_factor(model, t, dt):
    """``exp(-alpha int_t^{t+dt} (1+s)^-nu ds)`` without cancellation for small dt."""
    T = 1.0 + t
    nu = model.nu
    if nu == 0.0:
        integral = dt
    else:
        integral = T ** (1.0 - nu) * np.expm1((1.0 - nu) * np.log1p(dt / T)) / (1.0 - nu)
    return float(np.exp(-model.alpha * integral))


def damping_step(model, state, t, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    return replace(state, mom=state.mom * damping_factor(model, t, dt))


# ---------------------------------------------------------------------------
# driver


def _monitor(model, state, diag, config, mass0):
    rho, mom = state.rho, state.mom
    diag.min_rho = min(diag.min_rho, float(rho.min()))
    if diag.min_rho < 0.0:
        raise InvariantViolation(f"negative density {diag.min_rho:.3g} at t={state.time:g}")
    pos = rho > 0.0
    u = np.divide(mom, rho, out=np.zeros_like(mom), where=pos)
    ct = np.where(pos, rho, 0.0) ** model.theta
    diag.max_speed_ratio = max(diag.max_speed_ratio, float(np.max(np.abs(u))))
    diag.max_w = max(diag.max_w, float(np.max(np.where(pos, u + ct, -np.inf))))
    diag.min_z = min(diag.min_z, float(np.min(np.where(pos, u - ct, np.inf))))
    lim = state.c_inv + config.invariant_tol
    if diag.max_w > lim or -diag.min_z > lim:
        raise InvariantViolation(
            f"Riemann invariants left [-C, C] (C={state.c_inv:.6g}): max w={diag.max_w:.17g}, "
            f"min z={diag.min_z:.17g} at t={state.time:g}")
    m = state.mass()
    diag.max_mass_drift = max(diag.max_mass_drift, abs(m - mass0) / mass0)
    edge_mass = (rho[:2].sum() + rho[-2:].sum()) * state.grid.dx
    diag.max_boundary_mass = max(diag.max_boundary_mass, edge_mass / mass0)
    if edge_mass > config.overflow_fraction * mass0:
        raise DomainOverflow(f"mass reached the walls at t={state.time:g} (fraction {edge_mass / mass0:.3g})")


def _energy(model, state):
    rho, mom = state.rho, state.mom
    kin = np.divide(mom * mom, rho, out=np.zeros_like(mom), where=rho > 0)
    e = 0.5 * kin + model.kappa / (model.gamma - 1.0) * rho ** model.gamma
    return float(np.sum(e) * state.grid.dx), float(np.sum(kin) * state.grid.dx)


def _apply_floor(state, floor, diag):
    if floor <= 0.0:
        return state
    low = (state.rho > 0.0) & (state.rho < floor)
    if not low.any():
        return state
    diag.floor_removed_mass += float(state.rho[low].sum() * state.grid.dx)
    rho = np.where(low, 0.0, state.rho)
    mom = np.where(low, 0.0, state.mom)
    return replace(state, rho=rho, mom=mom)


def advance(model, state, config, to_time, diag=None, max_retries=12):
    """Strang-split integration from ``state.time`` to ``to_time``.

    Steps are sized by ``config.cfl`` and truncated to land on ``to_time``.
    The invariant region, positivity, conservation and wall contact are
    checked after every step; a violation raises.
    """
    if to_time < state.time:
        raise ValueError("to_time must be >= state.time")
    if diag is None:
        diag = RunDiagnostics(mass_initial=state.mass(), c_inv=state.c_inv)
    mass0 = diag.mass_initial or state.mass()
    dx = state.grid.dx
    state = state.copy()
    while state.time < to_time:
        t = state.time
        smax = max_wave_speed(model, state)
        dt = config.cfl * dx / smax if smax > 0 else to_time - t
        dt = min(dt, to_time - t)
        e0, k0 = _energy(model, state)
        for attempt in range(max_retries + 1):
            try:
                half = damping_step(model, state, t, 0.5 * dt)
                hyp = hyperbolic_step(model, half, dt, cfl=config.cfl, limiter=config.limiter, diag=diag)
                new = damping_step(model, hyp, t + 0.5 * dt, 0.5 * dt)
                break
            except CflError:
                if attempt == max_retries:
                    raise
                diag.rejected_steps += 1
                dt *= 0.5
        new.time = t + dt if t + dt < to_time else to_time
        state = _apply_floor(new, config.density_floor, diag)
        diag.steps += 1
        _monitor(model, state, diag, config, mass0)
        e1, k1 = _energy(model, state)
        damp = model.alpha * (1.0 + t + 0.5 * dt) ** (-model.nu)
        resid = (e1 - e0) / dt + damp * 0.5 * (k0 + k1)
        diag.max_dissipation_residual = max(diag.max_dissipation_residual, resid)
        diag.dissipation_residual_integral += max(resid, 0.0) * dt
    return state, diag


def simulate(model, grid, config, mass, progress=None):
    """Run from the initial data to ``config.end_time``.

    Returns ``(snapshots, diagnostics)``; snapshots are taken at
    ``config.output_times`` (copies, in order).
    """
    state = initialize(model, grid, config, mass)
    diag = RunDiagnostics(mass_initial=state.mass(), c_inv=state.c_inv)
    _monitor(model, state, diag, config, diag.mass_initial)
    snaps = []
    for t_out in config.output_times:
        state, diag = advance(model, state, config, float(t_out), diag)
        snaps.append(state.copy())
        if progress is not None:
            progress(state, diag)
    if state.time < config.end_time:
        state, diag = advance(model, state, config, config.end_time, diag)
    return snaps, diag
