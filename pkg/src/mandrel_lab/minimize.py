"""Constrained minimization of the discrete energies.

The optimizer is a monotone bound-constrained limited-memory quasi-Newton
method (scipy's L-BFGS-B): the mandrel obstacle is a plain box bound on
the stored radial component, so PROJECTION mode maps directly onto the
solver's bound handling, while PENALTY mode (and the slope / axial-sign
constraints, which are not box bounds) use smooth quadratic hinge
penalties with geometric weight ramping over a few outer loops.

Gradients are automatic derivatives of the same backend-parametric energy
cores evaluated by the reporting code, with 64-bit precision enforced;
`gradient_check` compares them against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import Bounds
from scipy.optimize import minimize as scipy_minimize

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp

from .energy import (NL, VKD, Configuration, EnergyReport, energy_report,
                     nl_energy_terms, unbuckled_configuration,
                     vkd_energy_terms)
from .errors import NumericalError, PreconditionError
from .grid import Domain, GridField, ModelParams, derivative_values

FS = "FS"

PROJECTION = "PROJECTION"
PENALTY = "PENALTY"

UNBUCKLED_PLUS_NOISE = "UNBUCKLED_PLUS_NOISE"
PATTERN_SEED = "PATTERN_SEED"
FILE = "FILE"

#: Outer penalty loops and the weight ramp between them.
PENALTY_LOOPS = 4
PENALTY_RAMP = 10.0


@dataclass(frozen=True)
class MinimizeOptions:
    """Knobs of one minimization run."""

    max_iterations: int = 2000
    gradient_tolerance: float = 1e-8
    obstacle_mode: str = PROJECTION
    slope_penalty_weight: float = 1e2
    zsign_penalty_weight: float = 1e2
    obstacle_penalty_weight: float = 1e3
    initial: str = UNBUCKLED_PLUS_NOISE
    noise_amplitude: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1 or self.gradient_tolerance <= 0.0:
            raise PreconditionError("iteration cap and tolerance must be positive")
        if self.obstacle_mode not in (PROJECTION, PENALTY):
            raise PreconditionError(
                f"unknown obstacle mode {self.obstacle_mode!r}")
        if self.initial not in (UNBUCKLED_PLUS_NOISE, PATTERN_SEED, FILE):
            raise PreconditionError(
                f"unknown initialization tag {self.initial!r}")
        if min(self.slope_penalty_weight, self.zsign_penalty_weight,
               self.obstacle_penalty_weight) < 0.0:
            raise PreconditionError("penalty weights must be >= 0")


@dataclass(frozen=True)
class MinimizeResult:
    """Outcome of one minimization run."""

    final: Configuration
    report: EnergyReport
    iterations: int
    converged: bool
    constraint_violation: float
    slope_linf: float
    axisymmetry_deviation: float

    def to_dict(self) -> dict:
        return {
            "report": self.report.to_dict(),
            "iterations": self.iterations,
            "converged": self.converged,
            "constraint_violation": self.constraint_violation,
            "slope_linf": self.slope_linf,
            "axisymmetry_deviation": self.axisymmetry_deviation,
        }


def _model_for(config_model: str, functional: str | None) -> str:
    return FS if functional == FS else config_model


def smooth_energy_value(model: str, mp: ModelParams, dom: Domain,
                        rho_v, theta_v, z_v, xp=np):
    """The smooth (constraint-free) discrete energy of the given model."""
    if model == NL:
        tt, zz, tz, bend = nl_energy_terms(rho_v, theta_v, z_v, mp.h, mp.lam,
                                           dom, xp)
    else:
        tt, zz, tz, bend = vkd_energy_terms(rho_v, theta_v, z_v, mp.h, mp.lam,
                                            dom, xp,
                                            include_shear=(model != FS))
    return tt + zz + 2.0 * tz + bend


def _slope_penalty_value(model: str, mp: ModelParams, rho_v, theta_v, z_v, xp):
    """Quadratic hinge on each first-derivative component above m."""
    lam = mp.lam
    comps = [
        derivative_values(rho_v, 1, 0, xp),
        derivative_values(rho_v, 0, 1, xp),
        derivative_values(theta_v, 1, 0, xp) + (1.0 if model == NL else 0.0),
        derivative_values(theta_v, 0, 1, xp),
        derivative_values(z_v, 1, 0, xp),
        derivative_values(z_v, 0, 1, xp)
        + ((1.0 - lam) if model == NL else -lam),
    ]
    total = 0.0
    for comp in comps:
        total = total + xp.sum(xp.maximum(xp.abs(comp) - mp.m, 0.0) ** 2)
    return total


def _zsign_penalty_value(mp: ModelParams, z_v, xp):
    dz_z = derivative_values(z_v, 0, 1, xp) + (1.0 - mp.lam)
    return xp.sum(xp.maximum(-dz_z, 0.0) ** 2)


def _obstacle_floor(model: str, mp: ModelParams) -> float:
    return mp.rho - 1.0 if model != NL else mp.rho


def _objective_factory(model: str, mp: ModelParams, dom: Domain,
                       use_obstacle_penalty: bool):
    """A jitted value-and-gradient of energy plus weighted penalties."""
    shape = (dom.n_theta, dom.n_z)
    size = dom.n_theta * dom.n_z
    floor = _obstacle_floor(model, mp)
    dA = dom.cell_area

    def objective(x, w_slope, w_zsign, w_obstacle):
        rho_v = x[:size].reshape(shape)
        theta_v = x[size:2 * size].reshape(shape)
        z_v = x[2 * size:].reshape(shape)
        val = smooth_energy_value(model, mp, dom, rho_v, theta_v, z_v, jnp)
        if mp.slope_bounded:
            val = val + w_slope * dA * _slope_penalty_value(
                model, mp, rho_v, theta_v, z_v, jnp)
        if model == NL:
            val = val + w_zsign * dA * _zsign_penalty_value(mp, z_v, jnp)
        if use_obstacle_penalty:
            val = val + w_obstacle * dA * jnp.sum(
                jnp.maximum(floor - rho_v, 0.0) ** 2)
        return val

    return jax.jit(jax.value_and_grad(objective))


def _pack(c: Configuration) -> np.ndarray:
    return np.concatenate([c.comp_rho.values.ravel(),
                           c.comp_theta.values.ravel(),
                           c.comp_z.values.ravel()])


def _unpack(x: np.ndarray, model: str, mp: ModelParams,
            dom: Domain) -> Configuration:
    shape = (dom.n_theta, dom.n_z)
    size = dom.n_theta * dom.n_z
    return Configuration(
        VKD if model != NL else NL,
        GridField(dom, x[:size].reshape(shape)),
        GridField(dom, x[size:2 * size].reshape(shape)),
        GridField(dom, x[2 * size:].reshape(shape)),
        mp)


def band_limited_noise(dom: Domain, amplitude: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Random periodic field with modes at most Nyquist/8 per axis, scaled
    to the given sup-norm amplitude."""
    noise = rng.standard_normal((dom.n_theta, dom.n_z))
    spec = np.fft.fft2(noise)
    for axis, n in enumerate((dom.n_theta, dom.n_z)):
        freq = np.fft.fftfreq(n, d=1.0 / n)
        keep = np.abs(freq) <= max(1, n // 8)
        sl = [np.newaxis, np.newaxis]
        sl[axis] = slice(None)
        spec = spec * keep[tuple(sl)]
    out = np.fft.ifft2(spec).real
    peak = np.max(np.abs(out))
    return amplitude / peak * out if peak > 0.0 else out


def initial_configuration(model: str, mp: ModelParams, dom: Domain,
                          opts: MinimizeOptions) -> Configuration:
    """The unbuckled state plus non-negative band-limited radial noise
    (kept above the obstacle) and small noise on the tangential parts."""
    config_model = NL if model == NL else VKD
    base = unbuckled_configuration(mp, dom, config_model)
    if opts.noise_amplitude == 0.0:
        return base
    rng = np.random.default_rng(opts.seed)
    floor = _obstacle_floor(model, mp)
    radial = band_limited_noise(dom, opts.noise_amplitude, rng)
    radial = radial - radial.min()  # stay on or above the obstacle
    tang_t = band_limited_noise(dom, 0.1 * opts.noise_amplitude, rng)
    tang_z = band_limited_noise(dom, 0.1 * opts.noise_amplitude, rng)
    return Configuration(
        config_model,
        GridField(dom, floor + radial),
        GridField(dom, tang_t),
        GridField(dom, tang_z),
        mp)


def constraint_violation(c: Configuration, model: str | None = None) -> float:
    """Largest post-hoc violation of obstacle, slope, and axial-sign
    constraints (zero when all are satisfied)."""
    mp = c.params
    floor = _obstacle_floor(c.model, mp)
    worst = max(0.0, floor - float(np.min(c.comp_rho.values)))
    if mp.slope_bounded:
        from .energy import slope_linf as _slope
        worst = max(worst, _slope(c) - mp.m)
    if c.model == NL:
        dz_z = derivative_values(c.comp_z.values, 0, 1) + (1.0 - mp.lam)
        worst = max(worst, -float(np.min(dz_z)))
    return worst


def minimize(model: str, mp: ModelParams, dom: Domain,
             opts: MinimizeOptions,
             initial: Configuration | None = None) -> MinimizeResult:
    """Minimize the discrete energy over the admissible set.

    model is VKD, NL, or FS (the free-shear functional over the VKD set).
    The initial state is the noisy unbuckled configuration unless a seed
    configuration is supplied (PATTERN_SEED / FILE).
    """
    if model not in (VKD, NL, FS):
        raise PreconditionError(f"unknown model tag {model!r}")
    if initial is None:
        if opts.initial != UNBUCKLED_PLUS_NOISE:
            raise PreconditionError(
                f"initialization {opts.initial} requires a seed configuration")
        start = initial_configuration(model, mp, dom, opts)
    else:
        expected = NL if model == NL else VKD
        initial.require_model(expected)
        if initial.domain != dom:
            raise PreconditionError("seed configuration domain mismatch")
        start = initial

    use_obstacle_penalty = opts.obstacle_mode == PENALTY
    objective = _objective_factory(model, mp, dom, use_obstacle_penalty)

    size = dom.n_theta * dom.n_z
    x = _pack(start)
    if use_obstacle_penalty:
        bounds = None
    else:
        lower = np.full(3 * size, -np.inf)
        lower[:size] = _obstacle_floor(model, mp)
        bounds = Bounds(lower, np.full(3 * size, np.inf))
        x[:size] = np.maximum(x[:size], lower[:size])

    ramping = ((mp.slope_bounded and opts.slope_penalty_weight > 0.0)
               or (model == NL and opts.zsign_penalty_weight > 0.0)
               or use_obstacle_penalty)
    loops = PENALTY_LOOPS if ramping else 1

    iterations = 0
    success = False
    prev_energy = math.inf
    for loop in range(loops):
        ramp = PENALTY_RAMP ** loop
        w = (opts.slope_penalty_weight * ramp,
             opts.zsign_penalty_weight * ramp,
             opts.obstacle_penalty_weight * ramp)

        def fun(xv, _w=w):
            val, grad = objective(jnp.asarray(xv), *_w)
            val = float(val)
            if not math.isfinite(val):
                raise NumericalError("energy evaluation diverged")
            return val, np.asarray(grad)

        res = scipy_minimize(
            fun, x, jac=True, method="L-BFGS-B", bounds=bounds,
            options={"maxiter": opts.max_iterations,
                     "maxfun": 3 * opts.max_iterations,
                     "gtol": opts.gradient_tolerance,
                     "ftol": 1e-16, "maxcor": 20})
        x = res.x
        iterations += int(res.nit)
        success = res.status == 0  # judged by the final loop
        if res.fun > prev_energy * (1.0 + 1e-12) + 1e-12 and loop == 0:
            raise NumericalError("energy increased beyond line-search recovery")
        prev_energy = res.fun

    final = _unpack(x, model, mp, dom)
    report = energy_report(final, functional=FS if model == FS else None)
    violation = constraint_violation(final)
    radial = final.comp_rho.values
    fluct = radial - radial.mean(axis=0, keepdims=True)
    axisym = float(math.sqrt(np.sum(fluct ** 2) * dom.cell_area))
    return MinimizeResult(
        final=final, report=report, iterations=iterations,
        converged=bool(success and violation <= 1e-6),
        constraint_violation=float(violation),
        slope_linf=report.slope_linf,
        axisymmetry_deviation=axisym)


def gradient_check(model: str, mp: ModelParams, c: Configuration,
                   directions: int = 5, seed: int = 0,
                   step: float = 1e-5) -> float:
    """Max relative error between the automatic gradient of the smooth
    energy and central finite differences along random directions."""
    if model not in (VKD, NL, FS):
        raise PreconditionError(f"unknown model tag {model!r}")
    dom = c.domain
    size = dom.n_theta * dom.n_z

    def energy_of(x):
        rho_v = x[:size].reshape((dom.n_theta, dom.n_z))
        theta_v = x[size:2 * size].reshape((dom.n_theta, dom.n_z))
        z_v = x[2 * size:].reshape((dom.n_theta, dom.n_z))
        return smooth_energy_value(model, mp, dom, rho_v, theta_v, z_v, jnp)

    value_and_grad = jax.jit(jax.value_and_grad(energy_of))
    x = _pack(c)
    _, grad = value_and_grad(jnp.asarray(x))
    grad = np.asarray(grad)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(directions):
        d = rng.standard_normal(x.size)
        d /= np.linalg.norm(d)
        e_plus = float(value_and_grad(jnp.asarray(x + step * d))[0])
        e_minus = float(value_and_grad(jnp.asarray(x - step * d))[0])
        fd = (e_plus - e_minus) / (2.0 * step)
        an = float(grad @ d)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
    return worst
