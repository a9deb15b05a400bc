"""Explicit low-energy test fields for the compressed cylinder.

Contents:

* bump profiles f (smooth, non-negative, one-periodic, compactly supported
  in each period) with the two normalizations used by the constructions:
  the linear-model profile has ||f'||_{L^2} = 1 and ||f'||_inf <= 2, the
  nonlinear-model profile has int sqrt(1 - f'^2) dt = 1/2 and
  ||f'||_inf < 1;
* the rescaled profile f_{delta,n} packing n bumps into a window of volume
  fraction delta;
* the monotone map S_f(b) = int (1 - sqrt(1 - (b f')^2)) dt and its
  inverse, used to prescribe the axial shortening of the nonlinear
  construction;
* builders for the axisymmetric wrinkling patterns (VKD and NL models) and
  the tilted free-shear patterns, all with compensating axial/hoop
  displacements computed by spectral antiderivatives so the construction
  identities (eps_zz == 0, g_zz == 1, eps_tt equal to its theta-average)
  hold on the grid to machine precision;
* regime-optimal parameter selectors (n, k, delta) for each scaling branch,
  and the slope bounds m1, m2 and three-term energy bounds the
  constructions are guaranteed to satisfy.

Amplitude normalizations are imposed in the *discrete* quadrature (a
rescaling of size 1 + O(aliasing) relative to the continuum one), which is
what makes the construction identities exact on the grid.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

from .energy import NL, VKD, Configuration, unbuckled_configuration
from .errors import NumericalError, PreconditionError
from .grid import (THETA_EXTENT, Z_EXTENT, Domain, GridField, ModelParams,
                   check_resolution, derivative_values, required_n_z)

VKD_PROFILE = "VKD_PROFILE"
NL_PROFILE = "NL_PROFILE"

#: Regime tags for the pattern constructions.
UNBUCKLED = "UNBUCKLED"
MANY = "MANY"
ONE = "ONE"
FLAT = "FLAT"
FS_MANY_TILTED = "FS_MANY_TILTED"
FS_FEW_TILTED_LONG = "FS_FEW_TILTED_LONG"
FS_FEW_TILTED = "FS_FEW_TILTED"

AXISYMMETRIC_REGIMES = (MANY, ONE, FLAT)
TILTED_REGIMES = (FS_MANY_TILTED, FS_FEW_TILTED_LONG, FS_FEW_TILTED)
ALL_REGIMES = (UNBUCKLED,) + AXISYMMETRIC_REGIMES + TILTED_REGIMES

VKD_HALF_WIDTH = 0.45
NL_HALF_WIDTH = 0.48

#: Quadrature points per unit period for profile normalizations (the
#: integrands are smooth and periodic, so the rectangle rule is spectrally
#: accurate here).
_QUAD_POINTS = 1 << 15


def _frac(t):
    """Reduce to the fundamental period [-1/2, 1/2]."""
    t = np.asarray(t, dtype=float)
    return t - np.round(t)


def _period_grid(n=_QUAD_POINTS):
    return -0.5 + np.arange(n) / n


# ---------------------------------------------------------------------------
# base bump shapes (unit amplitude)


def _vkd_base(w0):
    """The compactly supported bump exp(1 - 1/(1 - (t/w0)^2)) on (-w0, w0)
    and its first two derivatives, as vectorized evaluators on [-1/2, 1/2]."""

    def parts(t):
        s = np.asarray(t, dtype=float) / w0
        inside = np.abs(s) < 1.0 - 1e-12
        s = np.where(inside, s, 0.0)
        one_ms2 = 1.0 - s * s
        with np.errstate(over="ignore", under="ignore"):
            val = np.where(inside, np.exp(1.0 - 1.0 / one_ms2), 0.0)
        return s, one_ms2, inside, val

    def f(t):
        return parts(t)[3]

    def df(t):
        s, one_ms2, inside, val = parts(t)
        slope = -2.0 * s / (w0 * one_ms2 ** 2)
        return np.where(inside, val * slope, 0.0)

    def d2f(t):
        s, one_ms2, inside, val = parts(t)
        slope = -2.0 * s / (w0 * one_ms2 ** 2)
        curv = -(2.0 / w0 ** 2) * (1.0 + 3.0 * s * s) / one_ms2 ** 3
        return np.where(inside, val * (slope * slope + curv), 0.0)

    return f, df, d2f


def _cinf_step(x):
    """The standard C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    pos = x > 0.0
    xs = np.where(pos, x, 1.0)
    xc = np.where(x < 1.0, 1.0 - x, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        b = np.where(pos, np.exp(-1.0 / xs), 0.0)
        bc = np.where(x < 1.0, np.exp(-1.0 / xc), 0.0)
    return b / (b + bc)


def _cinf_step_d(x):
    """Derivative of the C-infinity step."""
    x = np.asarray(x, dtype=float)
    pos = x > 0.0
    xs = np.where(pos, x, 1.0)
    xc = np.where(x < 1.0, 1.0 - x, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        b = np.where(pos, np.exp(-1.0 / xs), 0.0)
        bc = np.where(x < 1.0, np.exp(-1.0 / xc), 0.0)
    bp = b / xs ** 2
    bcp = bc / xc ** 2
    return (bp * bc + b * bcp) / (b + bc) ** 2


def _nl_base(w0, eta):
    """A mollified-tent bump: |f'| ramps smoothly from 0 up to a plateau of
    height 1 and back down within [0, w0], so the slope spends most of its
    support at its maximum.  (A plain scaled bump cannot produce the
    required shortening int (1 - sqrt(1 - f'^2)) dt = 1/2 while keeping
    ||f'||_inf < 1, which is why the nonlinear profile uses this shape.)"""

    def plateau(u):
        return _cinf_step(u / eta) * _cinf_step((w0 - u) / eta)

    def plateau_d(u):
        return (_cinf_step_d(u / eta) * _cinf_step((w0 - u) / eta)
                - _cinf_step(u / eta) * _cinf_step_d((w0 - u) / eta)) / eta

    u_grid = np.linspace(0.0, w0, 4097)
    phi_grid = plateau(u_grid)
    ramp = cumulative_simpson(phi_grid, x=u_grid, initial=0.0)
    ramp_spline = CubicHermiteSpline(u_grid, ramp, phi_grid)
    ramp_total = float(ramp[-1])

    def f(t):
        u = np.abs(np.asarray(t, dtype=float))
        inside = u < w0
        val = ramp_total - ramp_spline(np.minimum(u, w0))
        return np.where(inside, val, 0.0)

    def df(t):
        t = np.asarray(t, dtype=float)
        return -np.sign(t) * plateau(np.abs(t))

    def d2f(t):
        t = np.asarray(t, dtype=float)
        return -plateau_d(np.abs(t))

    return f, df, d2f


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class ProfileFunction:
    """A non-negative, one-periodic, compactly supported bump profile with
    the slope normalization of its variant solved in the amplitude."""

    variant: str
    half_width: float
    amplitude: float
    df_linf: float
    _f: object = field(repr=False)
    _df: object = field(repr=False)
    _d2f: object = field(repr=False)

    def f(self, t):
        """Profile value (one-periodic extension)."""
        return self._f(_frac(t))

    def df(self, t):
        """First derivative of the one-periodic extension."""
        return self._df(_frac(t))

    def d2f(self, t):
        """Second derivative of the one-periodic extension."""
        return self._d2f(_frac(t))


@functools.lru_cache(maxsize=None)
def make_profile(variant: str, half_width: float | None = None) -> ProfileFunction:
    """Build a normalized profile: amplitude solved by root bracketing so

    * VKD_PROFILE: ||f'||_{L^2(one period)} = 1 with ||f'||_inf <= 2;
    * NL_PROFILE: int sqrt(1 - f'^2) dt = 1/2 over one period with
      ||f'||_inf < 1.
    """
    if variant not in (VKD_PROFILE, NL_PROFILE):
        raise PreconditionError(f"unknown profile variant {variant!r}")
    if half_width is None:
        half_width = VKD_HALF_WIDTH if variant == VKD_PROFILE else NL_HALF_WIDTH
    if not (0.1 < half_width < 0.49):
        raise PreconditionError(
            f"profile half_width must lie in (0.1, 0.49), got {half_width}")

    t = _period_grid()
    if variant == VKD_PROFILE:
        f0, df0, d2f0 = _vkd_base(half_width)
        d = df0(t)
        mean_sq = float(np.mean(d * d))
        amp = float(brentq(lambda a: a * a * mean_sq - 1.0,
                           1e-8, 1e8, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        df_linf = amp * float(np.max(np.abs(d)))
        if df_linf > 2.0 + 1e-10:
            raise PreconditionError(
                f"profile infeasible at half_width={half_width}: "
                f"normalized slope {df_linf:.4f} > 2; widen the bump")
    else:
        f0, df0, d2f0 = _nl_base(half_width, half_width / 4.0)
        d = df0(t)
        d_max = float(np.max(np.abs(d)))

        def deficit(a):
            return float(np.mean(1.0 - np.sqrt(
                np.maximum(1.0 - (a * d) ** 2, 0.0)))) - 0.5

        a_hi = (1.0 - 1e-9) / d_max
        if deficit(a_hi) <= 0.0:
            raise PreconditionError(
                f"profile infeasible at half_width={half_width}: maximal "
                f"shortening {deficit(a_hi) + 0.5:.4f} < 1/2; widen the bump")
        amp = float(brentq(deficit, 0.0, a_hi,
                           xtol=1e-15, rtol=4 * np.finfo(float).eps))
        df_linf = amp * d_max
        if df_linf >= 1.0:
            raise PreconditionError(
                f"profile infeasible: normalized slope {df_linf:.6f} >= 1")

    scale = lambda g: (lambda s, _g=g, _a=amp: _a * _g(s))
    return ProfileFunction(variant, half_width, amp, df_linf,
                           scale(f0), scale(df0), scale(d2f0))


def rescale_profile(p: ProfileFunction, delta: float, n: int, t,
                    order: int = 0):
    """Evaluate f_{delta,n} (or its derivative of the given order) at t.

    f_{delta,n} packs n bumps of f, compressed by n/delta, into the window
    { frac(t) in [-delta/2, delta/2] } of each unit period; the amplitude
    prefactor is sqrt(delta)/n for the linear-model profile and delta/n for
    the nonlinear one.  For even n the compressed profile is sampled half a
    period off-center so that no bump straddles the window edge and the
    result is smooth.
    """
    if not (0.0 < delta <= 1.0):
        raise PreconditionError(f"delta must lie in (0, 1], got {delta}")
    if n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n}")
    if order not in (0, 1, 2):
        raise PreconditionError(f"order must be in {{0, 1, 2}}, got {order}")
    frac = _frac(t)
    inside = np.abs(frac) <= 0.5 * delta
    shift = 0.5 if n % 2 == 0 else 0.0
    arg = (n / delta) * frac + shift
    amp = (math.sqrt(delta) if p.variant == VKD_PROFILE else delta) / n
    amp *= (n / delta) ** order
    evaluator = (p.f, p.df, p.d2f)[order]
    return np.where(inside, amp * evaluator(arg), 0.0)


# ---------------------------------------------------------------------------
# the shortening map S_f of the nonlinear construction


@dataclass(frozen=True)
class SProfile:
    """Tabulated monotone map S_f(b) = int_{-1/2}^{1/2} (1 - sqrt(1 -
    (b f')^2)) dt on b in [0, 1], with S_f(0) = 0 and S_f(1) = 1/2, plus
    its inverse."""

    profile: ProfileFunction
    _fwd: object = field(repr=False)
    _inv: object = field(repr=False)

    def value(self, b):
        return float(self._fwd(b))

    def inverse(self, y):
        return float(self._inv(y))


@functools.lru_cache(maxsize=None)
def s_profile(half_width: float | None = None) -> SProfile:
    """The shortening map of the nonlinear profile at the given half-width."""
    prof = make_profile(NL_PROFILE, half_width)
    d = prof.df(_period_grid(1 << 14))
    b = np.linspace(0.0, 1.0, 8193)
    vals = np.array([
        np.mean(1.0 - np.sqrt(np.maximum(1.0 - (bi * d) ** 2, 0.0)))
        for bi in b])
    fwd = PchipInterpolator(b, vals)
    inv = PchipInterpolator(vals, b)
    return SProfile(prof, fwd, inv)


# ---------------------------------------------------------------------------
# pattern parameters and regime selection


@dataclass(frozen=True)
class PatternParams:
    """Wrinkle count n, wrap count k (1 for axisymmetric patterns), volume
    fraction delta, and the regime tag that produced them."""

    n: int
    k: int
    delta: float
    regime: str

    def __post_init__(self):
        if self.regime not in ALL_REGIMES:
            raise PreconditionError(f"unknown regime tag {self.regime!r}")
        if self.n < 1 or self.k < 1:
            raise PreconditionError(
                f"n and k must be positive integers, got n={self.n}, k={self.k}")
        if not (0.0 < self.delta <= 1.0):
            raise PreconditionError(
                f"delta must lie in (0, 1], got {self.delta}")


def m1_bound(lam: float, delta: float) -> float:
    """Slope bound of the axisymmetric linear-model construction."""
    return 2.0 * max(math.sqrt(2.0 * lam / delta), 2.0 * lam / delta)


def m2_bound(lam: float, delta: float, n: int, k: int) -> float:
    """Slope bound of the tilted free-shear construction."""
    return 2.0 * max(math.sqrt(2.0 * lam / delta), 2.0 * lam / delta,
                     2.0 * lam / (math.pi * k * delta)
                     + 2.0 * math.pi * math.sqrt(2.0 * lam * delta) / n)


def vkd_pattern_bound(mp: ModelParams, pp: PatternParams) -> float:
    """Three-term excess-energy bound of the axisymmetric VKD pattern
    (up to a universal constant)."""
    n, delta = pp.n, pp.delta
    a = mp.rho - 1.0
    return max(a * math.sqrt(mp.lam) * delta ** 1.5 / n,
               mp.lam * delta ** 2 / n ** 2,
               mp.h ** 2 * mp.lam * n ** 2 / delta ** 2)


def nl_pattern_bound(mp: ModelParams, pp: PatternParams) -> float:
    """Three-term excess-energy bound of the axisymmetric NL pattern."""
    n, delta = pp.n, pp.delta
    a = max(mp.rho ** 2 - 1.0, mp.h ** 2)
    return max(a * math.sqrt(mp.lam) * delta ** 1.5 / n,
               mp.lam * delta ** 2 / n ** 2,
               mp.h ** 2 * mp.lam * n ** 2 / delta ** 2)


def fs_pattern_bound(mp: ModelParams, pp: PatternParams) -> float:
    """Three-term free-shear energy bound of the tilted pattern."""
    n, k, delta = pp.n, pp.k, pp.delta
    return max(mp.lam * delta ** 3 / (k * n) ** 2,
               mp.lam ** 2 / k ** 4,
               mp.h ** 2 * mp.lam * (k * n) ** 2 / delta ** 2)


def vkd_branch_values(mp: ModelParams) -> dict:
    """The competing excess scales of the three axisymmetric VKD branches
    (with their slope-bound dependence, as used for regime dispatch)."""
    a = mp.rho - 1.0
    many = (mp.m ** (-1.0 / 3.0) if mp.slope_bounded else 0.0) \
        * a ** (2.0 / 3.0) * mp.lam * mp.h ** (2.0 / 3.0)
    one = mp.h ** (6.0 / 7.0) * mp.lam ** (5.0 / 7.0) * a ** (4.0 / 7.0)
    flat = mp.lam * mp.h
    return {MANY: many, ONE: one, FLAT: flat}


def nl_branch_values(mp: ModelParams) -> dict:
    """NL analog of vkd_branch_values, with rho - 1 replaced by
    (rho^2 - 1) v h^2 and the construction's intrinsic slope bound 1."""
    a = max(mp.rho ** 2 - 1.0, mp.h ** 2)
    many = a ** (2.0 / 3.0) * mp.lam * mp.h ** (2.0 / 3.0)
    one = mp.h ** (6.0 / 7.0) * mp.lam ** (5.0 / 7.0) * a ** (4.0 / 7.0)
    flat = mp.lam * mp.h
    return {MANY: many, ONE: one, FLAT: flat}


def fs_branch_values(mp: ModelParams) -> dict:
    """The competing free-shear energy scales of the tilted constructions."""
    many = (mp.m ** (-0.5) if mp.slope_bounded else 0.0) \
        * mp.h * mp.lam ** 1.5
    few_long = (mp.h * mp.lam) ** (12.0 / 11.0)
    few = mp.h ** 1.2 * mp.lam
    return {FS_MANY_TILTED: many, FS_FEW_TILTED_LONG: few_long,
            FS_FEW_TILTED: few}


def _integer_in(lo: float, hi: float, what: str) -> int:
    n = max(1, math.ceil(lo - 1e-12))
    if n > hi * (1.0 + 1e-12):
        raise PreconditionError(
            f"no admissible integer {what} in [{lo:.6g}, {hi:.6g}]; "
            f"the regime hypothesis fails at these parameters")
    return n


def _check_delta(delta: float, branch: str, floor: float = 0.0) -> float:
    if not (floor <= delta <= 1.0):
        raise PreconditionError(
            f"branch {branch}: delta = {delta:.6g} outside "
            f"[{floor:.6g}, 1]; the regime hypothesis fails at these "
            f"parameters")
    return delta


def select_regime_params(model: str, mp: ModelParams) -> PatternParams:
    """Pick the construction parameters (n, k, delta) of the energetically
    dominant regime at mp, following the upper-bound recipes verbatim.

    The regime whose predicted excess scale is largest is the one whose
    hypothesis holds; UNBUCKLED is returned when lambda^2 is below every
    wrinkling scale (no construction beats the relaxed state).  Integer
    parameters are the smallest admissible integers in their intervals.
    """
    if model == VKD:
        vals = vkd_branch_values(mp)
    elif model == NL:
        if mp.slope_bounded and mp.m < 1.0:
            raise PreconditionError(
                f"NL constructions have slope 1; m = {mp.m} < 1 is "
                f"not attainable by them")
        vals = nl_branch_values(mp)
    elif model == "FS":
        vals = fs_branch_values(mp)
    else:
        raise PreconditionError(f"unknown model tag {model!r}")

    if mp.lam ** 2 <= max(vals.values()):
        # even the best wrinkling construction costs at least lambda^2
        return PatternParams(1, 1, 1.0, UNBUCKLED)
    branch = max(vals, key=lambda key: vals[key])
    return regime_params(model, branch, mp)


def regime_params(model: str, branch: str, mp: ModelParams) -> PatternParams:
    """Construction parameters of one named regime at mp (whether or not
    that regime is the energetically dominant one there)."""
    if branch == UNBUCKLED:
        return PatternParams(1, 1, 1.0, UNBUCKLED)
    if model == VKD and branch not in AXISYMMETRIC_REGIMES \
            or model == NL and branch not in AXISYMMETRIC_REGIMES \
            or model == "FS" and branch not in TILTED_REGIMES:
        raise PreconditionError(
            f"regime {branch!r} does not belong to model {model!r}")

    h, lam = mp.h, mp.lam
    if model == VKD:
        a = mp.rho - 1.0
        if branch == MANY:
            lo = a ** (1.0 / 3.0) * lam * h ** (-2.0 / 3.0) * mp.m ** (-7.0 / 6.0)
            n = _integer_in(lo, 2.0 * lo, "wrinkle count n")
            delta = _check_delta(4.0 * lam / mp.m, branch)
        elif branch == ONE:
            n = 1
            delta = _check_delta(
                4.0 * lam ** (1.0 / 7.0) * a ** (-2.0 / 7.0) * h ** (4.0 / 7.0),
                branch)
        else:  # FLAT
            if lam <= mp.m * math.sqrt(h):
                n = 1
                delta = _check_delta(4.0 * math.sqrt(h), branch)
            else:
                lo = lam * h ** (-0.5) / mp.m
                n = _integer_in(lo, 2.0 * lo, "wrinkle count n")
                delta = _check_delta(4.0 * lam / mp.m, branch)
        return PatternParams(n, 1, delta, branch)

    if model == NL:
        a = max(mp.rho ** 2 - 1.0, h ** 2)
        if branch == MANY:
            lo = a ** (1.0 / 3.0) * lam * h ** (-2.0 / 3.0)
            n = _integer_in(lo, 2.0 * lo, "wrinkle count n")
            delta = _check_delta(2.0 * lam, branch)
        elif branch == ONE:
            n = 1
            delta = _check_delta(
                2.0 * lam ** (1.0 / 7.0) * a ** (-2.0 / 7.0) * h ** (4.0 / 7.0),
                branch, floor=2.0 * lam)
        else:  # FLAT
            if lam <= math.sqrt(h):
                n = 1
                delta = _check_delta(2.0 * math.sqrt(h), branch,
                                     floor=2.0 * lam)
            else:
                lo = lam * h ** (-0.5)
                n = _integer_in(lo, 2.0 * lo, "wrinkle count n")
                delta = _check_delta(2.0 * lam, branch)
        return PatternParams(n, 1, delta, branch)

    # FS
    if branch == FS_MANY_TILTED:
        n_scale = lam ** (9.0 / 8.0) * h ** (-0.25) * mp.m ** (-11.0 / 8.0)
        k_scale = h ** (-0.25) * lam ** 0.125 * mp.m ** 0.125
        n = _integer_in(7.0 * n_scale, 8.0 * n_scale, "wrinkle count n")
        k = _integer_in(7.0 * k_scale, 8.0 * k_scale, "wrap count k")
        delta = _check_delta(4.0 * lam / mp.m, branch)
    elif branch == FS_FEW_TILTED_LONG:
        n = 12
        k_scale = h ** (-3.0 / 11.0) * lam ** (5.0 / 22.0)
        k = _integer_in(12.0 * k_scale, 13.0 * k_scale, "wrap count k")
        delta = _check_delta(4.0 * (h * lam) ** (2.0 / 11.0), branch)
    else:  # FS_FEW_TILTED
        n, k = 2, 2
        delta = _check_delta(4.0 * h ** 0.4, branch)
    return PatternParams(n, k, delta, branch)


def suggested_domain(pp: PatternParams, min_n_theta: int = 8,
                     min_n_z: int = 64, oversample: float = 1.0) -> Domain:
    """A grid meeting the resolution policy for the given pattern.

    oversample multiplies the per-bump sample counts beyond the baseline
    policy.  The construction identities hold only up to the spectral
    tail of the squared slope (its Nyquist mode has no antiderivative on
    the grid), so quantitative scaling studies of axisymmetric patterns
    should oversample until that tail is below the error of interest.
    """
    if pp.regime == UNBUCKLED:
        return Domain(max(min_n_theta, 8), max(min_n_z, 8))
    n_z = max(min_n_z, math.ceil(oversample * required_n_z(pp.n, pp.k,
                                                           pp.delta)))
    n_z += n_z % 2
    if pp.regime in TILTED_REGIMES:
        n_theta = max(min_n_theta,
                      math.ceil(oversample * 32 * pp.n / pp.delta))
        n_theta += n_theta % 2
    else:
        n_theta = max(min_n_theta, 8)
    return Domain(n_theta, n_z)


# ---------------------------------------------------------------------------
# spectral helpers for the compensating displacements


def _axis_antiderivative(vals: np.ndarray, axis: int, extent: float) -> np.ndarray:
    """The zero-mean spectral antiderivative along one periodic axis (mean
    and Nyquist modes dropped, matching the derivative convention)."""
    n = vals.shape[axis]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    mult = np.zeros(k.size, dtype=complex)
    mult[1:-1] = 1.0 / (1j * 2.0 * np.pi * k[1:-1] / extent)
    shape = [1] * vals.ndim
    shape[axis] = k.size
    spec = np.fft.rfft(vals, axis=axis) * mult.reshape(shape)
    return np.fft.irfft(spec, n=n, axis=axis)


def _dz_1d(vals: np.ndarray) -> np.ndarray:
    return derivative_values(vals[np.newaxis, :], 0, 1)[0]


def _broadcast(dom: Domain, profile_z: np.ndarray) -> np.ndarray:
    return np.broadcast_to(profile_z, (dom.n_theta, dom.n_z))


# ---------------------------------------------------------------------------
# pattern builders


def build_vkd_pattern(mp: ModelParams, pp: PatternParams,
                      dom: Domain) -> Configuration:
    """Axisymmetric wrinkling displacement for the linear model:
    phi = (w + rho - 1, 0, -lambda z + u) with w = sqrt(2 lambda)
    f_{delta,n}(z) and u chosen so eps_zz == 0 on the grid."""
    if pp.regime == UNBUCKLED:
        return unbuckled_configuration(mp, dom, VKD)
    if pp.regime not in AXISYMMETRIC_REGIMES:
        raise PreconditionError(
            f"build_vkd_pattern expects an axisymmetric regime, "
            f"got {pp.regime}")
    check_resolution(dom, pp.n, 1, pp.delta)
    prof = make_profile(VKD_PROFILE)
    w = math.sqrt(2.0 * mp.lam) * rescale_profile(
        prof, pp.delta, pp.n, dom.z_nodes())
    dw = _dz_1d(w)
    mean_comp = float(np.mean(0.5 * dw * dw))
    if mean_comp <= 0.0:
        raise NumericalError("degenerate pattern: zero axial compression")
    alpha = math.sqrt(mp.lam / mean_comp)
    w = alpha * w
    dw = alpha * dw
    axial = _axis_antiderivative((mp.lam - 0.5 * dw * dw)[np.newaxis, :],
                                 axis=1, extent=Z_EXTENT)[0]
    zero = GridField.constant(dom, 0.0)
    return Configuration(
        VKD,
        GridField(dom, _broadcast(dom, w + (mp.rho - 1.0))),
        zero,
        GridField(dom, _broadcast(dom, axial)),
        mp)


def build_nl_pattern(mp: ModelParams, pp: PatternParams,
                     dom: Domain) -> Configuration:
    """Axisymmetric wrinkling deformation for the nonlinear model:
    Phi = (w + rho, theta, (1 - lambda) z + u) with w a rescaled nonlinear
    bump whose amplitude is solved so the per-slice axial length
    int sqrt(1 - (dz w)^2) dz equals 1 - lambda on the grid, making
    g_zz == 1 and g_tz == 0 identically."""
    if pp.regime == UNBUCKLED:
        return unbuckled_configuration(mp, dom, NL)
    if pp.regime not in AXISYMMETRIC_REGIMES:
        raise PreconditionError(
            f"build_nl_pattern expects an axisymmetric regime, "
            f"got {pp.regime}")
    if pp.delta < 2.0 * mp.lam * (1.0 - 1e-12):
        raise PreconditionError(
            f"delta = {pp.delta:.6g} < 2*lambda = {2 * mp.lam:.6g}: the "
            f"shortening map cannot reach the prescribed confinement")
    check_resolution(dom, pp.n, 1, pp.delta)
    prof = make_profile(NL_PROFILE)
    base = rescale_profile(prof, pp.delta, pp.n, dom.z_nodes())
    dbase = _dz_1d(base)
    d_max = float(np.max(np.abs(dbase)))
    if d_max <= 0.0:
        raise NumericalError("degenerate pattern: flat profile")

    def length_error(b):
        return float(np.mean(np.sqrt(
            np.maximum(1.0 - (b * dbase) ** 2, 0.0)))) - (1.0 - mp.lam)

    b_hi = (1.0 - 1e-12) / d_max
    if length_error(b_hi) > 0.0:
        raise NumericalError(
            f"cannot reach axial shortening lambda = {mp.lam:.6g} with "
            f"delta = {pp.delta:.6g} (slope would exceed 1)")
    b = brentq(length_error, 0.0, b_hi,
               xtol=1e-15, rtol=4 * np.finfo(float).eps)
    w = b * base
    dw = b * dbase
    axial_rate = np.sqrt(1.0 - dw * dw)
    axial = _axis_antiderivative(
        (axial_rate - (1.0 - mp.lam))[np.newaxis, :], axis=1,
        extent=Z_EXTENT)[0]
    zero = GridField.constant(dom, 0.0)
    return Configuration(
        NL,
        GridField(dom, _broadcast(dom, w + mp.rho)),
        zero,
        GridField(dom, _broadcast(dom, axial)),
        mp)


def build_fs_pattern(mp: ModelParams, pp: PatternParams,
                     dom: Domain) -> Configuration:
    """Tilted wrinkling displacement for the free-shear functional:
    w(theta, z) = (sqrt(2 lambda)/k) f_{delta,n}(theta/2pi + k z), with the
    axial compensation u_z making eps_zz == 0 per theta-column and the hoop
    compensation u_theta making eps_tt equal to its theta-average."""
    if pp.regime == UNBUCKLED:
        return unbuckled_configuration(mp, dom, VKD)
    check_resolution(dom, pp.n, pp.k, pp.delta, theta_varying=True)
    prof = make_profile(VKD_PROFILE)
    theta, z = dom.mesh()
    t = theta / THETA_EXTENT + pp.k * z
    w = (math.sqrt(2.0 * mp.lam) / pp.k) * rescale_profile(
        prof, pp.delta, pp.n, t)
    dzw = derivative_values(w, 0, 1)
    col_comp = np.mean(0.5 * dzw * dzw, axis=1)
    if np.any(col_comp <= 0.0):
        raise NumericalError("degenerate pattern: a theta-column carries "
                             "no axial compression")
    alpha = np.sqrt(mp.lam / col_comp)[:, np.newaxis]
    w = alpha * w
    dzw = alpha * dzw
    # axial compensation, normalized to vanish at z = -1/2
    u_z = _axis_antiderivative(mp.lam - 0.5 * dzw * dzw, axis=1,
                               extent=Z_EXTENT)
    u_z = u_z - u_z[:, :1]
    # hoop compensation, normalized to vanish at theta = 0
    dtw = derivative_values(w, 1, 0)
    hoop_density = 0.5 * dtw * dtw + w
    u_t = _axis_antiderivative(
        np.mean(hoop_density, axis=0)[np.newaxis, :] - hoop_density,
        axis=0, extent=THETA_EXTENT)
    u_t = u_t - u_t[:1, :]
    return Configuration(
        VKD,
        GridField(dom, w + (mp.rho - 1.0)),
        GridField(dom, u_t),
        GridField(dom, u_z),
        mp)
