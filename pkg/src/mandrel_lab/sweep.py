"""Parameter sweeps and log-log exponent fits.

A sweep varies one model parameter over a log-spaced grid, builds (or
minimizes to) a configuration at each point with a grid resolution chosen
from the predicted wrinkle geometry, and records excess energy, slope,
oracle prediction, and certificate status per point.  Rows come back in
deterministic point order with failures recorded in place, so a fit over
the surviving points is reproducible bit-for-bit from (spec, seed).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .certificates import certificates_for
from .energy import NL, VKD, Configuration, energy_report
from .errors import (LabError, NumericalError, PreconditionError,
                     ResolutionError)
from .grid import Domain, ModelParams
from .minimize import FS, MinimizeOptions
from .minimize import minimize as run_minimize
from .oracle import predict
from .patterns import (build_fs_pattern, build_nl_pattern, build_vkd_pattern,
                       select_regime_params, suggested_domain)

CONSTRUCT = "CONSTRUCT"
MINIMIZE = "MINIMIZE"

#: Refuse sweep points whose resolved grid would exceed this many nodes
#: (fine wrinkling at extreme parameters can demand absurd grids).
MAX_GRID_POINTS = 1 << 25

#: Parameter names a sweep may vary.
VARYING_NAMES = ("h", "lambda", "rho_minus_1", "m")


@dataclass(frozen=True)
class SweepSpec:
    """One parameter sweep: which knob varies, over what grid, and how
    each point is turned into a configuration."""

    model: str
    varying: str
    count: int
    lo: float
    hi: float
    fixed: ModelParams
    mode: str = CONSTRUCT
    seed: int = 0
    min_n_theta: int = 8
    min_n_z: int = 64
    oversample: float = 1.0
    minimize_options: MinimizeOptions = field(default_factory=MinimizeOptions)

    def __post_init__(self):
        if self.model not in (VKD, NL, FS):
            raise PreconditionError(f"unknown model tag {self.model!r}")
        if self.varying not in VARYING_NAMES:
            raise PreconditionError(
                f"varying must be one of {VARYING_NAMES}, got {self.varying!r}")
        if self.mode not in (CONSTRUCT, MINIMIZE):
            raise PreconditionError(f"unknown sweep mode {self.mode!r}")
        if self.count < 4:
            raise PreconditionError("sweep needs at least 4 points to fit")
        if not (0.0 < self.lo < self.hi):
            raise PreconditionError("sweep grid needs 0 < lo < hi")

    def grid(self) -> np.ndarray:
        return np.geomspace(self.lo, self.hi, self.count)

    def params_at(self, value: float) -> ModelParams:
        if self.varying == "h":
            return replace(self.fixed, h=value)
        if self.varying == "lambda":
            return replace(self.fixed, lam=value)
        if self.varying == "rho_minus_1":
            return replace(self.fixed, rho=1.0 + value)
        return replace(self.fixed, m=value)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point.  On failure only index/value/params and the error
    cause are populated."""

    index: int
    value: float
    h: float
    lam: float
    rho: float
    m: float
    regime: str | None = None
    n: int | None = None
    k: int | None = None
    delta: float | None = None
    n_theta: int | None = None
    n_z: int | None = None
    excess: float | None = None
    slope_linf: float | None = None
    oracle_branch: str | None = None
    oracle_value: float | None = None
    certificates_passed: bool | None = None
    converged: bool | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index, "value": self.value, "h": self.h,
            "lambda": self.lam, "rho": self.rho, "m": self.m,
            "regime": self.regime, "n": self.n, "k": self.k,
            "delta": self.delta, "n_theta": self.n_theta, "n_z": self.n_z,
            "excess": self.excess, "slope_linf": self.slope_linf,
            "oracle_branch": self.oracle_branch,
            "oracle_value": self.oracle_value,
            "certificates_passed": self.certificates_passed,
            "converged": self.converged, "error": self.error,
        }


def build_pattern(model: str, mp: ModelParams, pp=None,
                  dom: Domain | None = None) -> Configuration:
    """The test pattern of the selected (or given) regime at mp."""
    if pp is None:
        pp = select_regime_params(model, mp)
    if dom is None:
        dom = suggested_domain(pp)
    if model == NL:
        return build_nl_pattern(mp, pp, dom)
    if model == FS:
        return build_fs_pattern(mp, pp, dom)
    return build_vkd_pattern(mp, pp, dom)


def _evaluate_point(spec: SweepSpec, index: int, value: float) -> SweepRow:
    mp = spec.params_at(value)
    base = SweepRow(index=index, value=value, h=mp.h, lam=mp.lam,
                    rho=mp.rho, m=mp.m)
    pp = select_regime_params(spec.model, mp)
    dom = suggested_domain(pp, min_n_theta=spec.min_n_theta,
                           min_n_z=spec.min_n_z, oversample=spec.oversample)
    if dom.n_theta * dom.n_z > MAX_GRID_POINTS:
        raise ResolutionError(
            f"point {index}: resolved grid {dom.n_theta}x{dom.n_z} exceeds "
            f"{MAX_GRID_POINTS} nodes")
    converged = None
    if spec.mode == CONSTRUCT:
        c = build_pattern(spec.model, mp, pp, dom)
    else:
        opts = replace(spec.minimize_options, seed=spec.seed + index)
        result = run_minimize(spec.model, mp, dom, opts)
        c = result.final
        converged = result.converged
    report = energy_report(c, functional=FS if spec.model == FS else None)
    certs = certificates_for(c)
    pred = predict(spec.model, mp)
    return replace(
        base, regime=pp.regime, n=pp.n, k=pp.k, delta=pp.delta,
        n_theta=dom.n_theta, n_z=dom.n_z, excess=report.excess,
        slope_linf=report.slope_linf, oracle_branch=pred.branch,
        oracle_value=pred.value,
        certificates_passed=all(r.passed for r in certs),
        converged=converged)


def run_sweep(spec: SweepSpec, skip_failures: bool = False,
              threads: int = 1) -> list[SweepRow]:
    """Evaluate every sweep point, in deterministic point order.

    A failing point aborts the sweep unless skip_failures is set, in
    which case its row records the error cause instead of being dropped.
    """
    values = spec.grid()

    def point(index: int) -> SweepRow:
        try:
            return _evaluate_point(spec, index, float(values[index]))
        except LabError as exc:
            if not skip_failures:
                raise
            mp = spec.params_at(float(values[index]))
            return SweepRow(index=index, value=float(values[index]),
                            h=mp.h, lam=mp.lam, rho=mp.rho, m=mp.m,
                            error=f"{type(exc).__name__}: {exc}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, range(spec.count)))
    else:
        rows = [point(i) for i in range(spec.count)]
    return rows


@dataclass(frozen=True)
class FitResult:
    """Least-squares power-law fit of y against x in log-log space."""

    exponent: float
    intercept: float
    r_squared: float
    residual_max: float
    points_used: int

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent, "intercept": self.intercept,
            "r_squared": self.r_squared, "residual_max": self.residual_max,
            "points_used": self.points_used,
        }


def _column(table, name: str) -> list:
    out = []
    for row in table:
        if isinstance(row, dict):
            out.append(row[name])
        else:
            attr = "lam" if name == "lambda" else name
            out.append(getattr(row, attr))
    return out


def fit_exponent(table, x: str, y: str) -> FitResult:
    """Fit log(y) = exponent * log(x) + intercept by least squares.

    Rows with a recorded error or missing values are dropped; at least 4
    strictly positive (x, y) pairs must remain.
    """
    xs, ys = [], []
    for xv, yv in zip(_column(table, x), _column(table, y)):
        if xv is None or yv is None:
            continue
        if not (xv > 0.0 and yv > 0.0):
            raise PreconditionError(
                f"fit_exponent needs positive values, got ({xv}, {yv})")
        xs.append(math.log(xv))
        ys.append(math.log(yv))
    if len(xs) < 4:
        raise PreconditionError(
            f"fit_exponent needs at least 4 usable points, got {len(xs)}")
    lx = np.asarray(xs)
    ly = np.asarray(ys)
    if np.ptp(lx) == 0.0:
        raise NumericalError("fit_exponent: all x values coincide")
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    fitted = design @ coef
    residuals = ly - fitted
    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return FitResult(
        exponent=float(coef[0]), intercept=float(coef[1]), r_squared=r2,
        residual_max=float(np.max(np.abs(residuals))), points_used=len(xs))
