"""Closed-form scaling predictions for the minimal excess energy.

Predictions are prefactor-free (the theory determines exponents, not
constants): comparisons against measured energies belong in log-log slope
space.  Branch selection recomputes the min/max comparisons that define
the scaling laws; when a scaling law's hypothesis fails at the given
parameters the prediction is still returned, flagged unguaranteed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .energy import NL, VKD
from .errors import PreconditionError
from .grid import ModelParams
from .patterns import FLAT, MANY, ONE, UNBUCKLED

FS = "FS"

#: Branch tags of the free-shear scaling law.
FS_12_11 = "FS_12_11"
FS_3_2 = "FS_3_2"

#: Model tags for slope blow-up rates.
VKD_LARGE = "VKD_LARGE"


@dataclass(frozen=True)
class ScalingPrediction:
    """A predicted excess-energy scale and the comparisons that chose it."""

    model: str
    branch: str
    value: float
    hypothesis_ok: bool
    active_inequalities: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "branch": self.branch,
            "value": self.value,
            "hypothesis_ok": self.hypothesis_ok,
            "active_inequalities": list(self.active_inequalities),
        }


def c0(lam: float, h: float, m: float) -> float:
    """The mandrel-radius threshold min{lambda^(1/2) h^(1/4),
    m^(1/2) h^(1/2)} above which rho - 1 places the problem in the
    matched-bounds (wrinkling) regime."""
    slope_term = math.inf if math.isinf(m) else math.sqrt(m * h)
    return min(math.sqrt(lam) * h ** 0.25, slope_term)


def _pick(lam: float, scales: dict, notes: list) -> tuple[str, float]:
    """min{lambda^2, max(scales)} with the branch that attains it."""
    wrinkle_branch = max(scales, key=lambda key: scales[key])
    wrinkle = scales[wrinkle_branch]
    for name, val in scales.items():
        notes.append(f"{name} = {val:.6g}")
    if lam ** 2 <= wrinkle:
        notes.append(f"lambda^2 = {lam ** 2:.6g} <= {wrinkle:.6g}: unbuckled")
        return UNBUCKLED, lam ** 2
    notes.append(f"lambda^2 = {lam ** 2:.6g} > {wrinkle:.6g}: wrinkling")
    return wrinkle_branch, wrinkle


def predict(model: str, mp: ModelParams) -> ScalingPrediction:
    """The predicted excess-energy scale of the minimizer at mp.

    VKD/NL use the large-mandrel scaling laws (with rho - 1 replaced by
    (rho^2 - 1) v h^2 in the NL case); their hypothesis rho - 1 >= c0 is
    evaluated and reported, and below the threshold the returned value is
    the uniform-in-mandrel scale lambda h (an upper bound only, flagged
    unguaranteed).  FS uses the free-shear scaling law, which holds for
    all parameters; an infinite slope bound drops the h lambda^(3/2)
    branch there and the MANY branch in the VKD case.
    """
    h, lam = mp.h, mp.lam
    notes: list[str] = []
    if model == VKD:
        a = mp.rho - 1.0
        threshold = c0(lam, h, mp.m)
        hyp_ok = a >= threshold
        notes.append(f"rho - 1 = {a:.6g} vs c0 = {threshold:.6g}")
        if not hyp_ok:
            branch, value = _pick(lam, {FLAT: lam * h}, notes)
            return ScalingPrediction(model, branch, value, False, tuple(notes))
        scales = {ONE: a ** (4.0 / 7.0) * h ** (6.0 / 7.0) * lam ** (5.0 / 7.0)}
        if mp.slope_bounded:
            scales[MANY] = a ** (2.0 / 3.0) * h ** (2.0 / 3.0) * lam
        else:
            notes.append("m = inf: MANY branch dropped")
        branch, value = _pick(lam, scales, notes)
        return ScalingPrediction(model, branch, value, True, tuple(notes))
    if model == NL:
        a = max(mp.rho ** 2 - 1.0, h ** 2)
        threshold = c0(lam, h, 1.0)
        hyp_ok = a >= threshold
        notes.append(f"(rho^2-1) v h^2 = {a:.6g} vs c0 = {threshold:.6g}")
        if not hyp_ok:
            branch, value = _pick(lam, {FLAT: lam * h}, notes)
            return ScalingPrediction(model, branch, value, False, tuple(notes))
        scales = {
            MANY: a ** (2.0 / 3.0) * h ** (2.0 / 3.0) * lam,
            ONE: a ** (4.0 / 7.0) * h ** (6.0 / 7.0) * lam ** (5.0 / 7.0),
        }
        branch, value = _pick(lam, scales, notes)
        return ScalingPrediction(model, branch, value, True, tuple(notes))
    if model == FS:
        scales = {FS_12_11: (h * lam) ** (12.0 / 11.0)}
        if mp.slope_bounded:
            scales[FS_3_2] = h * lam ** 1.5
        else:
            notes.append("m = inf: h lambda^(3/2) branch dropped")
        branch, value = _pick(lam, scales, notes)
        return ScalingPrediction(model, branch, value, True, tuple(notes))
    raise PreconditionError(f"unknown model tag {model!r}")


def blowup_rate(model: str, mp: ModelParams) -> float:
    """Predicted lower-bound rate for the slope sup-norm of minimizers as
    h -> 0: (rho-1)^(1/7) h^(-2/7) lambda^(3/7) in the large-mandrel VKD
    case and h^(-1/11) lambda^(9/22) for the free-shear functional."""
    if model == VKD_LARGE:
        return (mp.rho - 1.0) ** (1.0 / 7.0) * mp.h ** (-2.0 / 7.0) \
            * mp.lam ** (3.0 / 7.0)
    if model == FS:
        return mp.h ** (-1.0 / 11.0) * mp.lam ** (9.0 / 22.0)
    raise PreconditionError(
        f"blowup_rate expects VKD_LARGE or FS, got {model!r}")


@dataclass(frozen=True)
class BoundaryReport:
    """Both sides of a regime-boundary equivalence, for consistency checks."""

    description: str
    lhs: bool
    rhs: bool

    @property
    def agree(self) -> bool:
        return self.lhs == self.rhs


def regime_boundary(model: str, mp: ModelParams) -> BoundaryReport:
    """The algebraic equivalence behind the wrinkling threshold:
    lambda h <= max{wrinkling scales} if and only if c0 <= the effective
    mandrel excess (rho - 1, or its NL analog with m = 1)."""
    h, lam = mp.h, mp.lam
    if model == VKD:
        a = mp.rho - 1.0
        m_factor = 0.0 if not mp.slope_bounded else mp.m ** (-1.0 / 3.0)
        many = m_factor * a ** (2.0 / 3.0) * lam * h ** (2.0 / 3.0)
        one = a ** (4.0 / 7.0) * h ** (6.0 / 7.0) * lam ** (5.0 / 7.0)
        lhs = lam * h <= max(many, one)
        rhs = c0(lam, h, mp.m) <= a
        return BoundaryReport(
            "lambda h <= max{m^(-1/3)(rho-1)^(2/3) lambda h^(2/3), "
            "(rho-1)^(4/7) h^(6/7) lambda^(5/7)}  <=>  c0(lambda,h,m) <= rho-1",
            lhs, rhs)
    if model == NL:
        a = max(mp.rho ** 2 - 1.0, h ** 2)
        many = a ** (2.0 / 3.0) * lam * h ** (2.0 / 3.0)
        one = a ** (4.0 / 7.0) * h ** (6.0 / 7.0) * lam ** (5.0 / 7.0)
        lhs = lam * h <= max(many, one)
        rhs = c0(lam, h, 1.0) <= a
        return BoundaryReport(
            "lambda h <= max{a^(2/3) lambda h^(2/3), a^(4/7) h^(6/7) "
            "lambda^(5/7)}  <=>  c0(lambda,h,1) <= a,  a = (rho^2-1) v h^2",
            lhs, rhs)
    raise PreconditionError(
        f"regime_boundary expects VKD or NL, got {model!r}")


def neutral_bounds(model: str, mp: ModelParams) -> dict:
    """Lower and upper excess scales for the neutral mandrel (rho = 1).

    Below h = lambda^(5/6) the two do not match for the full VKD/NL
    energies, so they are reported separately rather than as one truth;
    the lower scale is the free-shear one, the upper the flat axisymmetric
    construction's lambda h (both capped at lambda^2).
    """
    if model not in (VKD, NL):
        raise PreconditionError(
            f"neutral_bounds expects VKD or NL, got {model!r}")
    h, lam = mp.h, mp.lam
    fs_scales = [(h * lam) ** (12.0 / 11.0)]
    if mp.slope_bounded:
        factor = mp.m ** (-1.0) if model == NL else 1.0
        fs_scales.append(factor * h * lam ** 1.5)
    lower = min(lam ** 2, max(fs_scales))
    upper = min(lam ** 2, lam * h)
    return {"lower": lower, "upper": upper, "matched": h >= lam ** (5.0 / 6.0)}
