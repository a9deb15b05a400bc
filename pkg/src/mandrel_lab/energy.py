"""The three elastic energy functionals and their admissibility checks.

Models:

* VKD — geometrically linear (von Karman–Donnell type) energy of a
  displacement phi = (phi_rho, phi_theta, phi_z) with strain
  eps = e(phi_theta, phi_z) + 1/2 Dphi_rho (x) Dphi_rho + phi_rho e_t(x)e_t,
  energy  E = int |eps|^2 + h^2 |D^2 phi_rho|^2.
* NL — geometrically nonlinear energy of a deformation
  Phi = (Phi_rho, Phi_theta, Phi_z) in cylindrical coordinates,
  E = int |g - id|^2 + h^2 |D^2 Phi|^2 with g = DPhi^T DPhi.
* FS — the free-shear functional: the VKD energy with the shear membrane
  term dropped.

Configurations store only the periodic parts of the components; the affine
parts (-lambda*z for VKD phi_z; theta and (1-lambda)*z for NL) are injected
analytically, so the periodicity and confinement constraints hold by
representation.  Symmetric-matrix norms count the off-diagonal entry twice.

The `*_terms` functions are backend-parametric (numpy or jax.numpy) so the
minimizer can differentiate them; the public entry points return plain
EnergyReports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .grid import (DOMAIN_AREA, Domain, GridField, ModelParams,
                   derivative_values)

ADMISSIBILITY_TOL = 1e-9

VKD = "VKD"
NL = "NL"


@dataclass(frozen=True)
class Configuration:
    """A displacement (VKD) or deformation (NL) given by three periodic
    component fields on a common Domain.

    For VKD, comp_z is the periodic part p of phi_z = -lambda*z + p.
    For NL, comp_theta is the periodic part q of Phi_theta = theta + q and
    comp_z the periodic part r of Phi_z = (1-lambda)*z + r; comp_rho is the
    full radial component (it is periodic on its own).
    """

    model: str
    comp_rho: GridField
    comp_theta: GridField
    comp_z: GridField
    params: ModelParams

    def __post_init__(self):
        if self.model not in (VKD, NL):
            raise PreconditionError(f"unknown model tag {self.model!r}")
        dom = self.comp_rho.domain
        if self.comp_theta.domain != dom or self.comp_z.domain != dom:
            raise PreconditionError("configuration components must share a Domain")

    @property
    def domain(self) -> Domain:
        return self.comp_rho.domain

    def require_model(self, model: str) -> None:
        if self.model != model:
            raise PreconditionError(
                f"operation requires a {model} configuration, got {self.model}")


@dataclass(frozen=True)
class StrainField:
    """VKD strain components (eps_tz stored once; the tensor is symmetric)."""

    eps_tt: GridField
    eps_zz: GridField
    eps_tz: GridField


@dataclass(frozen=True)
class MetricField:
    """Components of the pulled-back metric g = DPhi^T DPhi."""

    g_tt: GridField
    g_zz: GridField
    g_tz: GridField


@dataclass(frozen=True)
class EnergyReport:
    """Component-wise energy breakdown.

    total = membrane_tt + membrane_zz + 2*membrane_tz + bending and
    excess = total - bulk.
    """

    membrane_tt: float
    membrane_zz: float
    membrane_tz: float
    bending: float
    total: float
    bulk: float
    excess: float
    slope_linf: float
    admissible: bool
    violations: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "membrane_tt": self.membrane_tt,
            "membrane_zz": self.membrane_zz,
            "membrane_tz": self.membrane_tz,
            "bending": self.bending,
            "total": self.total,
            "bulk": self.bulk,
            "excess": self.excess,
            "slope_linf": self.slope_linf,
            "admissible": self.admissible,
            "violations": list(self.violations),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


# ---------------------------------------------------------------------------
# backend-parametric cores


def vkd_strain_values(rho_v, theta_v, z_v, xp=np):
    """Strain components from raw periodic-part arrays (affine part of
    phi_z contributes the constant -lambda to eps_zz, added by callers)."""
    dt_rho = derivative_values(rho_v, 1, 0, xp)
    dz_rho = derivative_values(rho_v, 0, 1, xp)
    eps_tt = derivative_values(theta_v, 1, 0, xp) + 0.5 * dt_rho ** 2 + rho_v
    eps_zz = derivative_values(z_v, 0, 1, xp) + 0.5 * dz_rho ** 2
    eps_tz = 0.5 * (derivative_values(z_v, 1, 0, xp)
                    + derivative_values(theta_v, 0, 1, xp)) \
        + 0.5 * dt_rho * dz_rho
    return eps_tt, eps_zz, eps_tz


def bending_density_values(rho_v, xp=np):
    """|D^2 phi_rho|^2 with the off-diagonal counted twice."""
    dtt = derivative_values(rho_v, 2, 0, xp)
    dtz = derivative_values(rho_v, 1, 1, xp)
    dzz = derivative_values(rho_v, 0, 2, xp)
    return dtt ** 2 + 2.0 * dtz ** 2 + dzz ** 2


def vkd_energy_terms(rho_v, theta_v, z_v, h, lam, dom: Domain, xp=np,
                     include_shear=True):
    """Membrane and bending integrals of the VKD (or FS) energy."""
    eps_tt, eps_zz, eps_tz = vkd_strain_values(rho_v, theta_v, z_v, xp)
    eps_zz = eps_zz - lam
    dA = dom.cell_area
    membrane_tt = xp.sum(eps_tt ** 2) * dA
    membrane_zz = xp.sum(eps_zz ** 2) * dA
    membrane_tz = xp.sum(eps_tz ** 2) * dA if include_shear else 0.0
    bending = h ** 2 * xp.sum(bending_density_values(rho_v, xp)) * dA
    return membrane_tt, membrane_zz, membrane_tz, bending


def nl_metric_values(rho_v, theta_v, z_v, lam, xp=np):
    """Metric components from stored arrays; affine parts injected here."""
    dt_r = derivative_values(rho_v, 1, 0, xp)
    dz_r = derivative_values(rho_v, 0, 1, xp)
    dt_t = 1.0 + derivative_values(theta_v, 1, 0, xp)
    dz_t = derivative_values(theta_v, 0, 1, xp)
    dt_z = derivative_values(z_v, 1, 0, xp)
    dz_z = (1.0 - lam) + derivative_values(z_v, 0, 1, xp)
    g_tt = dt_r ** 2 + rho_v ** 2 * dt_t ** 2 + dt_z ** 2
    g_zz = dz_r ** 2 + rho_v ** 2 * dz_t ** 2 + dz_z ** 2
    g_tz = dt_r * dz_r + rho_v ** 2 * dt_t * dz_t + dt_z * dz_z
    return g_tt, g_zz, g_tz


def nl_second_derivative_values(rho_v, theta_v, z_v, xp=np):
    """Frame components of the three second-derivative vectors of Phi.

    Returns ((tt_r, tt_t, tt_z), (tz_r, tz_t, tz_z), (zz_r, zz_t, zz_z)) in
    the cylindrical frame (E_rho, E_theta, E_z); |D^2 Phi|^2 is the sum of
    the squared magnitudes with the mixed vector counted twice.
    """
    dt_r = derivative_values(rho_v, 1, 0, xp)
    dz_r = derivative_values(rho_v, 0, 1, xp)
    dt_t = 1.0 + derivative_values(theta_v, 1, 0, xp)
    dz_t = derivative_values(theta_v, 0, 1, xp)
    tt = (derivative_values(rho_v, 2, 0, xp) - rho_v * dt_t ** 2,
          2.0 * dt_r * dt_t + rho_v * derivative_values(theta_v, 2, 0, xp),
          derivative_values(z_v, 2, 0, xp))
    tz = (derivative_values(rho_v, 1, 1, xp) - rho_v * dt_t * dz_t,
          dt_r * dz_t + dt_t * dz_r + rho_v * derivative_values(theta_v, 1, 1, xp),
          derivative_values(z_v, 1, 1, xp))
    zz = (derivative_values(rho_v, 0, 2, xp) - rho_v * dz_t ** 2,
          2.0 * dz_r * dz_t + rho_v * derivative_values(theta_v, 0, 2, xp),
          derivative_values(z_v, 0, 2, xp))
    return tt, tz, zz


def nl_bending_density_values(rho_v, theta_v, z_v, xp=np):
    tt, tz, zz = nl_second_derivative_values(rho_v, theta_v, z_v, xp)
    sq = lambda vec: vec[0] ** 2 + vec[1] ** 2 + vec[2] ** 2
    return sq(tt) + 2.0 * sq(tz) + sq(zz)


def nl_energy_terms(rho_v, theta_v, z_v, h, lam, dom: Domain, xp=np):
    g_tt, g_zz, g_tz = nl_metric_values(rho_v, theta_v, z_v, lam, xp)
    dA = dom.cell_area
    membrane_tt = xp.sum((g_tt - 1.0) ** 2) * dA
    membrane_zz = xp.sum((g_zz - 1.0) ** 2) * dA
    membrane_tz = xp.sum(g_tz ** 2) * dA
    bending = h ** 2 * xp.sum(
        nl_bending_density_values(rho_v, theta_v, z_v, xp)) * dA
    return membrane_tt, membrane_zz, membrane_tz, bending


# ---------------------------------------------------------------------------
# public operations


def vkd_strain(c: Configuration) -> StrainField:
    """Strain tensor of a VKD configuration."""
    c.require_model(VKD)
    tt, zz, tz = vkd_strain_values(c.comp_rho.values, c.comp_theta.values,
                                   c.comp_z.values)
    dom = c.domain
    return StrainField(GridField(dom, tt),
                       GridField(dom, zz - c.params.lam),
                       GridField(dom, tz))


def nl_metric(c: Configuration) -> MetricField:
    """Metric tensor g = DPhi^T DPhi of an NL configuration."""
    c.require_model(NL)
    g_tt, g_zz, g_tz = nl_metric_values(c.comp_rho.values, c.comp_theta.values,
                                        c.comp_z.values, c.params.lam)
    dom = c.domain
    return MetricField(GridField(dom, g_tt), GridField(dom, g_zz),
                       GridField(dom, g_tz))


def nl_second_derivatives(c: Configuration):
    """The three second-derivative vectors of Phi in the cylindrical frame,
    as tuples of GridFields ((theta,theta), (theta,z), (z,z))."""
    c.require_model(NL)
    tt, tz, zz = nl_second_derivative_values(
        c.comp_rho.values, c.comp_theta.values, c.comp_z.values)
    dom = c.domain
    wrap = lambda vec: tuple(GridField(dom, comp) for comp in vec)
    return wrap(tt), wrap(tz), wrap(zz)


def slope_components(c: Configuration) -> dict[str, np.ndarray]:
    """First derivatives d_i (component j) of the full displacement or
    deformation, the quantities bounded by the slope constraint."""
    lam = c.params.lam
    rho_v, theta_v, z_v = (c.comp_rho.values, c.comp_theta.values,
                           c.comp_z.values)
    out = {
        "dt_rho": derivative_values(rho_v, 1, 0),
        "dz_rho": derivative_values(rho_v, 0, 1),
        "dt_theta": derivative_values(theta_v, 1, 0),
        "dz_theta": derivative_values(theta_v, 0, 1),
        "dt_z": derivative_values(z_v, 1, 0),
        "dz_z": derivative_values(z_v, 0, 1),
    }
    if c.model == VKD:
        out["dz_z"] = out["dz_z"] - lam
    else:
        out["dt_theta"] = out["dt_theta"] + 1.0
        out["dz_z"] = out["dz_z"] + (1.0 - lam)
    return out


def slope_linf(c: Configuration) -> float:
    return max(float(np.max(np.abs(v))) for v in slope_components(c).values())


def vkd_bulk(mp: ModelParams) -> float:
    return DOMAIN_AREA * (mp.rho - 1.0) ** 2


def nl_bulk(mp: ModelParams) -> float:
    return DOMAIN_AREA * ((mp.rho ** 2 - 1.0) ** 2 + mp.rho ** 2 * mp.h ** 2)


def _vkd_admissibility(c: Configuration, slope: float) -> tuple[bool, tuple]:
    violations = []
    mp = c.params
    obstacle = float(np.min(c.comp_rho.values)) - (mp.rho - 1.0)
    if obstacle < -ADMISSIBILITY_TOL:
        violations.append(f"obstacle: min(phi_rho) - (rho-1) = {obstacle:.3e}")
    if mp.slope_bounded and slope > mp.m + ADMISSIBILITY_TOL:
        violations.append(f"slope: {slope:.6g} > m = {mp.m:.6g}")
    return not violations, tuple(violations)


def _nl_admissibility(c: Configuration, slope: float) -> tuple[bool, tuple]:
    violations = []
    mp = c.params
    obstacle = float(np.min(c.comp_rho.values)) - mp.rho
    if obstacle < -ADMISSIBILITY_TOL:
        violations.append(f"obstacle: min(Phi_rho) - rho = {obstacle:.3e}")
    if mp.slope_bounded and slope > mp.m + ADMISSIBILITY_TOL:
        violations.append(f"slope: {slope:.6g} > m = {mp.m:.6g}")
    dz_z = derivative_values(c.comp_z.values, 0, 1) + (1.0 - mp.lam)
    zsign = float(np.min(dz_z))
    if zsign < -ADMISSIBILITY_TOL:
        violations.append(f"axial sign: min(dz Phi_z) = {zsign:.3e}")
    return not violations, tuple(violations)


def _report(membrane_tt, membrane_zz, membrane_tz, bending, bulk, slope,
            admissible, violations) -> EnergyReport:
    total = membrane_tt + membrane_zz + 2.0 * membrane_tz + bending
    return EnergyReport(
        membrane_tt=float(membrane_tt), membrane_zz=float(membrane_zz),
        membrane_tz=float(membrane_tz), bending=float(bending),
        total=float(total), bulk=float(bulk), excess=float(total - bulk),
        slope_linf=float(slope), admissible=admissible, violations=violations)


def vkd_energy(c: Configuration) -> EnergyReport:
    """Full VKD energy report with admissibility flags."""
    c.require_model(VKD)
    mp = c.params
    terms = vkd_energy_terms(c.comp_rho.values, c.comp_theta.values,
                             c.comp_z.values, mp.h, mp.lam, c.domain)
    slope = slope_linf(c)
    ok, violations = _vkd_admissibility(c, slope)
    return _report(*terms, vkd_bulk(mp), slope, ok, violations)


def fs_energy(c: Configuration) -> EnergyReport:
    """Free-shear energy: VKD with the shear membrane term dropped."""
    c.require_model(VKD)
    mp = c.params
    terms = vkd_energy_terms(c.comp_rho.values, c.comp_theta.values,
                             c.comp_z.values, mp.h, mp.lam, c.domain,
                             include_shear=False)
    slope = slope_linf(c)
    ok, violations = _vkd_admissibility(c, slope)
    return _report(*terms, vkd_bulk(mp), slope, ok, violations)


def nl_energy(c: Configuration) -> EnergyReport:
    """Full NL energy report with admissibility flags."""
    c.require_model(NL)
    mp = c.params
    terms = nl_energy_terms(c.comp_rho.values, c.comp_theta.values,
                            c.comp_z.values, mp.h, mp.lam, c.domain)
    slope = slope_linf(c)
    ok, violations = _nl_admissibility(c, slope)
    return _report(*terms, nl_bulk(mp), slope, ok, violations)


def energy_report(c: Configuration, functional: str | None = None) -> EnergyReport:
    """Dispatch on the configuration's model; functional 'FS' selects the
    free-shear energy for a VKD configuration."""
    if functional == "FS":
        return fs_energy(c)
    return vkd_energy(c) if c.model == VKD else nl_energy(c)


def relaxed_density(F) -> float:
    """Relaxed membrane energy density QW(F) = sum_i ((sigma_i^2 - 1)_+)^2
    over the two singular values sigma_i of the 3x2 matrix F."""
    F = np.asarray(F, dtype=float)
    if F.shape != (3, 2) or not np.all(np.isfinite(F)):
        raise PreconditionError("relaxed_density expects a finite 3x2 matrix")
    G = F.T @ F
    tr, det = G[0, 0] + G[1, 1], G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
    eigs = (tr / 2.0 + disc, tr / 2.0 - disc)  # squared singular values
    return float(sum(max(e - 1.0, 0.0) ** 2 for e in eigs))


def unbuckled_configuration(mp: ModelParams, dom: Domain,
                            model: str = VKD) -> Configuration:
    """The relaxed state: phi = (rho-1, 0, -lambda z) or
    Phi = (rho, theta, (1-lambda) z); stored periodic parts are constants."""
    zero = GridField.constant(dom, 0.0)
    if model == VKD:
        return Configuration(VKD, GridField.constant(dom, mp.rho - 1.0),
                             zero, zero, mp)
    return Configuration(NL, GridField.constant(dom, mp.rho), zero, zero, mp)
