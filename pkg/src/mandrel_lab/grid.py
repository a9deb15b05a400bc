"""Periodic scalar fields on the reference cylinder domain.

The reference domain is Omega = I_theta x I_z with I_theta = [0, 2*pi) and
I_z = [-1/2, 1/2), so |Omega| = 2*pi.  Fields are sampled on a uniform
tensor grid, periodic in both directions.  Differentiation is
Fourier-spectral (exact for band-limited fields), quadrature is the uniform
rectangle rule (= trapezoid rule on a periodic grid), and the mixed norms
||f||_{L^p_z L^q_theta} take the theta-norm per z-slice first, then the
z-norm of the resulting slice function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ResolutionError

THETA_EXTENT = 2.0 * math.pi
Z_EXTENT = 1.0
DOMAIN_AREA = THETA_EXTENT * Z_EXTENT

#: Safety factor for the resolution policy: a construction with n wrinkles,
#: wrap count k and volume fraction delta needs n_z >= RESOLUTION_FACTOR*n*k/delta.
RESOLUTION_FACTOR = 32

_SUPPORTED_EXPONENTS = (1, 2, 4, math.inf)


@dataclass(frozen=True)
class Domain:
    """Uniform periodic grid on Omega = [0, 2*pi) x [-1/2, 1/2)."""

    n_theta: int
    n_z: int

    def __post_init__(self):
        for name, n in (("n_theta", self.n_theta), ("n_z", self.n_z)):
            if n < 8 or n % 2 != 0:
                raise PreconditionError(f"{name} must be even and >= 8, got {n}")

    @property
    def d_theta(self) -> float:
        return THETA_EXTENT / self.n_theta

    @property
    def d_z(self) -> float:
        return Z_EXTENT / self.n_z

    @property
    def cell_area(self) -> float:
        return self.d_theta * self.d_z

    def theta_nodes(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.d_theta

    def z_nodes(self) -> np.ndarray:
        return -0.5 + np.arange(self.n_z) * self.d_z

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates (theta, z) as two (n_theta, n_z) arrays."""
        return np.meshgrid(self.theta_nodes(), self.z_nodes(), indexing="ij")


@dataclass(frozen=True)
class GridField:
    """A real scalar field sampled on a Domain; values are immutable."""

    domain: Domain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.domain.n_theta, self.domain.n_z):
            raise PreconditionError(
                f"values shape {vals.shape} does not match grid "
                f"({self.domain.n_theta}, {self.domain.n_z})"
            )
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, domain: Domain, fn) -> "GridField":
        theta, z = domain.mesh()
        return cls(domain, np.broadcast_to(np.asarray(fn(theta, z), dtype=float),
                                           theta.shape))

    @classmethod
    def constant(cls, domain: Domain, value: float) -> "GridField":
        return cls(domain, np.full((domain.n_theta, domain.n_z), float(value)))


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters: thickness h, confinement lambda, mandrel radius
    rho, slope bound m (math.inf allowed)."""

    h: float
    lam: float
    rho: float
    m: float = math.inf

    def __post_init__(self):
        if not (0.0 < self.h <= 0.5):
            raise PreconditionError(f"h must lie in (0, 1/2], got {self.h}")
        if not (0.0 < self.lam < 1.0):
            raise PreconditionError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.rho < 1.0:
            raise PreconditionError(
                f"rho must be >= 1 (rho < 1 is out of scope), got {self.rho}")
        if not (self.m > 0.0):
            raise PreconditionError(f"m must be positive or inf, got {self.m}")

    @property
    def slope_bounded(self) -> bool:
        return math.isfinite(self.m)


def _axis_derivative(vals: np.ndarray, order: int, axis: int, extent: float,
                     xp=np) -> np.ndarray:
    """Spectral derivative of given order along one axis of a periodic array.

    The Nyquist mode is zeroed for odd orders (standard for real fields).
    """
    n = vals.shape[axis]
    k = np.fft.rfftfreq(n, d=1.0 / n)  # 0, 1, ..., n/2
    mult = (1j * 2.0 * np.pi * k / extent) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[-1] = 0.0  # Nyquist
    shape = [1, 1]
    shape[axis] = k.size
    spec = xp.fft.rfft(vals, axis=axis) * mult.reshape(shape)
    return xp.fft.irfft(spec, n=n, axis=axis)


def derivative_values(vals: np.ndarray, order_theta: int, order_z: int,
                      xp=np) -> np.ndarray:
    """Mixed spectral partial derivative of raw (n_theta, n_z) values."""
    out = vals
    if order_theta:
        out = _axis_derivative(out, order_theta, axis=0, extent=THETA_EXTENT, xp=xp)
    if order_z:
        out = _axis_derivative(out, order_z, axis=1, extent=Z_EXTENT, xp=xp)
    return out


def derivative(f: GridField, order_theta: int, order_z: int) -> GridField:
    """Spectral mixed partial d_theta^a d_z^b f with a + b in {1, 2}."""
    for name, order in (("order_theta", order_theta), ("order_z", order_z)):
        if order not in (0, 1, 2):
            raise PreconditionError(f"{name} must be in {{0, 1, 2}}, got {order}")
    if order_theta + order_z not in (1, 2):
        raise PreconditionError("total derivative order must be 1 or 2")
    return GridField(f.domain, derivative_values(f.values, order_theta, order_z))


def integrate(f: GridField) -> float:
    """Rectangle-rule quadrature of f over Omega."""
    return float(f.values.sum() * f.domain.cell_area)


def _norm_along(vals: np.ndarray, p, axis: int, spacing: float) -> np.ndarray:
    if p == 1:
        return np.abs(vals).sum(axis=axis) * spacing
    if p == 2:
        return np.sqrt((vals ** 2).sum(axis=axis) * spacing)
    if p == 4:
        return ((vals ** 4).sum(axis=axis) * spacing) ** 0.25
    if p == math.inf:
        return np.abs(vals).max(axis=axis)
    raise PreconditionError(f"unsupported exponent {p}; use 1, 2, 4, or inf")


def mixed_norm(f: GridField, p_outer_z, p_inner_theta) -> float:
    """||f||_{L^{p_outer}_z L^{p_inner}_theta}: theta-norm per z-slice,
    then the z-norm of the slice function."""
    if p_outer_z not in _SUPPORTED_EXPONENTS or p_inner_theta not in _SUPPORTED_EXPONENTS:
        raise PreconditionError(
            f"unsupported exponent pair ({p_outer_z}, {p_inner_theta})")
    slices = _norm_along(f.values, p_inner_theta, axis=0, spacing=f.domain.d_theta)
    return float(_norm_along(slices, p_outer_z, axis=0, spacing=f.domain.d_z))


def lp_norm(f: GridField, p) -> float:
    """Plain L^p(Omega) norm (equal inner and outer exponents)."""
    return mixed_norm(f, p, p)


def theta_average(f: GridField) -> np.ndarray:
    """The slice average (1/|I_theta|) * int f dtheta as a z-profile."""
    return f.values.mean(axis=0)


def required_n_z(n: int, k: int, delta: float) -> int:
    """Minimum axial sample count for a construction with n wrinkles, wrap
    count k, and volume fraction delta."""
    return int(math.ceil(RESOLUTION_FACTOR * n * k / delta))


def check_resolution(dom: Domain, n: int, k: int, delta: float,
                     theta_varying: bool = False) -> None:
    """Reject grid/pattern pairings that under-resolve the finest wrinkle."""
    need_z = required_n_z(n, k, delta)
    if dom.n_z < need_z:
        raise ResolutionError(
            f"n_z = {dom.n_z} < {need_z} required for n={n}, k={k}, delta={delta:g}")
    if theta_varying:
        need_t = int(math.ceil(RESOLUTION_FACTOR * n / delta))
        if dom.n_theta < need_t:
            raise ResolutionError(
                f"n_theta = {dom.n_theta} < {need_t} required for "
                f"n={n}, delta={delta:g}")


def write_gfld(path, f: GridField) -> None:
    """Write a field in GFLD/1 format (17 significant digits, theta-major)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"GFLD 1 {f.domain.n_theta} {f.domain.n_z}\n")
        flat = f.values.reshape(-1)
        for start in range(0, flat.size, f.domain.n_z):
            row = flat[start:start + f.domain.n_z]
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_gfld(path) -> GridField:
    """Read a GFLD/1 field file written by write_gfld."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "GFLD" or header[1] != "1":
            raise PreconditionError(f"not a GFLD/1 file: {path}")
        n_theta, n_z = int(header[2]), int(header[3])
        data = np.array(fh.read().split(), dtype=float)
    if data.size != n_theta * n_z:
        raise PreconditionError(
            f"GFLD/1 payload has {data.size} values, expected {n_theta * n_z}")
    return GridField(Domain(n_theta, n_z), data.reshape(n_theta, n_z))
