"""Grid, quadrature, spectral differentiation, norms, and field I/O."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mandrel_lab.errors import PreconditionError, ResolutionError
from mandrel_lab.grid import (DOMAIN_AREA, RESOLUTION_FACTOR, Domain,
                              GridField, ModelParams, check_resolution,
                              derivative, integrate, lp_norm, mixed_norm,
                              read_gfld, required_n_z, theta_average,
                              write_gfld)

DOM = Domain(64, 64)


def field(fn, dom=DOM):
    return GridField.from_function(dom, fn)


class TestDomain:
    def test_area(self):
        assert DOMAIN_AREA == pytest.approx(2.0 * math.pi)
        assert DOM.cell_area * DOM.n_theta * DOM.n_z == pytest.approx(
            2.0 * math.pi)

    def test_node_ranges(self):
        theta = DOM.theta_nodes()
        z = DOM.z_nodes()
        assert theta[0] == 0.0 and theta[-1] < 2.0 * math.pi
        assert z[0] == -0.5 and z[-1] < 0.5

    def test_invalid_sizes_rejected(self):
        with pytest.raises(PreconditionError):
            Domain(0, 64)


class TestModelParams:
    def test_ranges_enforced(self):
        for kwargs in ({"h": 0.6}, {"lam": 1.0}, {"rho": 0.9}, {"m": 0.0}):
            base = {"h": 0.1, "lam": 0.25, "rho": 1.0, "m": math.inf}
            base.update(kwargs)
            with pytest.raises(PreconditionError):
                ModelParams(**base)

    def test_infinite_slope_bound_representable(self):
        mp = ModelParams(h=0.1, lam=0.25, rho=1.0, m=math.inf)
        assert not mp.slope_bounded
        assert ModelParams(h=0.1, lam=0.25, rho=1.0, m=4.0).slope_bounded


class TestDerivative:
    def test_sin_3theta(self):
        f = field(lambda t, z: np.sin(3 * t))
        df = derivative(f, 1, 0)
        expected = field(lambda t, z: 3 * np.cos(3 * t))
        assert np.max(np.abs(df.values - expected.values)) <= 1e-12

    def test_constant_z_derivative_vanishes(self):
        df = derivative(GridField.constant(DOM, 3.7), 0, 1)
        assert np.max(np.abs(df.values)) == 0.0

    def test_mixed_derivative(self):
        f = field(lambda t, z: np.cos(2 * np.pi * z) * np.sin(t))
        df = derivative(f, 1, 1)
        expected = field(
            lambda t, z: -2 * np.pi * np.sin(2 * np.pi * z) * np.cos(t))
        assert np.max(np.abs(df.values - expected.values)) <= 1e-10

    def test_invalid_orders_rejected(self):
        f = GridField.constant(DOM, 1.0)
        with pytest.raises(PreconditionError):
            derivative(f, 0, 0)
        with pytest.raises(PreconditionError):
            derivative(f, 3, 0)

    def test_nonfinite_values_rejected(self):
        vals = np.zeros((4, 4))
        vals[0, 0] = np.nan
        with pytest.raises(PreconditionError):
            GridField(Domain(4, 4), vals)

    @given(st.integers(min_value=1, max_value=7),
           st.integers(min_value=1, max_value=7))
    @settings(max_examples=20, deadline=None)
    def test_trig_polynomial_exactness(self, a, b):
        f = field(lambda t, z: np.sin(a * t) * np.cos(2 * np.pi * b * z))
        df = derivative(f, 1, 0)
        expected = field(
            lambda t, z: a * np.cos(a * t) * np.cos(2 * np.pi * b * z))
        assert np.max(np.abs(df.values - expected.values)) <= 1e-10

    @given(st.integers(min_value=0, max_value=10))
    @settings(max_examples=15, deadline=None)
    def test_derivatives_integrate_to_zero(self, seed):
        rng = np.random.default_rng(seed)
        f = GridField(DOM, rng.standard_normal((DOM.n_theta, DOM.n_z)))
        for orders in ((1, 0), (0, 1)):
            total = integrate(derivative(f, *orders))
            scale = max(1.0, np.abs(f.values).max())
            assert abs(total) <= 1e-10 * scale


class TestIntegrate:
    def test_constant(self):
        assert integrate(GridField.constant(DOM, 1.0)) == pytest.approx(
            2.0 * math.pi)

    def test_odd_symmetry(self):
        assert abs(integrate(field(lambda t, z: np.sin(t)))) <= 1e-14

    def test_cos_squared(self):
        f = field(lambda t, z: np.cos(2 * np.pi * z) ** 2)
        assert integrate(f) == pytest.approx(math.pi, abs=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(7)
        vals = rng.standard_normal((DOM.n_theta, DOM.n_z))
        f = GridField(DOM, vals)
        spectral = np.sum(np.abs(np.fft.fft2(vals)) ** 2) / vals.size ** 2
        assert integrate(GridField(DOM, vals ** 2)) == pytest.approx(
            2.0 * math.pi * spectral, rel=1e-10)


class TestMixedNorm:
    def test_constant_l2z_l1theta(self):
        f = GridField.constant(DOM, 1.0)
        assert mixed_norm(f, 2, 1) == pytest.approx(2.0 * math.pi)

    def test_constant_sup(self):
        f = GridField.constant(DOM, 1.0)
        assert mixed_norm(f, math.inf, math.inf) == pytest.approx(1.0)

    def test_abs_cos_profile(self):
        f = field(lambda t, z: np.abs(np.cos(2 * np.pi * z)))
        assert mixed_norm(f, 2, 1) == pytest.approx(
            math.pi * math.sqrt(2.0), abs=1e-6)

    def test_unsupported_exponent(self):
        with pytest.raises(PreconditionError):
            mixed_norm(GridField.constant(DOM, 1.0), 3, 2)

    @given(st.floats(min_value=-10.0, max_value=10.0,
                     allow_nan=False, allow_infinity=False),
           st.sampled_from([1, 2, 4, math.inf]),
           st.sampled_from([1, 2, 4, math.inf]))
    @settings(max_examples=30, deadline=None)
    def test_absolute_homogeneity(self, alpha, p_out, p_in):
        rng = np.random.default_rng(3)
        f = GridField(DOM, rng.standard_normal((DOM.n_theta, DOM.n_z)))
        scaled = GridField(DOM, alpha * f.values)
        assert mixed_norm(scaled, p_out, p_in) == pytest.approx(
            abs(alpha) * mixed_norm(f, p_out, p_in), abs=1e-12)

    def test_lp_norm_matches_mixed(self):
        rng = np.random.default_rng(5)
        f = GridField(DOM, rng.standard_normal((DOM.n_theta, DOM.n_z)))
        assert lp_norm(f, 2) == pytest.approx(mixed_norm(f, 2, 2))


class TestThetaAverage:
    def test_sin_plus_z(self):
        f = field(lambda t, z: np.sin(t) + z)
        assert np.max(np.abs(theta_average(f) - DOM.z_nodes())) <= 1e-12

    def test_constant(self):
        assert np.allclose(theta_average(GridField.constant(DOM, 1.0)), 1.0)

    def test_cos_squared_theta(self):
        f = field(lambda t, z: np.cos(t) ** 2)
        assert np.max(np.abs(theta_average(f) - 0.5)) <= 1e-12


class TestResolution:
    def test_required_samples(self):
        assert required_n_z(2, 3, 0.5) == RESOLUTION_FACTOR * 12

    def test_under_resolved_rejected(self):
        with pytest.raises(ResolutionError):
            check_resolution(Domain(8, 64), 2, 1, 0.5)
        check_resolution(Domain(8, 128), 2, 1, 0.5)

    def test_theta_resolution(self):
        with pytest.raises(ResolutionError):
            check_resolution(Domain(8, 4096), 4, 1, 0.5, theta_varying=True)


class TestGfldIO:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        f = GridField(Domain(8, 10), rng.standard_normal((8, 10)))
        path = tmp_path / "f.gfld"
        write_gfld(path, f)
        g = read_gfld(path)
        assert g.domain == f.domain
        assert np.array_equal(g.values, f.values)

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.gfld"
        path.write_text("NOPE 1 2 2\n0 0 0 0\n")
        with pytest.raises(PreconditionError):
            read_gfld(path)

    def test_payload_size_checked(self, tmp_path):
        path = tmp_path / "short.gfld"
        path.write_text("GFLD 1 2 2\n0 0 0\n")
        with pytest.raises(PreconditionError):
            read_gfld(path)
