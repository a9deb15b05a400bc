"""Lower-bound certificates and the interpolation-inequality verifier."""

import math

import numpy as np
import pytest

from mandrel_lab.certificates import (INTERP_FAMILIES, CertificateReport,
                                      certificates_for, check_interpolation,
                                      ensure_passed, fs_certificates,
                                      interpolation_ratio, nl_certificates,
                                      vkd_certificates)
from mandrel_lab.energy import (NL, VKD, Configuration,
                                unbuckled_configuration)
from mandrel_lab.errors import CertificateError, PreconditionError
from mandrel_lab.grid import Domain, GridField, ModelParams
from mandrel_lab.patterns import (FS_FEW_TILTED, PatternParams,
                                  build_fs_pattern, build_nl_pattern,
                                  build_vkd_pattern, select_regime_params,
                                  suggested_domain)

DOM = Domain(32, 64)


def smooth_admissible(mp, model=VKD, amplitude=0.05, seed=0, dom=DOM):
    rng = np.random.default_rng(seed)
    theta, z = dom.mesh()

    def trig(scale):
        out = np.zeros_like(theta)
        for _ in range(3):
            a, b = rng.integers(1, 4), rng.integers(1, 4)
            out += rng.normal() * np.cos(a * theta) * np.cos(
                2 * np.pi * b * z + rng.normal())
        return scale * out

    floor = mp.rho - 1.0 if model == VKD else mp.rho
    radial = trig(amplitude)
    radial = radial - radial.min() + 0.01 * amplitude
    return Configuration(model, GridField(dom, floor + radial),
                         GridField(dom, trig(0.02 * amplitude)),
                         GridField(dom, trig(0.02 * amplitude)), mp)


class TestVkdCertificates:
    def test_unbuckled_axial_equality(self):
        # without radial oscillation the whole excess 2 pi lambda^2 is the
        # axial compression budget: the certificate is tight
        mp = ModelParams(h=0.1, lam=0.25, rho=1.0, m=math.inf)
        reports = vkd_certificates(unbuckled_configuration(mp, DOM))
        axial = next(r for r in reports if r.name == "vkd_axial_compression")
        assert axial.passed
        assert abs(axial.slack) <= 1e-12
        assert axial.rhs == pytest.approx(2.0 * math.pi * mp.lam ** 2)

    def test_pattern_passes_all(self):
        mp = ModelParams(h=1e-4, lam=0.25, rho=2.0, m=math.inf)
        pp = select_regime_params(VKD, mp)
        c = build_vkd_pattern(mp, pp, suggested_domain(pp, oversample=8))
        reports = vkd_certificates(c)
        assert reports and all(r.passed for r in reports)
        ensure_passed(reports)

    def test_random_admissible_field_passes(self):
        mp = ModelParams(h=0.05, lam=0.2, rho=1.3, m=math.inf)
        for seed in range(5):
            c = smooth_admissible(mp, seed=seed)
            assert all(r.passed for r in vkd_certificates(c))

    def test_inadmissible_rejected(self):
        mp = ModelParams(h=0.1, lam=0.25, rho=1.5, m=math.inf)
        c = Configuration(VKD, GridField.constant(DOM, 0.0),
                          GridField.constant(DOM, 0.0),
                          GridField.constant(DOM, 0.0), mp)
        with pytest.raises(PreconditionError):
            vkd_certificates(c)

    def test_slack_theta_translation_invariant(self):
        mp = ModelParams(h=0.05, lam=0.2, rho=1.3, m=math.inf)
        c = smooth_admissible(mp, seed=7)
        shift = DOM.n_theta // 4
        rolled = Configuration(
            VKD, *(GridField(DOM, np.roll(f.values, shift, axis=0))
                   for f in (c.comp_rho, c.comp_theta, c.comp_z)), mp)
        for a, b in zip(vkd_certificates(c), vkd_certificates(rolled)):
            assert a.name == b.name
            assert b.slack == pytest.approx(a.slack, rel=1e-8, abs=1e-10)


class TestFsCertificates:
    def test_requires_neutral_mandrel(self):
        mp = ModelParams(h=0.1, lam=0.25, rho=1.5, m=math.inf)
        with pytest.raises(PreconditionError):
            fs_certificates(unbuckled_configuration(mp, DOM))

    def test_tilted_pattern_passes(self):
        mp = ModelParams(h=1e-3, lam=0.25, rho=1.0, m=math.inf)
        pp = PatternParams(1, 2, 0.5, FS_FEW_TILTED)
        c = build_fs_pattern(mp, pp, Domain(512, 4096))
        reports = fs_certificates(c)
        assert reports and all(r.passed for r in reports)

    def test_random_admissible_field_passes(self):
        mp = ModelParams(h=0.05, lam=0.2, rho=1.0, m=math.inf)
        for seed in range(5):
            c = smooth_admissible(mp, seed=seed)
            assert all(r.passed for r in fs_certificates(c))


class TestNlCertificates:
    def test_pattern_passes_all(self):
        mp = ModelParams(h=1e-3, lam=0.25, rho=1.5, m=math.inf)
        pp = select_regime_params(NL, mp)
        c = build_nl_pattern(mp, pp, suggested_domain(pp, oversample=8))
        reports = nl_certificates(c)
        assert reports and all(r.passed for r in reports)

    def test_uniform_state_buckling_budget(self):
        # a deformation without radial oscillation must carry at least
        # 2 pi lambda^2 of excess: the buckling certificate sees it
        mp = ModelParams(h=0.1, lam=0.25, rho=1.0, m=math.inf)
        reports = nl_certificates(unbuckled_configuration(mp, DOM, NL))
        buckling = next(r for r in reports if r.name == "nl_buckling")
        assert buckling.passed
        assert all(r.passed for r in reports)

    def test_constant_free_mode_never_fails(self):
        mp = ModelParams(h=0.1, lam=0.25, rho=1.2, m=math.inf)
        reports = nl_certificates(smooth_admissible(mp, model=NL, seed=3))
        ratio = [r for r in reports if r.mode == "constant-free"]
        assert all(r.passed for r in ratio)


class TestDispatchAndEnsure:
    def test_dispatch_by_model(self):
        mp = ModelParams(h=0.1, lam=0.25, rho=1.5, m=math.inf)
        names = {r.name for r in certificates_for(
            unbuckled_configuration(mp, DOM))}
        assert any(n.startswith("vkd_") for n in names)
        assert not any(n.startswith("fs_") for n in names)
        nl_names = {r.name for r in certificates_for(
            unbuckled_configuration(mp, DOM, NL))}
        assert all(n.startswith("nl_") for n in nl_names)

    def test_neutral_mandrel_adds_fs(self):
        mp = ModelParams(h=0.1, lam=0.25, rho=1.0, m=math.inf)
        names = {r.name for r in certificates_for(
            unbuckled_configuration(mp, DOM))}
        assert any(n.startswith("fs_") for n in names)

    def test_ensure_passed_raises(self):
        bad = CertificateReport("fabricated", "explicit", 0.0, 1.0, -1.0,
                                False)
        with pytest.raises(CertificateError):
            ensure_passed([bad])
        ensure_passed([])  # no reports, no failure


class TestInterpolation:
    def test_gn1d_cosine_ratio(self):
        x = -0.5 + np.arange(256) / 256
        vals = np.cos(2.0 * np.pi * x)
        norm1 = 2.0 / math.pi
        lhs = norm1 ** 0.4 * ((2 * math.pi) ** 2 / math.sqrt(2)) ** 0.6
        rhs = 2 * math.pi / math.sqrt(2)
        expected = lhs / rhs
        # the L1 norm of |cos| converges at second order in the grid
        assert interpolation_ratio("GN_1D", vals) == pytest.approx(
            expected, rel=1e-4)
        assert expected == pytest.approx(1.385, rel=1e-3)

    def test_amplitude_invariance(self):
        rng = np.random.default_rng(1)
        for family in INTERP_FAMILIES:
            shape = (256,) if family == "GN_1D" else (64, 64)
            vals = rng.standard_normal(shape)
            base = interpolation_ratio(family, vals)
            scaled = interpolation_ratio(family, 17.5 * vals)
            assert scaled == pytest.approx(base, rel=1e-12)

    def test_all_families_bounded_below(self):
        for family in INTERP_FAMILIES:
            report = check_interpolation(family, samples=50, seed=0)
            assert report.passed
            assert report.min_ratio > 1e-3

    def test_unknown_family(self):
        with pytest.raises(PreconditionError):
            check_interpolation("OTHER", samples=10, seed=0)
        with pytest.raises(PreconditionError):
            interpolation_ratio("OTHER", np.zeros(16))

    def test_degenerate_sample_skipped(self):
        assert interpolation_ratio("GN_1D", np.zeros(64)) is None
