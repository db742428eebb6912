import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermion_statesum import statesum as ss
from fermion_statesum import zetareg as zr
from fermion_statesum.linalg import haar_unitary


spectra = st.lists(st.floats(0.2, 5) | st.floats(-5, -0.2), min_size=1, max_size=12)
complex_s = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


class TestFinite:
    def test_symmetric_pair(self):
        z = zr.finite_zeta_functions(zr.FiniteSpectrum([1.0, -1.0]), 0)
        assert z.eta == 0 and z.zeta_Dsq == 2

    def test_single_point(self):
        z = zr.finite_zeta_functions(zr.FiniteSpectrum([2.0]), 1)
        assert z.zeta_iD == pytest.approx(-0.5j)

    @settings(max_examples=60, deadline=None)
    @given(spectra, complex_s, st.sampled_from([1, -1]))
    def test_phase_identities(self, ev, s, eps):
        z = zr.finite_zeta_functions(zr.FiniteSpectrum(ev), s, eps)
        ph = cmath.exp(1j * eps * math.pi * s)
        lhs_eps = 0.5 * (1 + ph) * z.zeta_Dsq_half + 0.5 * (1 - ph) * z.eta
        lhs_i = cmath.cos(math.pi * s / 2) * z.zeta_Dsq_half - 1j * cmath.sin(math.pi * s / 2) * z.eta
        scale = max(1.0, abs(z.zeta_D_eps), abs(z.zeta_iD))
        assert abs(lhs_eps - z.zeta_D_eps) <= 1e-12 * scale
        assert abs(lhs_i - z.zeta_iD) <= 1e-12 * scale

    def test_zeta_dsq_is_half_argument(self):
        spec = zr.FiniteSpectrum([0.5, -2.0, 3.0])
        z = zr.finite_zeta_functions(spec, 0.8)
        assert z.zeta_Dsq == pytest.approx(zr.finite_zeta_functions(spec, 1.6).zeta_Dsq_half)

    @pytest.mark.parametrize("ev,detD,detiD", [([1.0, -1.0], -1, 1), ([2.0, 3.0], 6, -6)])
    def test_products(self, ev, detD, detiD):
        for eps in (1, -1):
            r = zr.finite_det_via_zeta(zr.FiniteSpectrum(ev), eps)
            assert r.detD == pytest.approx(detD, abs=1e-12)
            assert r.detiD == pytest.approx(detiD, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(spectra)
    def test_direct_zeta_derivatives(self, ev):
        spec = zr.FiniteSpectrum(ev)
        for eps in (1, -1):
            r = zr.finite_det_via_zeta(spec, eps)
            prod = np.prod(ev)
            assert abs(r.detD_direct_zeta - prod) <= 1e-12 * abs(prod)
            assert abs(r.detiD_direct_zeta - np.prod(1j * np.array(ev))) <= 1e-12 * abs(prod)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            zr.FiniteSpectrum([1.0, 0.0])


class TestHurwitz:
    @pytest.mark.parametrize("q", [0.25, 0.5, 0.9])
    def test_at_zero(self, q):
        assert abs(zr.hurwitz_zeta(0, q) - (0.5 - q)) <= 1e-11

    def test_basel(self):
        assert abs(zr.hurwitz_zeta(2, 1) - math.pi ** 2 / 6) <= 1e-11

    def test_brute_force_series(self):
        j = np.arange(10 ** 6)
        direct = np.sum((j + 0.7) ** -3.0)
        tail = 0.5 * (10 ** 6 + 0.7) ** -2  # integral of the remainder
        assert abs(zr.hurwitz_zeta(3, 0.7) - (direct + tail)) <= 1e-11

    @pytest.mark.parametrize("s", [1.6, 2.5, 3 + 1j, 4.0])
    @pytest.mark.parametrize("q", [0.1, 0.5, 1.0])
    def test_direct_series_region(self, s, q):
        assert abs(zr.hurwitz_zeta(s, q) - complex(mpmath.zeta(s, q))) <= 1e-11

    @pytest.mark.parametrize("s", [-4.0, -2.5, -1.0, 0.5, -3 + 2j, 2j])
    @pytest.mark.parametrize("q", [0.05, 0.3, 0.77, 1.0])
    def test_continuation(self, s, q):
        ref = complex(mpmath.zeta(s, q))
        assert abs(zr.hurwitz_zeta(s, q) - ref) <= 1e-11 * max(1.0, abs(ref))

    def test_pole(self):
        with pytest.raises(zr.PoleError):
            zr.hurwitz_zeta(1, 0.5)

    def test_series_helper_converges(self):
        assert abs(zr.hurwitz_series(3, 0.7, 2000) - zr.hurwitz_zeta(3, 0.7)) <= 1e-6


class TestLogGamma:
    @pytest.mark.parametrize("x", np.linspace(0.01, 0.99, 25))
    def test_unit_interval(self, x):
        assert abs(zr.log_gamma(x) - math.lgamma(x)) <= 1e-12

    def test_half(self):
        assert zr.log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-13)

    @pytest.mark.parametrize("x", [0.2, 0.37, 0.5])
    def test_reflection(self, x):
        lhs = zr.log_gamma(x) + zr.log_gamma(1 - x)
        assert lhs == pytest.approx(math.log(math.pi / math.sin(math.pi * x)), abs=1e-12)


class TestSpecial:
    def test_half(self):
        h = zr.hurwitz_special(0.5)
        assert h.zeta0 == 0
        assert h.zetaprime0 == pytest.approx(-0.5 * math.log(2), abs=1e-12)

    @pytest.mark.parametrize("q", [0.1, 0.33, 0.5, 0.8])
    def test_finite_difference(self, q):
        h = 1e-5
        fd = (zr.hurwitz_zeta(h, q) - zr.hurwitz_zeta(-h, q)).real / (2 * h)
        assert abs(fd - zr.hurwitz_special(q).zetaprime0) <= 1e-8

    @pytest.mark.parametrize("q", [0.1, 0.25, 0.6])
    def test_sum_rule(self, q):
        s = zr.hurwitz_special(q).zetaprime0 + zr.hurwitz_special(1 - q).zetaprime0
        assert s == pytest.approx(-math.log(2 * math.sin(math.pi * q)), abs=1e-10)


class TestContinuumDet:
    def test_half(self):
        r = zr.continuum_regularised_det(zr.U1Connection(0.5))
        assert r.eta0 == 0
        assert r.det_iD == pytest.approx(2, abs=1e-12)
        assert r.det_D_eps_plus == pytest.approx(2, abs=1e-12)
        assert r.det_D_eps_minus == pytest.approx(2, abs=1e-12)

    def test_quarter(self):
        r = zr.continuum_regularised_det(zr.U1Connection(0.25))
        assert r.det_iD == pytest.approx(1 + 1j, abs=1e-12)
        assert r.modulus == pytest.approx(math.sqrt(2), abs=1e-12)
        assert r.det_D_eps_plus == pytest.approx(1 + 1j, abs=1e-12)
        assert r.det_D_eps_minus == pytest.approx(1 - 1j, abs=1e-12)

    @pytest.mark.parametrize("a", np.arange(1, 10) / 10)
    def test_decomposition(self, a):
        r = zr.continuum_regularised_det(zr.U1Connection(a))
        assert r.eta0 == pytest.approx(1 - 2 * a, abs=1e-14)
        assert r.zeta0 == 0
        assert r.modulus == pytest.approx(2 * math.sin(math.pi * a), abs=1e-12)
        assert r.det_iD == pytest.approx(1 - cmath.exp(-2j * math.pi * a), abs=1e-10)

    @pytest.mark.parametrize("a", [0.15, 0.5, 0.85])
    def test_numeric_continuation_agrees(self, a):
        num = zr.continuation_at_zero(a)
        r = zr.continuum_regularised_det(zr.U1Connection(a))
        assert num["eta0"] == pytest.approx(r.eta0, abs=1e-11)
        assert num["zeta0"] == pytest.approx(0, abs=1e-11)
        # zeta'_{D^2}(0) = 2 (Z'(0) + log(l / 2 pi) Z(0)) with Z = zeta_H(., a) + zeta_H(., 1 - a)
        assert 2 * num["dZ0"] == pytest.approx(r.zetaprime0, abs=1e-8)

    def test_length_independence(self):
        reps = [zr.continuum_regularised_det(zr.U1Connection(0.37, l)) for l in (1.0, 2 * math.pi, 10.0)]
        assert all(r.det_iD == reps[0].det_iD and r.zetaprime0 == reps[0].zetaprime0 for r in reps)

    def test_zero_mode(self):
        r = zr.continuum_regularised_det(zr.U1Connection(0.0))
        assert r.zero_mode and r.det_iD == 0

    def test_from_holonomy(self):
        assert zr.U1Connection.from_holonomy(cmath.exp(-2j * math.pi * 0.3)).a == pytest.approx(0.3)
        assert zr.U1Connection(1.25).a == pytest.approx(0.25)

    def test_json(self):
        d = zr.continuum_regularised_det(zr.U1Connection(0.5)).to_dict()
        for key in ("a", "l", "eta0", "zeta0", "zetaprime0", "det_iD_re", "det_iD_im", "det_D_plus_re", "zero_mode"):
            assert key in d


class TestUn:
    def test_diagonal(self):
        Q = np.diag([np.exp(-1j * np.pi / 2), np.exp(-1j * np.pi)])
        assert zr.continuum_det_un(Q) == pytest.approx((1 + 1j) * 2, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_haar(self, seed):
        Q = haar_unitary(3, seed)
        assert abs(zr.continuum_det_un(Q) - ss.circle_partition_closed(ss.TriangulatedCircle([Q]))) <= 1e-10

    def test_unit_eigenvalue(self):
        assert zr.continuum_det_un(np.diag([1.0, -1.0])) == 0


class TestMassive:
    def test_massless(self):
        r = zr.continuum_det_massive(haar_unitary(2, 1), 0.0, 1.0)
        assert r.phase_ratio == pytest.approx(1, abs=1e-10)

    @pytest.mark.parametrize("m,theta", [(0.3, 1.0), (1.7, 2.5), (-0.4, 0.2)])
    def test_printed_form_at_two_pi(self, m, theta):
        q = np.exp(-1j * theta)
        r = zr.continuum_det_massive([[q]], m, 2 * np.pi)
        assert r.continuum == pytest.approx(1 - np.exp(2j * np.pi * m) * q, abs=1e-10)

    def test_phase_ratio_general_l(self, rng):
        for _ in range(20):
            m, theta, l = rng.uniform(-2, 2), rng.uniform(0, 2 * np.pi), rng.uniform(0.5, 8)
            r = zr.continuum_det_massive([[np.exp(-1j * theta)]], m, l)
            assert r.ratio_defined
            assert r.phase_ratio == pytest.approx(np.exp(-1j * m * l), abs=1e-10)

    def test_unit_modulus_un(self):
        r = zr.continuum_det_massive(haar_unitary(3, 4), 0.6, 2.0)
        assert abs(abs(r.phase_ratio) - 1) <= 1e-10

    def test_undefined_ratio(self):
        r = zr.continuum_det_massive([[1.0]], 0.0, 1.0)
        assert not r.ratio_defined and r.phase_ratio is None
