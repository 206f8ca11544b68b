import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from negrefract import (
    MediumResponse,
    Orientation,
    PolarTensor3,
    angle_rabi,
    bb_tensor,
    cross_tensor,
    ee_tensor,
    helmholtz_index_numeric,
    index_vs_angle,
    mirror_handedness,
    polarizability_quartet,
    refractive_index,
)
from negrefract.anisotropy import CIRCULAR_BASIS
from negrefract.errors import SingularCorrectionError, SingularPermeabilityError
from negrefract.linear_response import denominators
from negrefract.params import HBAR, ProbeDetunings

I3 = PolarTensor3.isotropic


def _rand_medium(rng, passive=True):
    def c():
        return rng.normal() + 1j * (abs(rng.normal()) if passive else rng.normal())

    return c() + 1, c() + 1, 0.3 * c(), 0.3 * c()


class TestOrientation:
    def test_phi_wrapped(self):
        assert Orientation(0.1, 2 * math.pi + 0.5).phi == pytest.approx(0.5)
        assert Orientation(0.1, -0.5).phi == pytest.approx(2 * math.pi - 0.5)

    @pytest.mark.parametrize("theta", [-0.1, math.pi + 0.1])
    def test_theta_range(self, theta):
        with pytest.raises(ValueError):
            Orientation(theta)


class TestRabi:
    def test_parallel(self):
        r = angle_rabi(2.0, Orientation(0.0))
        assert r.Wpp == 2.0 and r.Wmm == -2.0
        assert r.Wp0 == r.W0m == r.Wm0 == r.W0p == 0

    def test_perpendicular(self):
        r = angle_rabi(2.0, Orientation(math.pi / 2, 0.0))
        assert abs(r.Wpp) < 1e-15
        assert r.Wp0 == pytest.approx(2.0 / math.sqrt(2))

    def test_norm_example(self):
        assert angle_rabi(3.0, Orientation(0.7, 1.3)).norm2() == pytest.approx(18.0, rel=1e-14)

    @given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(1e-3, 1e6))
    def test_norm_and_signs(self, th, ph, w):
        r = angle_rabi(w, Orientation(th, ph))
        assert r.norm2() == pytest.approx(2 * w * w, rel=1e-12)
        assert r.Wpp == -r.Wmm
        assert r.Wp0 == r.W0m and r.Wm0 == r.W0p
        assert r.Wp0 == pytest.approx(w / math.sqrt(2) * math.sin(th) * np.exp(-1j * ph), abs=1e-12 * w)


class TestTensors:
    def test_basis_round_trip(self, rng):
        T = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert np.max(np.abs(PolarTensor3.from_cartesian(T).to_cartesian() - T)) < 1e-14
        P = PolarTensor3(T)
        assert np.max(np.abs(PolarTensor3.from_cartesian(P.to_cartesian()).data - T)) < 1e-14

    def test_diagonal_cartesian_form(self):
        a, b, c = 1.5 + 0.2j, 0.7 - 0.1j, 2.0
        C = PolarTensor3.diagonal(a, b, c).to_cartesian()
        expected = np.array([[(a + b) / 2, -1j * (a - b) / 2, 0], [1j * (a - b) / 2, (a + b) / 2, 0], [0, 0, c]])
        assert np.allclose(C, expected, atol=1e-15)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            PolarTensor3(np.eye(2))

    def test_cross_parallel(self):
        assert np.allclose(cross_tensor(Orientation(0.0), 2j).data, np.diag([2j, -2j, 0]))

    def test_cross_perpendicular(self):
        T = cross_tensor(Orientation(math.pi / 2, 0.0), 2.0).data
        assert np.allclose(np.diag(T), 0)
        assert np.allclose(np.abs(T[:2, 2]), 2 / math.sqrt(2))
        assert np.allclose(np.abs(T[2, :2]), 2 / math.sqrt(2))

    def test_cross_azimuth_phase(self):
        th, ph, ph0 = 0.8, 0.3, 1.1
        A = cross_tensor(Orientation(th, ph), 1.0).data
        B = cross_tensor(Orientation(th, ph + ph0), 1.0).data
        assert B[0, 0] == pytest.approx(A[0, 0]) and B[1, 1] == pytest.approx(A[1, 1])
        assert B[0, 2] == pytest.approx(A[0, 2] * np.exp(-1j * ph0))
        assert B[1, 2] == pytest.approx(A[1, 2] * np.exp(1j * ph0))

    def test_ee_parallel_is_lorentzian_on_z(self, params, broad):
        det = ProbeDetunings.from_delta(-3e4 * params.gamma2)
        q = polarizability_quartet(params, det, broadening=broad)
        D42, D34, D31, D21 = denominators(params, det, broad.gammap)
        alpha0 = 1j * params.d34**2 * 0.5 / (2 * HBAR * D34)
        T = ee_tensor(Orientation(0.0), q.aEE, abs(params.Omegac), D42, D34).data
        assert np.allclose(T - np.diag(np.diag(T)), 0)
        assert T[0, 0] == pytest.approx(q.aEE, rel=1e-13)
        assert T[1, 1] == pytest.approx(q.aEE, rel=1e-13)
        assert T[2, 2] == pytest.approx(alpha0, rel=1e-12)

    def test_bb_parallel_matches_scalar(self, params, broad):
        det = ProbeDetunings.from_delta(-3e4 * params.gamma2)
        q = polarizability_quartet(params, det, broadening=broad)
        _, _, D31, D21 = denominators(params, det, broad.gammap)
        T = bb_tensor(Orientation(0.0), q.aBB, abs(params.Omegac), D31, D21).data
        assert T[0, 0] == pytest.approx(q.aBB, rel=1e-13)

    def test_no_coupling_gives_isotropic(self):
        T = ee_tensor(Orientation(1.0, 0.4), 2 + 1j, 0.0, 1 + 1j, 2 - 1j)
        assert np.allclose(T.data, (2 + 1j) * np.eye(3))

    def test_zero_product(self):
        with pytest.raises(SingularCorrectionError):
            ee_tensor(Orientation(0.3), 1.0, 1.0, 0.0, 1.0)


class TestAngleIndex:
    def test_parallel_equals_axial_index(self, rng):
        for _ in range(50):
            e, m, xe, xh = _rand_medium(rng)
            n35 = index_vs_angle(e, m, xe, xh, 0.0)
            n6 = refractive_index(MediumResponse(e, m, xe, xh)).n
            assert abs(n35 - n6) <= 1e-14 * max(1.0, abs(n6))

    def test_perpendicular(self):
        e, m, xe, xh = 1.2 + 0.1j, 0.9 + 0.05j, 0.2j, -0.1j
        assert index_vs_angle(e, m, xe, xh, math.pi / 2) == pytest.approx(np.sqrt(e * m - xe * xh))

    def test_equal_couplings_angle_independent(self):
        th = np.linspace(0, math.pi, 7)
        n = index_vs_angle(1.1 + 0.1j, 0.8 + 0.1j, 0.3j, 0.3j, th)
        assert np.allclose(n, n[0], rtol=1e-14)

    def test_polarization_degeneracy(self, params, broad):
        from negrefract import local_field_correct

        det = ProbeDetunings.from_delta(-0.035 * broad.gammap)
        m = local_field_correct(polarizability_quartet(params, det, broadening=broad), 5e16)
        assert refractive_index(m, "+").n == refractive_index(mirror_handedness(m), "-").n


class TestHelmholtz:
    def test_vacuum(self, rng):
        k = rng.normal(size=3)
        r = helmholtz_index_numeric(I3(1), I3(1), I3(0), I3(0), k)
        assert np.allclose(np.sort(r.roots.real), [-1, -1, 1, 1], atol=1e-12)
        assert np.allclose(r.roots.imag, 0, atol=1e-12)
        assert r.physical == pytest.approx(1.0)

    def test_axial_oracle(self, rng):
        for _ in range(50):
            e, m, xe, xh = _rand_medium(rng)
            r = helmholtz_index_numeric(I3(e), I3(m), cross_tensor(Orientation(0), xe),
                                        cross_tensor(Orientation(0), xh), [0, 0, 1])
            med = MediumResponse(e, m, xe, xh)
            # e+ sees the couplings as given, e- sees them sign flipped
            for n6 in (refractive_index(med, "+").n, refractive_index(mirror_handedness(med), "-").n):
                assert np.min(np.abs(r.roots - n6)) < 1e-10 * max(1.0, abs(n6))
                assert abs(r.physical - n6) < 1e-10 * max(1.0, abs(n6))

    def test_angle_oracle(self, rng):
        for _ in range(50):
            e, m, xe, xh = _rand_medium(rng)
            o = Orientation(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            r = helmholtz_index_numeric(I3(e), I3(m), cross_tensor(o, xe), cross_tensor(o, xh), [0, 0, 1])
            n35 = index_vs_angle(e, m, xe, xh, o.theta)
            assert abs(r.physical - n35) < 1e-10 * max(1.0, abs(n35))

    def test_reciprocal_roots_pair_up(self, rng):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        eps = np.eye(3) * 2 + 0.1 * (A + A.T)
        B = rng.normal(size=(3, 3))
        mu = np.eye(3) + 0.1 * (B + B.T)
        r = helmholtz_index_numeric(PolarTensor3.from_cartesian(eps), PolarTensor3.from_cartesian(mu),
                                    I3(0), I3(0), rng.normal(size=3))
        for x in r.roots:
            assert np.min(np.abs(r.roots + x)) < 1e-8 * abs(x)

    def test_continuity_selection(self):
        r = helmholtz_index_numeric(I3(1), I3(1), I3(0), I3(0), [0, 0, 1], previous=-0.9)
        # both passive candidates are real here; continuity picks the backward one
        assert r.physical == pytest.approx(-1.0)

    def test_singular_permeability(self):
        with pytest.raises(SingularPermeabilityError):
            helmholtz_index_numeric(I3(1), PolarTensor3.diagonal(1, 1, 0), I3(0), I3(0), [0, 0, 1])

    def test_reduced_order_flag(self):
        # k along z with eps_zz = 0 kills the leading coefficient
        eps = PolarTensor3.diagonal(1, 1, 0)
        r = helmholtz_index_numeric(eps, I3(1), I3(0), I3(0), [1, 0, 0])
        assert r.reduced_order or r.roots.size == 4

    def test_circular_basis_unitary(self):
        assert np.allclose(CIRCULAR_BASIS.conj().T @ CIRCULAR_BASIS, np.eye(3))
