"""Resonance geometry: critical Bond numbers, zero structure, stability."""

import numpy as np
import pytest

from arcwave.dispersion import omega, omega_deriv
from arcwave.resonance import (
    Classification,
    CriticalBonds,
    ResonanceReport,
    critical_bonds,
    find_zeros,
    inflection_points,
    k1_of_b,
    nonresonance_check,
    r_general,
    r_hat,
    stability,
)

K0 = 2.0

# frozen against a 30-digit independent root-finder
B0_K0_2 = 0.2240838468714964
B1_K0_2 = 0.2396825653941108
K1_TABLE = {
    0.2: 2.49556787092591,
    0.1: 4.3001037060984473,
    0.05: 6.723919885904251,
    0.01: 24.414522841227662,
    0.005: 46.008408153368201,
    1e-4: 2145.6901942405879,
}
MIRROR_ZP = 1.5763166784932528   # b = 1/4.25
MIRROR_ZM = 0.42368332150674721
MIDBAND_ZP = 1.743326535374129   # b = (b0+b1)/2
INFLECTION_TABLE = {
    0.05: (2.35530786916, 4.74695259005),
    0.1: (1.84431146252, 3.79226457642),
    0.2: (1.26870904176, 3.12474171746),
    0.3: (0.647237363408, 2.76695969464),
}
B_CURVATURE_FLAT = 0.080808958177103266   # omega''(2, b) = 0
B_SECOND_HARMONIC = 0.11220496039122606   # omega(4, b) = 2*omega(2, b)


def test_r_hat_vanishes_at_k0_and_is_vectorized():
    ks = np.array([K0, 3.0, 0.7])
    vals = r_hat(ks, 0.17, K0)
    assert vals.shape == (3,)
    assert vals[0] == pytest.approx(0.0, abs=1e-15)


def test_r_hat_zero_pairs_mirror_about_half_k0():
    # if z solves omega(z)+omega(k0-z)=omega(k0) then so does k0-z
    b = 1 / 4.25
    assert r_hat(MIRROR_ZP, b, K0) == pytest.approx(0.0, abs=1e-12)
    assert r_hat(K0 - MIRROR_ZP, b, K0) == pytest.approx(0.0, abs=1e-12)
    assert MIRROR_ZP + MIRROR_ZM == pytest.approx(K0, abs=1e-13)


def test_r_general_sign_conventions():
    b, k, l, m = 0.09, 3.1, 1.2, 1.9
    v = r_general(-1, -1, k, l, m, b)
    assert v.real == 0.0
    assert v.imag == pytest.approx(-omega(k, b) + omega(l, b) + omega(m, b), rel=1e-14)
    assert r_general(1, 1, k, l, m, b) == pytest.approx(
        1j * (omega(k, b) + omega(l, b) - omega(m, b)), rel=1e-14)


class TestCriticalBonds:
    def test_frozen_values(self):
        cb = critical_bonds(K0)
        assert cb.b0 == pytest.approx(B0_K0_2, abs=1e-12)
        assert cb.b1 == pytest.approx(B1_K0_2, abs=1e-12)

    def test_b0_is_group_velocity_matching(self):
        cb = critical_bonds(K0)
        assert omega_deriv(K0, cb.b0, order=1) - 1.0 == pytest.approx(0.0, abs=1e-10)

    def test_b1_is_half_k0_tangency(self):
        cb = critical_bonds(K0)
        assert 2 * omega(K0 / 2, cb.b1) - omega(K0, cb.b1) == pytest.approx(0.0, abs=1e-10)

    def test_ordering_invariant(self):
        cb = critical_bonds(3.0)
        assert 0.0 < cb.b0 < cb.b1 < 1 / 3

    def test_ordering_breaks_down_at_large_k0(self):
        # the two critical curves cross near k0 ~ 3.2; past that the b0<b1
        # ordering encoded in the dataclass no longer holds and construction
        # must refuse rather than hand back a misordered pair
        with pytest.raises(ValueError):
            critical_bonds(5.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            CriticalBonds(b0=0.25, b1=0.23)


class TestK1:
    @pytest.mark.parametrize("b,expected", sorted(K1_TABLE.items()))
    def test_frozen_table(self, b, expected):
        assert k1_of_b(K0, b) == pytest.approx(expected, rel=1e-8)

    def test_small_bond_asymptote(self):
        # k1 ~ (2*omega(k0)/ (3*k0))^2 / b... checked through the frozen ratio
        b = 1e-4
        k1 = k1_of_b(K0, b)
        ratio = b * k1 * 9 * K0 / (4 * np.tanh(K0))
        assert ratio == pytest.approx(1.001590211, abs=1e-6)

    @pytest.mark.parametrize("b", [0.0, 0.23, 0.5, -0.01])
    def test_domain_errors(self, b):
        with pytest.raises(ValueError):
            k1_of_b(K0, b)

    def test_k1_actually_solves(self):
        k1 = k1_of_b(K0, 0.07)
        assert r_hat(k1, 0.07, K0) == pytest.approx(0.0, abs=1e-10)


class TestInflectionPoints:
    @pytest.mark.parametrize("b,expected", sorted(INFLECTION_TABLE.items()))
    def test_frozen_landmarks(self, b, expected):
        pts = inflection_points(b)
        assert pts.k3 == pytest.approx(expected[0], rel=1e-9)
        assert pts.k4 == pytest.approx(expected[1], rel=1e-9)
        assert omega_deriv(pts.k3, b, order=2) == pytest.approx(0.0, abs=1e-9)
        assert omega_deriv(pts.k4, b, order=3) == pytest.approx(0.0, abs=1e-9)

    def test_domain(self):
        for b in (0.0, 1 / 3, 0.4):
            with pytest.raises(ValueError):
                inflection_points(b)


class TestFindZeros:
    def test_subcritical_bond_two_zeros(self):
        rep = find_zeros(K0, 0.2, 60.0)
        assert rep.classification is Classification.TWO_ZEROS
        assert rep.k1 == pytest.approx(K1_TABLE[0.2], rel=1e-9)
        assert K0 in rep.zeros

    def test_tangency_at_k0(self):
        rep = find_zeros(K0, B0_K0_2, 60.0)
        assert rep.classification is Classification.TANGENCY
        assert any(abs(d - K0) < 1e-5 for d in rep.double_zeros)

    def test_tangency_at_half_k0(self):
        rep = find_zeros(K0, B1_K0_2, 60.0)
        assert rep.classification is Classification.TANGENCY
        assert any(abs(d - K0 / 2) < 1e-5 for d in rep.double_zeros)

    def test_extra_pair_in_critical_band(self):
        rep = find_zeros(K0, (B0_K0_2 + B1_K0_2) / 2, 60.0)
        assert rep.classification is Classification.EXTRA_ZERO_PAIR
        assert any(abs(z - MIDBAND_ZP) < 1e-8 for z in rep.zeros)

    def test_extra_pair_at_quarter_bond(self):
        rep = find_zeros(K0, 1 / 4.25, 60.0)
        assert rep.classification is Classification.EXTRA_ZERO_PAIR
        assert any(abs(z - MIRROR_ZP) < 1e-8 for z in rep.zeros)

    @pytest.mark.parametrize("b", [0.28, 0.33])
    def test_supercritical_only_trivial(self, b):
        rep = find_zeros(K0, b, 60.0)
        assert rep.classification is Classification.ONLY_K0
        assert rep.zeros == (K0,)
        assert rep.k1 is None

    def test_zero_lists_sorted_and_validated(self):
        rep = find_zeros(K0, 0.05, 60.0)
        assert list(rep.zeros) == sorted(rep.zeros)
        with pytest.raises(ValueError):
            ResonanceReport(k0=K0, b=0.05, zeros=(3.0, 2.0), double_zeros=(),
                            classification=Classification.TWO_ZEROS)
        with pytest.raises(ValueError):
            ResonanceReport(k0=K0, b=0.05, zeros=(K0,), double_zeros=(),
                            classification=Classification.TWO_ZEROS, k1=1.0)

    def test_unsettled_tail_raises(self):
        # at b=1e-4 the first nontrivial zero sits near k=2146; a window that
        # stops at 100 must refuse rather than report "no zeros"
        with pytest.raises(ValueError):
            find_zeros(K0, 1e-4, 100.0)

    def test_kmax_validation(self):
        with pytest.raises(ValueError):
            find_zeros(K0, 0.2, 1.5)


class TestStability:
    def test_subcritical_triad_is_stable(self):
        v = stability(K0, 0.2)
        assert v.stable
        assert v.ratio == pytest.approx(-11.272797299870098, abs=0.05)
        assert v.characterization_agrees
        assert "triad" in v.reason

    def test_no_partner_branch(self):
        v = stability(K0, 0.3)
        assert v.stable
        assert v.ratio is None
        assert "no resonant partner" in v.reason

    def test_between_critical_bonds_uses_contract_branch(self):
        v = stability(K0, (B0_K0_2 + B1_K0_2) / 2)
        assert v.stable and v.ratio is None


class TestNonresonance:
    def test_clean_case(self):
        res = nonresonance_check(K0, 0.2)
        assert res.ok
        assert res.failures == ()
        assert set(res.margins) == {"nrb1", "nrb3", "nrb4"}
        assert all(m > 1e-9 for m in res.margins.values())

    def test_group_velocity_margin_closes_at_b0(self):
        res = nonresonance_check(K0, B0_K0_2)
        assert not res.ok
        assert "nrb1" in res.failures
        assert res.margins["nrb1"] < 1e-9

    def test_flat_curvature_bond(self):
        res = nonresonance_check(K0, B_CURVATURE_FLAT)
        assert not res.ok
        assert res.failures == ("nrb3",)

    def test_second_harmonic_resonance(self):
        res = nonresonance_check(K0, B_SECOND_HARMONIC)
        assert not res.ok
        assert "nrb4" in res.failures
        # the violating harmonic is m=2: omega(2*k0) = 2*omega(k0)
        assert abs(omega(2 * K0, B_SECOND_HARMONIC) - 2 * omega(K0, B_SECOND_HARMONIC)) < 1e-12

    def test_margin_values(self):
        res = nonresonance_check(K0, 0.2)
        assert res.margins["nrb1"] == pytest.approx(
            abs(omega_deriv(K0, 0.2, order=1) - 1.0), rel=1e-14)
        assert res.margins["nrb3"] == pytest.approx(
            abs(omega_deriv(K0, 0.2, order=2)), rel=1e-14)
