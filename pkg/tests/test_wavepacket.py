"""Wave-packet realization: band placement, slaving, truncation, exact d/dt.

Most checks are structural identities that must hold to roundoff: reality of
the realized fields, the constraint relation between the blocks, covariance
under envelope phase rotation, exact support of the truncated realization,
and — the sharpest one — agreement between the spectral index-shift
composition and a direct pointwise evaluation of the slow/fast product.
The time-derivative builder is cross-checked against a central finite
difference of the full construction, envelope evolution included.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcwave.dispersion import ModelParams
from arcwave.equations import TruncatedSystem
from arcwave.nls import EnvelopeField, nls_coefficients, second_order_coefficients
from arcwave.spectral import Grid1D, derivative
from arcwave.wavepacket import (
    band_mask,
    build,
    build_time_derivative,
    envelope_rhs,
    fourier_truncate,
    second_order_corrections,
    wave_packet,
)

EPS = 0.1
PARAMS = ModelParams(k0=2.0, b=0.05)
CARRIER = Grid1D(2048, 2 * np.pi * 56)
ENVELOPE = Grid1D(256, EPS * CARRIER.length)
DELTA0 = 0.0999


def sech_envelope(chirp: float = 0.3) -> EnvelopeField:
    xi = ENVELOPE.alpha - ENVELOPE.length / 2
    return EnvelopeField(ENVELOPE, np.exp(1j * chirp * xi) / np.cosh(xi))


def random_envelope(grid: Grid1D, seed: int) -> EnvelopeField:
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
    return EnvelopeField(grid, vals)


def state_matrix(fields) -> np.ndarray:
    return np.array([f.coefficients for f in fields])


class TestRealization:
    def test_zero_envelope_realizes_to_zero(self):
        packet = wave_packet(EnvelopeField(ENVELOPE, np.zeros(256, complex)),
                             EPS, PARAMS)
        for f in build(packet, CARRIER, 0.0):
            assert np.all(f.coefficients == 0.0)

    def test_realized_fields_are_real(self):
        packet = wave_packet(sech_envelope(), EPS, PARAMS)
        for f in build(packet, CARRIER, 0.6):
            scale = max(1.0, float(np.max(np.abs(f.coefficients))))
            assert f.is_real
            assert f.hermitian_defect() <= 1e-14 * scale

    def test_positive_component_needs_corrections(self):
        """Without the quadratic response there is nothing of order eps in u_{+1}."""
        bare = wave_packet(sech_envelope(), EPS, PARAMS, corrections=False)
        _, u_p1, _, _ = build(bare, CARRIER, 0.0)
        assert np.all(u_p1.coefficients == 0.0)

    def test_flat_envelope_places_carrier_modes_exactly(self):
        """A constant envelope excites only the five harmonic modes, with
        amplitudes readable straight off the quadratic-response coefficients."""
        c0 = 0.8 - 0.3j
        t = 0.7
        packet = wave_packet(EnvelopeField(ENVELOPE, np.full(256, c0)), EPS, PARAMS)
        u_m1, u_p1, _, _ = build(packet, CARRIER, t)
        k0, w0 = PARAMS.k0, PARAMS.omega0
        c = second_order_coefficients(k0, PARAMS.b)

        lead = EPS * c0 * np.exp(-1j * w0 * t)
        assert abs(u_m1.coefficient_at(k0) - lead) < 1e-15
        assert abs(u_m1.coefficient_at(-k0) - np.conj(lead)) < 1e-15
        assert abs(u_m1.coefficient_at(0.0) - EPS**2 * c["c_m0"] * abs(c0) ** 2) < 1e-15
        harm = EPS**2 * c["c_m2"] * c0**2 * np.exp(-2j * w0 * t)
        assert abs(u_m1.coefficient_at(2 * k0) - harm) < 1e-15
        assert abs(u_p1.coefficient_at(0.0) - EPS**2 * c["c_p0"] * abs(c0) ** 2) < 1e-15
        harm_p = EPS**2 * c["c_p2"] * c0**2 * np.exp(-2j * w0 * t)
        assert abs(u_p1.coefficient_at(-2 * k0) - np.conj(harm_p)) < 1e-15

        assert np.count_nonzero(u_m1.coefficients) == 5
        assert np.count_nonzero(u_p1.coefficients) == 3

    def test_two_scale_sampling_matches_direct_evaluation(self):
        """The index-shift/phase composition equals literally evaluating
        eps * A(eps*(alpha - cg t)) e^{i(k0 alpha - omega0 t)} + c.c."""
        t = 2.1
        A = random_envelope(ENVELOPE, 11)
        packet = wave_packet(A, EPS, PARAMS, corrections=False)
        u_m1 = build(packet, CARRIER, t)[0]

        g = np.fft.fft(A.values) / ENVELOPE.n_points
        kappa = ENVELOPE.mode_numbers * CARRIER.fundamental
        slow = np.exp(1j * np.outer(CARRIER.alpha - PARAMS.cg * t, kappa)) @ g
        direct = EPS * slow * np.exp(1j * (PARAMS.k0 * CARRIER.alpha - PARAMS.omega0 * t))
        expected = 2.0 * direct.real
        assert np.max(np.abs(u_m1.values_real() - expected)) < 1e-11


class TestSlaving:
    def test_realized_state_sits_on_constraint_manifold(self):
        system = TruncatedSystem(CARRIER, PARAMS.b)
        packet = wave_packet(sech_envelope(), EPS, PARAMS)
        for candidate in (packet, fourier_truncate(packet, DELTA0)):
            d1_defect, d2_defect = system.consistency_defect(
                state_matrix(build(candidate, CARRIER, 0.3)))
            assert np.max(np.abs(d1_defect)) < 1e-15
            assert np.max(np.abs(d2_defect)) < 1e-15

    def test_block_difference_relation(self):
        packet = wave_packet(sech_envelope(), EPS, PARAMS, corrections=False)
        u_m1, u_p1, u_m2, u_p2 = build(packet, CARRIER, 0.0)
        lhs = u_m2 - u_p2
        rhs = derivative(u_m1 - u_p1, 2)
        assert np.max(np.abs((lhs - rhs).coefficients)) < 1e-16


class TestCorrections:
    def test_profiles_scale_quadratically(self):
        A = sech_envelope()
        doubled = EnvelopeField(ENVELOPE, 2.0 * A.values)
        small = second_order_corrections(A, PARAMS)
        big = second_order_corrections(doubled, PARAMS)
        for m in (-1, 1):
            assert np.array_equal(big.A_m0[m], 4.0 * small.A_m0[m])
            assert np.array_equal(big.A_m2[m], 4.0 * small.A_m2[m])

    def test_gauge_covariance(self):
        """Rotating the envelope phase rotates each harmonic with its own
        multiplicity and leaves the mean flow untouched.  A band-limited
        envelope keeps the harmonic bands disjoint so the comparison is
        clean mode by mode."""
        phi = 0.7
        rng = np.random.default_rng(5)
        g = np.zeros(ENVELOPE.n_points, dtype=complex)
        narrow = np.abs(ENVELOPE.mode_numbers) <= 20
        g[narrow] = np.exp(2j * np.pi * rng.random(int(narrow.sum())))
        g[narrow] /= 1.0 + np.abs(ENVELOPE.mode_numbers[narrow]) ** 2
        A = EnvelopeField(ENVELOPE, np.fft.ifft(g) * ENVELOPE.n_points)
        rotated = EnvelopeField(ENVELOPE, A.values * np.exp(1j * phi))
        base = build(wave_packet(A, EPS, PARAMS), CARRIER, 0.0)
        rot = build(wave_packet(rotated, EPS, PARAMS), CARRIER, 0.0)
        k = CARRIER.wavenumbers
        lead = np.abs(k - PARAMS.k0) <= 0.5
        harm = np.abs(k - 2 * PARAMS.k0) <= 0.5
        mean = np.abs(k) <= 0.5
        for got, ref in zip(rot[:2], base[:2]):
            assert np.max(np.abs(got.coefficients[lead]
                                 - np.exp(1j * phi) * ref.coefficients[lead])) < 1e-13
            assert np.max(np.abs(got.coefficients[harm]
                                 - np.exp(2j * phi) * ref.coefficients[harm])) < 1e-13
            assert np.max(np.abs(got.coefficients[mean] - ref.coefficients[mean])) < 1e-13

    def test_corrections_flag(self):
        A = sech_envelope()
        assert wave_packet(A, EPS, PARAMS).corrections_enabled
        assert not wave_packet(A, EPS, PARAMS, corrections=False).corrections_enabled


class TestTruncation:
    def test_delta0_validation(self):
        packet = wave_packet(sech_envelope(), EPS, PARAMS)
        fourier_truncate(packet, DELTA0)  # fine: below k0/20
        with pytest.raises(ValueError, match="delta0"):
            fourier_truncate(packet, 0.15)
        with pytest.raises(ValueError, match="delta0"):
            fourier_truncate(packet, -0.01)

    def test_support_is_exactly_the_band_union(self):
        packet = fourier_truncate(wave_packet(sech_envelope(), EPS, PARAMS), DELTA0)
        u = build(packet, CARRIER, 0.0)
        keep = band_mask(CARRIER, PARAMS.k0, DELTA0)
        for f in u[:2]:
            assert np.all(f.coefficients[~keep] == 0.0)
        # The slaved block contains first-block products, so its support sits in
        # the doubled bands around harmonics up to |l| = 4 (up to the roundoff
        # scatter of the physical-space product).
        wide = band_mask(CARRIER, PARAMS.k0, 2 * DELTA0 + 1e-12, range(-4, 5))
        for f in u[2:]:
            assert np.max(np.abs(f.coefficients[~wide])) < 1e-17

    def test_truncation_tail_matches_spectral_prediction(self):
        """With corrections off, what truncation removes is exactly the
        out-of-band leading modes; halving eps doubles the kept envelope band,
        so a |j|^{-5} envelope spectrum shrinks the discarded tail by ~2^{4.5}."""
        L_env = 2 * np.pi * 8
        env = Grid1D(256, L_env)
        rng = np.random.default_rng(3)
        g = (1.0 + np.abs(env.mode_numbers)) ** -5.0 * np.exp(
            2j * np.pi * rng.random(env.n_points))
        A = EnvelopeField(env, np.fft.ifft(g) * env.n_points)

        rel = {}
        for eps, n_carrier in ((0.1, 1024), (0.05, 2048)):
            carrier = Grid1D(n_carrier, L_env / eps)
            packet = wave_packet(A, eps, PARAMS, corrections=False)
            full = build(packet, carrier, 0.0)
            cut = build(fourier_truncate(packet, DELTA0), carrier, 0.0)

            diff = np.sqrt(sum(
                np.sum(np.abs((a - b).coefficients) ** 2)
                for a, b in zip(full[:2], cut[:2])))
            dropped = np.abs(env.mode_numbers) * carrier.fundamental > DELTA0
            predicted = eps * np.sqrt(2.0 * np.sum(np.abs(g[dropped]) ** 2))
            assert abs(diff - predicted) < 1e-12 * predicted

            norm = np.sqrt(sum(np.sum(np.abs(f.coefficients) ** 2) for f in full[:2]))
            rel[eps] = diff / norm

        ratio = rel[0.1] / rel[0.05]
        assert 2**4 < ratio < 2**5.5


class TestNesting:
    def test_envelope_length_must_nest(self):
        bad = EnvelopeField(Grid1D(256, 0.9 * EPS * CARRIER.length),
                            np.ones(256, complex))
        with pytest.raises(ValueError, match="nest"):
            build(wave_packet(bad, EPS, PARAMS), CARRIER, 0.0)

    def test_carrier_must_hold_k0(self):
        params = ModelParams(k0=2.3, b=0.05)
        with pytest.raises(ValueError, match="not a mode"):
            build(wave_packet(sech_envelope(), EPS, params), CARRIER, 0.0)

    def test_carrier_must_hold_shifted_bands(self):
        small = Grid1D(512, 2 * np.pi * 56)
        env = Grid1D(256, EPS * small.length)
        packet = wave_packet(EnvelopeField(env, np.ones(256, complex)), EPS, PARAMS)
        with pytest.raises(ValueError, match="too small"):
            build(packet, small, 0.0)

    def test_eps_range(self):
        with pytest.raises(ValueError, match="eps"):
            wave_packet(sech_envelope(), 0.0, PARAMS)
        with pytest.raises(ValueError, match="eps"):
            wave_packet(sech_envelope(), 1.0, PARAMS)


class TestTimeDerivative:
    @pytest.mark.parametrize("truncate", [False, True])
    def test_matches_central_difference(self, truncate):
        """d/dt of the realization = chain rule through carrier phase,
        transport, and the modulation equation; checked against a finite
        difference in which the envelope itself is advanced."""
        coeffs = nls_coefficients(PARAMS.k0, PARAMS.b)
        A = sech_envelope()
        h, t = 1e-4, 0.37

        def packet_at(dt):
            advanced = A.values + (EPS**2 * dt) * envelope_rhs(
                A, coeffs.half_omega2, coeffs.nu)
            p = wave_packet(EnvelopeField(ENVELOPE, advanced), EPS, PARAMS)
            return fourier_truncate(p, DELTA0) if truncate else p

        plus = build(packet_at(+h), CARRIER, t + h)
        minus = build(packet_at(-h), CARRIER, t - h)
        exact = build_time_derivative(packet_at(0.0), CARRIER, t,
                                      coeffs.half_omega2, coeffs.nu)
        for i in range(4):
            fd = (plus[i] - minus[i]) * (1.0 / (2.0 * h))
            assert np.max(np.abs((fd - exact[i]).coefficients)) < 1e-7

    def test_derivative_fields_are_real(self):
        coeffs = nls_coefficients(PARAMS.k0, PARAMS.b)
        packet = wave_packet(sech_envelope(), EPS, PARAMS)
        for f in build_time_derivative(packet, CARRIER, 0.9,
                                       coeffs.half_omega2, coeffs.nu):
            scale = max(1.0, float(np.max(np.abs(f.coefficients))))
            assert f.hermitian_defect() <= 1e-14 * scale


class TestEnvelopeRHS:
    def test_plane_wave_formula(self):
        grid = Grid1D(128, 16.0)
        k = 3 * grid.fundamental
        A = EnvelopeField(grid, 0.7 * np.exp(1j * k * grid.alpha))
        got = envelope_rhs(A, half_omega2=0.4, nu=1.3)
        expected = (1j * 0.4 * -(k**2) + 1j * 1.3 * 0.7**2) * A.values
        # spectral leakage of the sampled exponential is amplified by k_max^2
        assert np.max(np.abs(got - expected)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), eps=st.floats(0.02, 0.4),
       with_corrections=st.booleans())
def test_random_packets_are_real_and_slaved(seed, eps, with_corrections):
    carrier = Grid1D(512, 2 * np.pi * 8)
    env = Grid1D(32, eps * carrier.length)
    packet = wave_packet(random_envelope(env, seed), eps, PARAMS,
                         corrections=with_corrections)
    fields = build(packet, carrier, 0.25)
    system = TruncatedSystem(carrier, PARAMS.b)
    for f in fields:
        scale = max(1.0, float(np.max(np.abs(f.coefficients))))
        assert f.hermitian_defect() <= 1e-13 * scale
    d1_defect, d2_defect = system.consistency_defect(state_matrix(fields))
    assert np.max(np.abs(d1_defect)) < 1e-12
    assert np.max(np.abs(d2_defect)) < 1e-12
