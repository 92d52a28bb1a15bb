import math

import mpmath
import numpy as np
import pytest

from xplab.counterexample import (
    TWO_PI,
    CoeffMatrix,
    build_instance,
    closed_form_difference,
    closed_form_ratio,
    difference_matrix,
    eta,
    eta_deriv,
    eta_field,
    eta_periodized,
    growth_ratio,
    measured_sup_norm,
    phi_from_coeffs,
    scale_instance,
    sup_norm_estimate,
    sup_norm_refinement,
    triangular_coeffs,
    upper_triangular_ones,
)
from xplab.hermitian import schatten_norm, singular_values
from xplab.opint import doi
from xplab.spectral import from_hermitian


class TestEta:
    def test_value_at_zero(self):
        assert eta(0.0) == 1.0

    def test_lattice_zeros(self):
        ks = np.arange(1, 21)
        assert np.abs(eta(TWO_PI * ks)).max() < 1e-12
        assert np.abs(eta(-TWO_PI * ks)).max() < 1e-12

    def test_value_at_pi(self):
        assert eta(math.pi) == pytest.approx(4.0 / math.pi**2, abs=1e-15)

    def test_bounded_by_one(self):
        x = np.linspace(-500.0, 500.0, 100001)
        vals = eta(x)
        assert np.all(vals >= 0.0)
        assert np.all(vals <= 1.0 + 1e-15)

    def test_series_matches_closed_form_at_cutoff(self):
        # both branches agree where they meet, up to the 1 - cos cancellation
        # noise of the closed form (~eps / x^2 relative)
        for x in (1.0000001e-3, 2e-3, 1e-2):
            direct = 2.0 * (1.0 - math.cos(x)) / x**2
            series = 1.0 - x**2 / 12.0 + x**4 / 360.0
            assert series == pytest.approx(direct, rel=2e-16 / x**2 + 1e-12)
            assert eta(x) == direct

    def test_derivative_finite_differences(self):
        for x in (0.0, 1e-4, 0.5, math.pi, TWO_PI, -7.3):
            h = 1e-6
            fd = (eta(x + h) - eta(x - h)) / (2.0 * h)
            assert eta_deriv(x) == pytest.approx(fd, abs=5e-9)

    def test_shifted_field_invariants(self):
        shift = 3.0 * TWO_PI
        f = eta_field(shift)
        assert f(shift) == 1.0
        for k in (-2, -1, 1, 2, 5):
            assert abs(f(shift + TWO_PI * k)) < 1e-12
        assert f.shift == shift


class TestEtaPeriodized:
    def test_requires_lattice_period(self):
        with pytest.raises(ValueError):
            eta_periodized(0.0, 10.0)

    def test_interpolation_preserved(self):
        p = 16 * math.pi
        assert eta_periodized(0.0, p) == pytest.approx(1.0, abs=1e-14)
        for k in (1, 2, 3, -3):
            assert abs(eta_periodized(TWO_PI * k, p)) < 1e-14

    def test_periodicity(self):
        p = 32 * math.pi
        x = np.linspace(-40.0, 40.0, 101)
        assert np.abs(eta_periodized(x, p) - eta_periodized(x + p, p)).max() < 1e-12

    def test_against_zeta_oracle(self):
        # sum_m 2(1 - cos u)/(u + P m)^2 = 2(1 - cos u)/P^2 *
        #   (zeta(2, u/P) + zeta(2, 1 - u/P)) for 0 < u < P
        p = 16 * math.pi
        mpmath.mp.dps = 30
        for u in (0.3, 2.0, math.pi, 11.0, 24.0):
            frac = u / p
            lattice = (mpmath.zeta(2, frac) + mpmath.zeta(2, 1 - frac)) / (p * p)
            want = 2.0 * (1.0 - math.cos(u)) * float(lattice)
            assert eta_periodized(u, p) == pytest.approx(want, rel=1e-12)

    def test_reduces_to_brute_force_sum(self):
        p = 16 * math.pi
        x = np.linspace(-p / 2, p / 2, 41)
        brute = sum(eta(x + p * m) for m in range(-4000, 4001))
        # brute tail is O(1/M); match accordingly
        assert np.abs(eta_periodized(x, p) - brute).max() < 1e-4


class TestCoeffsAndInterpolant:
    def test_triangular_small(self):
        assert np.array_equal(triangular_coeffs(1).entries, [[1.0]])
        assert np.array_equal(triangular_coeffs(2).entries, [[1.0, 1.0], [0.0, 1.0]])
        rows = triangular_coeffs(3).entries.sum(axis=1)
        assert list(rows.real) == [3.0, 2.0, 1.0]

    def test_sup_abs_stored(self):
        c = CoeffMatrix([[1.0, -3.0j], [0.0, 2.0]])
        assert c.sup_abs == 3.0

    def test_single_coefficient_interpolation(self):
        phi = phi_from_coeffs(CoeffMatrix([[1.0]]))
        assert complex(phi(0.0, 0.0)) == pytest.approx(1.0)
        assert abs(complex(phi(TWO_PI, 0.0))) < 1e-14

    def test_zero_coeffs_zero_field(self):
        phi = phi_from_coeffs(CoeffMatrix(np.zeros((2, 2))))
        x = np.linspace(-5, 20, 7)
        assert np.abs(np.asarray(phi(x[:, None], x[None, :]))).max() == 0.0

    def test_triangular_pattern_interpolation(self):
        phi = phi_from_coeffs(triangular_coeffs(3))
        assert complex(phi(TWO_PI * 1, TWO_PI * 2)) == pytest.approx(1.0, abs=1e-12)
        assert abs(complex(phi(TWO_PI * 2, TWO_PI * 1))) < 1e-12

    def test_interpolation_exact_on_all_indices(self):
        n = 5
        c = triangular_coeffs(n)
        phi = phi_from_coeffs(c)
        lattice = TWO_PI * np.arange(n)
        got = np.asarray(phi(lattice[:, None], lattice[None, :]))
        assert np.abs(got - c.entries).max() < 1e-12

    def test_outer_and_elementwise_paths_agree(self, rng):
        phi = phi_from_coeffs(triangular_coeffs(4))
        x = rng.uniform(-5, 30, size=6)
        z = rng.uniform(-5, 30, size=6)
        outer = np.asarray(phi(x[:, None], z[None, :]))
        element = np.array([[complex(phi(a, b)) for b in z] for a in x])
        assert np.abs(outer - element).max() < 1e-13


class TestSupNorm:
    def test_zero_field(self):
        phi = phi_from_coeffs(CoeffMatrix(np.zeros((2, 2))))
        assert sup_norm_estimate(phi, 5.0, 0.5) == 0.0

    def test_single_bump_peaks_at_one(self):
        phi = phi_from_coeffs(CoeffMatrix([[1.0]]))
        est = sup_norm_estimate(phi, 4.0 * math.pi, math.pi / 8)
        assert est == pytest.approx(1.0, abs=1e-12)

    def test_triangular_family_order_one(self):
        phi = phi_from_coeffs(triangular_coeffs(16))
        est = sup_norm_estimate(phi, TWO_PI * 16 + math.pi, math.pi / 8)
        assert 0.99 <= est <= 1.0 + 1e-9

    def test_generic_callable_path(self):
        est = sup_norm_estimate(lambda x, y: np.cos(x) * np.cos(y), 3.2, 0.01)
        assert est == pytest.approx(1.0, abs=1e-4)

    def test_refinement_stable(self):
        inst = build_instance(8)
        base, fine, rel = sup_norm_refinement(inst)
        assert rel < 0.01
        assert base == pytest.approx(1.0, abs=1e-9)


class TestInstance:
    def test_rejects_tiny(self):
        with pytest.raises(ValueError):
            build_instance(1)

    def test_operator_shapes_and_norms(self):
        inst = build_instance(6)
        assert np.allclose(np.diag(inst.A.mat).real, TWO_PI * np.arange(6))
        assert inst.C is inst.A
        delta = (inst.B1 - inst.B2).mat
        s = singular_values(delta)
        assert abs(s[0] - TWO_PI) < 1e-10
        assert np.all(s[1:] < 1e-10)  # rank one
        assert abs(schatten_norm(delta, 1) - TWO_PI) < 1e-10

    def test_psi_vanishes_on_b2(self):
        inst = build_instance(4)
        assert abs(complex(inst.f(1.0, 0.0, 2.0))) < 1e-12  # psi(0) = eta(-2pi) = 0

    def test_difference_closed_form(self):
        for n in (2, 3, 5, 8):
            inst = build_instance(n)
            diff = difference_matrix(inst)
            want = upper_triangular_ones(n) / n
            assert np.abs(diff - want).max() < 1e-10

    def test_difference_norm_n2(self):
        inst = build_instance(2)
        assert schatten_norm(difference_matrix(inst), 1) == pytest.approx(
            math.sqrt(5.0) / 2.0, abs=1e-10)

    def test_rank_one_reduction_lemma(self):
        # doi(phi, E_A, P, E_C) in the standard basis is the Schur product
        # {c_jk P_jk}; with the uniform witness every P_jk = 1/n
        for n in (2, 3, 5, 8):
            inst = build_instance(n)
            ea = from_hermitian(inst.A)
            p = inst.B1.mat / TWO_PI
            got = doi(inst.phi, ea, p, ea)
            want = triangular_coeffs(n).entries * p
            assert np.abs(got - want).max() < 1e-12


class TestRatios:
    def test_growth_ratio_n2_composition(self):
        inst = build_instance(2)
        s2 = measured_sup_norm(inst)
        want = (math.sqrt(5.0) / 2.0) / (TWO_PI * s2)
        assert growth_ratio(inst) == pytest.approx(want, rel=1e-9)

    def test_two_paths_agree(self):
        for n in (2, 4, 8, 16):
            inst = build_instance(n)
            assert growth_ratio(inst) == pytest.approx(closed_form_ratio(inst), rel=1e-9)

    def test_strictly_increasing_small_sizes(self):
        ratios = [growth_ratio(build_instance(n)) for n in (4, 8, 16, 32)]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))


class TestScaleInstance:
    def test_identity_scale(self):
        inst = build_instance(4)
        same = scale_instance(inst, 1.0)
        assert schatten_norm(difference_matrix(same), 1) == pytest.approx(
            schatten_norm(difference_matrix(inst), 1), abs=1e-12)

    def test_homogeneity_half(self):
        inst = build_instance(8)
        base = schatten_norm(difference_matrix(inst), 1)
        scaled = scale_instance(inst, 0.5)
        got = schatten_norm(difference_matrix(scaled), 1)
        assert abs(got - 0.5 * base) < 1e-10
        assert abs(schatten_norm((scaled.B1 - scaled.B2).mat, 1) - TWO_PI * 0.5) < 1e-10

    def test_eighth_scale_and_composition(self):
        inst = build_instance(4)
        base = schatten_norm(difference_matrix(inst), 1)
        eighth = scale_instance(scale_instance(inst, 0.5), 0.25)
        assert eighth.epsilon == pytest.approx(0.125)
        got = schatten_norm(difference_matrix(eighth), 1)
        assert abs(got - base / 8.0) < 1e-10

    def test_sup_norm_scales(self):
        inst = build_instance(4)
        scaled = scale_instance(inst, 0.5)
        assert measured_sup_norm(scaled) == pytest.approx(0.5 * measured_sup_norm(inst), rel=1e-12)

    def test_rejects_bad_scale(self):
        inst = build_instance(2)
        with pytest.raises(ValueError):
            scale_instance(inst, 0.0)

    def test_schedule_arithmetic(self):
        # with eps = 1/n the perturbation shrinks while the scaled difference
        # norm tracks eps * ||U_n||_1 / n
        for n in (4, 8, 16):
            inst = build_instance(n)
            scaled = scale_instance(inst, 1.0 / n)
            pert = schatten_norm((scaled.B1 - scaled.B2).mat, 1)
            assert pert == pytest.approx(TWO_PI / n, abs=1e-12)
            diff = schatten_norm(difference_matrix(scaled), 1)
            want = schatten_norm(upper_triangular_ones(n), 1) / n**2
            assert diff == pytest.approx(want, rel=1e-9)


class TestTriangularTraceNorm:
    def test_exact_singular_values(self):
        # singular values of the ones-triangle have the closed form
        # 1 / (2 sin((2k+1) pi / (2(2n+1))))
        for n in (3, 5, 8, 13):
            s = singular_values(upper_triangular_ones(n))
            k = np.arange(n)
            want = 1.0 / (2.0 * np.sin((2 * k + 1) * np.pi / (2.0 * (2 * n + 1))))
            assert np.allclose(np.sort(s), np.sort(want), rtol=1e-12)
