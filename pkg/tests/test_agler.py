"""Tests for certified pencil kernel decompositions."""

import numpy as np
import pytest

from kreinsys.agler import (
    AglerDecomposition,
    DecompositionComponent,
    construct_pencil_decomposition,
    derived_zero_identities,
    epsilon_bounds,
    gram_feasibility_search,
    kernel_residual,
    prop2_functions,
    transform_identities,
    verify_kernel_identity,
)
from kreinsys.systems import system_operators
from kreinsys.transfer import TruncatedOperatorSeries

from oracles import kernel_sum
from test_systems import hyperbolic_system, matrix_unit_system


def polydisk_pairs(n, radius, count, seed):
    rng = np.random.default_rng(seed)
    mk = lambda: (radius / np.sqrt(2)) * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
    return [(mk(), mk()) for _ in range(count)]


def hyperbolic_ops():
    s, _ = hyperbolic_system()
    return system_operators(s)


def matrix_unit_ops():
    s, _ = matrix_unit_system()
    return system_operators(s)


class TestEpsilonBounds:
    def test_matrix_unit(self):
        lo, hi = epsilon_bounds(matrix_unit_ops())
        assert lo == pytest.approx(1.0, abs=1e-10)
        assert hi == pytest.approx(2.0, abs=1e-10)

    def test_hyperbolic(self):
        lo, hi = epsilon_bounds(hyperbolic_ops())
        assert lo == pytest.approx(2.0, abs=1e-10)
        assert hi == pytest.approx(2.0, abs=1e-10)

    def test_zero_pencil(self):
        from kreinsys.systems import SystemOperatorTuple

        g = SystemOperatorTuple((np.zeros((2, 2)), np.zeros((2, 2))), 1, 1, 1)
        assert epsilon_bounds(g) == (0.0, 0.0)

    def test_lower_never_exceeds_upper(self):
        from kreinsys.systems import random_jconservative

        for seed in range(5):
            s, _ = random_jconservative(n=2, state_dim=2, input_dim=2, seed=seed)
            lo, hi = epsilon_bounds(system_operators(s))
            assert lo <= hi + 1e-12


class TestConstruction:
    def test_scale_below_feasible_raises(self):
        with pytest.raises(ValueError, match="minimal feasible scale is 2"):
            construct_pencil_decomposition(hyperbolic_ops(), 1.5, 8)

    def test_scale_below_one_raises(self):
        with pytest.raises(ValueError, match="at least 1|below 1"):
            construct_pencil_decomposition(matrix_unit_ops(), 0.5, 8)

    def test_hyperbolic_structure(self):
        dec = construct_pencil_decomposition(hyperbolic_ops(), 2.0, 12)
        c = dec.components[0]
        # degree-0 block is (eps/sqrt(N)) I = 2I in the first two rows
        f0 = c.coefficient((0,))
        np.testing.assert_allclose(f0[0:2], 2.0 * np.eye(2), atol=1e-14)
        # defect rows square to 4I - G*G
        d_rows = c.coefficient((1,))[2:4]
        np.testing.assert_allclose(
            d_rows @ d_rows, [[15 / 8, -15 / 8], [-15 / 8, 15 / 8]], atol=1e-12
        )
        # negative rows are sqrt(3) z^n I
        np.testing.assert_allclose(
            f0[c.m_plus : c.m_plus + 2], np.sqrt(3) * np.eye(2), atol=1e-14
        )
        assert c.m_plus == 13 * 2 and c.m_minus == 13 * 2

    def test_matrix_unit_structure(self):
        dec = construct_pencil_decomposition(matrix_unit_ops(), 2.0, 6)
        c0 = dec.components[0]
        # D_1^2 = 2I - 2 E_11 = 2 E_22
        d_rows = c0.coefficient((1, 0))[2:4]
        np.testing.assert_allclose(d_rows @ d_rows, [[0, 0], [0, 2]], atol=1e-12)
        # cross rows carry z_1 G_1 - z_2 G_2
        row = 7 * 2
        np.testing.assert_allclose(
            c0.coefficient((1, 0))[row : row + 2], [[1, 0], [0, 0]], atol=1e-14
        )
        np.testing.assert_allclose(
            c0.coefficient((0, 1))[row : row + 2], [[0, 0], [0, -1]], atol=1e-14
        )
        # component 2 has no cross rows
        assert dec.components[1].m_plus == 7 * 2

    def test_matrix_unit_exact_branch(self):
        dec = construct_pencil_decomposition(matrix_unit_ops(), 1.0, 4)
        assert dec.exact and dec.eta == 0.0 and dec.degree == 0
        assert dec.signature[1] == 0
        for k, c in enumerate(dec.components):
            assert c.m_minus == 0
            np.testing.assert_array_equal(c.coefficient((0, 0)), matrix_unit_ops()[k])

    def test_zero_pencil_scale_one_uses_generic_rows(self):
        from kreinsys.systems import SystemOperatorTuple

        g = SystemOperatorTuple((np.zeros((2, 2)),), 1, 1, 1)
        dec = construct_pencil_decomposition(g, 1.0, 6)
        assert not dec.exact
        c = dec.components[0]
        assert c.m_minus == 0  # eps = 1 leaves no negative rows
        # defect rows at every degree up to d, value I/sqrt(N) = I
        np.testing.assert_allclose(c.coefficient((3,))[6:8], np.eye(2), atol=1e-14)
        assert verify_kernel_identity(g, dec, polydisk_pairs(1, 0.5, 50, 0)) <= dec.eta


class TestKernelIdentity:
    def test_hyperbolic_certified(self):
        g = hyperbolic_ops()
        dec = construct_pencil_decomposition(g, 2.0, 12)
        res = verify_kernel_identity(g, dec, polydisk_pairs(1, 0.5, 200, 1), enforce=True)
        assert res <= dec.eta <= 1e-6

    def test_matrix_unit_certified(self):
        g = matrix_unit_ops()
        dec = construct_pencil_decomposition(g, 2.0, 12)
        res = verify_kernel_identity(g, dec, polydisk_pairs(2, 0.5, 200, 2), enforce=True)
        assert res <= dec.eta <= 1e-6

    def test_exact_branch_residual_is_machine_zero(self):
        g = matrix_unit_ops()
        dec = construct_pencil_decomposition(g, 1.0, 4)
        assert verify_kernel_identity(g, dec, polydisk_pairs(2, 0.5, 100, 3)) <= 1e-14

    def test_residual_matches_brute_force_oracle(self):
        # the packaged verifier must agree with an independent sum
        g = matrix_unit_ops()
        dec = construct_pencil_decomposition(g, 2.0, 5)
        mask_full = dec.negative_row_mask()
        ranges = dec.component_row_ranges()
        masks = [mask_full[lo:hi] for lo, hi in ranges]
        for lam, z in polydisk_pairs(2, 0.5, 20, 4):
            fl = dec.evaluate(lam)
            fz = dec.evaluate(z)
            acc = kernel_sum(lam, z, fl, fz, masks)
            lg, zg = g.pencil(lam), g.pencil(z)
            oracle = np.linalg.norm(
                np.eye(2) - lg.conj().T @ zg - acc, 2
            )
            assert kernel_residual(g, dec, lam, z) == pytest.approx(oracle, abs=1e-13)

    def test_hyperbolic_residual_matches_closed_form(self):
        # R(l, z) = w^{d+1} (D^2 - 3I) for N = 1, eps = 2
        g = hyperbolic_ops()
        d = 7
        dec = construct_pencil_decomposition(g, 2.0, d)
        d2 = 4 * np.eye(2) - g[0].conj().T @ g[0]
        for lam, z in polydisk_pairs(1, 0.5, 20, 5):
            w = np.conj(lam[0]) * z[0]
            expected = np.linalg.norm(w ** (d + 1) * (d2 - 3 * np.eye(2)), 2)
            assert kernel_residual(g, dec, lam, z) == pytest.approx(expected, abs=1e-13)

    def test_zero_pair_measures_semiunitarity(self):
        g = hyperbolic_ops()
        dec = construct_pencil_decomposition(g, 2.0, 10)
        z0 = np.zeros(1)
        assert kernel_residual(g, dec, z0, z0) <= 1e-10

    def test_degree_bump_shrinks_residual(self):
        g = hyperbolic_ops()
        pairs = polydisk_pairs(1, 0.5, 100, 6)
        r12 = verify_kernel_identity(g, construct_pencil_decomposition(g, 2.0, 12), pairs)
        r14 = verify_kernel_identity(g, construct_pencil_decomposition(g, 2.0, 14), pairs)
        r24 = verify_kernel_identity(g, construct_pencil_decomposition(g, 2.0, 24), pairs)
        assert r12 / r14 >= 8.0
        assert r24 <= r12 / 8.0

    def test_scaling_safety(self):
        g = hyperbolic_ops()
        dec = construct_pencil_decomposition(g, 3.0, 12)
        verify_kernel_identity(g, dec, polydisk_pairs(1, 0.5, 100, 7), enforce=True)

    def test_pair_outside_radius_rejected(self):
        g = hyperbolic_ops()
        dec = construct_pencil_decomposition(g, 2.0, 4)
        with pytest.raises(ValueError, match="radius"):
            verify_kernel_identity(g, dec, [(np.array([0.7]), np.array([0.1]))])

    def test_enforce_flags_corruption(self):
        g = matrix_unit_ops()
        dec = construct_pencil_decomposition(g, 1.0, 4)
        bad = _perturb_zero_coefficient(dec, 1e-3)
        with pytest.raises(ValueError, match="exceeds certificate"):
            verify_kernel_identity(g, bad, polydisk_pairs(2, 0.5, 20, 8), enforce=True)

    def test_tail_soundness_many_pairs(self):
        g = matrix_unit_ops()
        dec = construct_pencil_decomposition(g, 2.0, 6)
        res = verify_kernel_identity(g, dec, polydisk_pairs(2, 0.5, 1000, 9))
        assert res <= dec.eta


def _perturb_zero_coefficient(dec, size):
    c = dec.components[0]
    coeffs = dict(c.series.coefficients)
    zero = (0,) * dec.n
    m = np.array(coeffs[zero])
    m[0, 0] += size
    coeffs[zero] = m
    series = TruncatedOperatorSeries(
        n=dec.n, degree=dec.degree, coefficients=coeffs, tail=c.series.tail
    )
    comp = DecompositionComponent(
        index=c.index, m_plus=c.m_plus, m_minus=c.m_minus, series=series
    )
    return AglerDecomposition(
        n=dec.n,
        epsilon=dec.epsilon,
        components=(comp,) + dec.components[1:],
        radius=dec.radius,
        degree=dec.degree,
        eta=dec.eta,
        exact=dec.exact,
    )


class TestZeroIdentities:
    def test_constructed_decs_are_exact(self):
        for g, n in [(hyperbolic_ops(), 1), (matrix_unit_ops(), 2)]:
            dec = construct_pencil_decomposition(g, 2.0, 10)
            report = derived_zero_identities(dec)
            assert report["max"] <= 1e-12

    def test_exact_branch_report(self):
        dec = construct_pencil_decomposition(matrix_unit_ops(), 1.0, 4)
        report = derived_zero_identities(dec)
        assert report["max"] <= 1e-13
        assert report["f_minus"] == 0.0

    def test_corruption_is_flagged(self):
        dec = construct_pencil_decomposition(hyperbolic_ops(), 2.0, 8)
        report = derived_zero_identities(_perturb_zero_coefficient(dec, 1e-3))
        assert report["max"] >= 1e-4


class TestTransformIdentities:
    def test_constructed_dec_within_certificate(self):
        g = matrix_unit_ops()
        dec = construct_pencil_decomposition(g, 2.0, 12)
        report = transform_identities(dec, g, polydisk_pairs(2, 0.5, 50, 10))
        assert report["max"] <= dec.eta

    def test_zero_pair_trivial(self):
        g = hyperbolic_ops()
        dec = construct_pencil_decomposition(g, 2.0, 8)
        z0 = np.zeros(1)
        report = transform_identities(dec, g, [(z0, z0)])
        assert report["max"] <= 1e-13

    def test_single_variable_sum_tracks_kernel_residual(self):
        g = hyperbolic_ops()
        dec = construct_pencil_decomposition(g, 2.0, 9)
        pairs = polydisk_pairs(1, 0.5, 50, 11)
        report = transform_identities(dec, g, pairs)
        kernel = verify_kernel_identity(g, dec, pairs)
        assert report["sum"] <= 10 * kernel + 1e-14
        assert kernel <= 10 * report["sum"] + 1e-14


class TestProp2:
    def test_hyperbolic_transfer_kernel(self):
        s, _ = hyperbolic_system()
        dec = construct_pencil_decomposition(hyperbolic_ops(), 2.0, 16)
        _, res = prop2_functions(s, dec, [(np.array([0.3]), np.array([0.4]))])
        assert res <= 1e-6

    def test_zero_pair_identity(self):
        s, _ = hyperbolic_system()
        dec = construct_pencil_decomposition(hyperbolic_ops(), 2.0, 8)
        z0 = np.zeros(1)
        _, res = prop2_functions(s, dec, [(z0, z0)])
        assert res <= 1e-13

    def test_matrix_unit_reproduces_second_variable(self):
        s, _ = matrix_unit_system()
        dec = construct_pencil_decomposition(matrix_unit_ops(), 2.0, 12)
        pairs = polydisk_pairs(2, 0.5, 30, 12)
        h_values, res = prop2_functions(s, dec, pairs)
        assert res <= 10 * dec.eta
        # oracle: left side is 1 - conj(l_2) z_2
        lam, z = pairs[0]
        hl, hz = h_values[0]
        acc = 0.0
        for k, c in enumerate(dec.components):
            acc += (1 - np.conj(lam[k]) * z[k]) * (hl[k].conj().T @ c.j.matrix @ hz[k])
        assert acc[0, 0] == pytest.approx(1 - np.conj(lam[1]) * z[1], abs=1e-6)


class TestGramSearch:
    def test_matrix_unit_scale_one_feasible(self):
        g = matrix_unit_ops()
        dec, info = gram_feasibility_search(g, 1.0, degree=1, max_iter=300)
        assert info["converged"]
        assert dec is not None
        res = verify_kernel_identity(g, dec, polydisk_pairs(2, 0.5, 50, 13))
        assert res <= max(dec.eta, 1e-8)

    def test_infeasible_returns_none(self):
        g = hyperbolic_ops()
        dec, info = gram_feasibility_search(g, 1.2, degree=2, max_iter=40)
        assert dec is None and not info["converged"]
