"""Tests for the conservative dilation pipeline."""

import numpy as np
import pytest

from kreinsys.agler import construct_pencil_decomposition
from kreinsys.dilation import (
    DEFECT_NAMES,
    build_U,
    build_dilation,
    verify_dilation,
    verify_linear_tf,
)
from kreinsys.krein import CanonicalSymmetry
from kreinsys.systems import (
    MultiparametricSystem,
    jconservativity_defect,
    system_operators,
)
from kreinsys.transfer import eval_transfer

from test_agler import polydisk_pairs
from test_systems import hyperbolic_system, matrix_unit_system


def make_dec(system, epsilon, degree):
    return construct_pencil_decomposition(system_operators(system), epsilon, degree)


def disk_points(n, radius, count, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (count, n)) + 1j * rng.uniform(-1, 1, (count, n))
    return radius / np.sqrt(2) * pts


class TestMatrixUnitExact:
    def setup_method(self):
        self.alpha, _ = matrix_unit_system()
        self.dec = make_dec(self.alpha, 1.0, 4)
        self.res = build_dilation(self.alpha, self.dec, tol=1e-10)

    def test_state_and_symmetry(self):
        # K_0 has dimension 2, so the dilated state is 3-dimensional
        assert self.res.state_dim == 3
        assert self.res.j.signature == (3, 0)
        assert self.res.k2_dim == 0

    def test_all_defects_at_machine_level(self):
        assert set(self.res.defects) == set(DEFECT_NAMES)
        assert self.res.max_defect() <= 1e-12

    def test_transfer_is_second_variable(self):
        for z in disk_points(2, 0.9, 50, 0):
            val = eval_transfer(self.res.alpha_tilde, z)
            assert abs(val[0, 0] - z[1]) <= 1e-12

    def test_dilated_system_is_conservative(self):
        assert max(jconservativity_defect(self.res.alpha_tilde, self.res.j)) <= 1e-12

    def test_compressions_reproduce_alpha(self):
        at = self.res.alpha_tilde
        lead = at.state_dim - 1
        for k in range(2):
            np.testing.assert_allclose(
                at.a[k][lead:, lead:], self.alpha.a[k], atol=1e-14
            )
            np.testing.assert_allclose(at.d[k], self.alpha.d[k], atol=1e-14)


class TestHyperbolic:
    def setup_method(self):
        self.alpha, _ = hyperbolic_system()
        self.dec = make_dec(self.alpha, 2.0, 24)
        self.res = build_dilation(self.alpha, self.dec, tol=1e-6)

    def test_defects_within_tolerance(self):
        assert self.res.max_defect() <= 1e-6

    def test_negative_signature_present(self):
        assert self.res.j.signature[1] >= 1

    def test_exact_stages_at_machine_level(self):
        d = self.res.defects
        for name in ("semiunitarity", "isometry", "extension", "compression"):
            assert d[name] <= 1e-12, name

    def test_state_layout(self):
        k0 = self.res.k0_basis.shape[1]
        assert self.res.state_dim == k0 + 1

    def test_transfer_coincidence_at_half(self):
        val = eval_transfer(self.res.alpha_tilde, np.array([0.5]))
        assert abs(val[0, 0] - 1.0) <= 1e-6

    def test_verify_dilation_report(self):
        report = verify_dilation(
            self.alpha, self.res.alpha_tilde, self.res.j, disk_points(1, 0.5, 50, 1)
        )
        assert report["compression"] <= 1e-12
        assert report["transfer"] <= 1e-6
        assert report["conservativity"] <= 1e-10

    def test_degree_controls_transfer_residual(self):
        res12 = build_dilation(self.alpha, make_dec(self.alpha, 2.0, 12), tol=1e-2)
        assert res12.defects["transfer-coincidence"] >= self.res.defects[
            "transfer-coincidence"
        ]
        assert res12.defects["transfer-coincidence"] <= 1e-3


class TestZeroSystem:
    def test_zero_system_dilates_to_identity_metric(self):
        alpha = MultiparametricSystem(
            n=1,
            a=(np.zeros((1, 1)),),
            b=(np.zeros((1, 1)),),
            c=(np.zeros((1, 1)),),
            d=(np.zeros((1, 1)),),
        )
        # the coefficient rows of the eps = 1 decomposition of the zero
        # pencil have unit size at every degree, so the dilation transfer
        # tail decays like r^(d+1) alone; degree 26 puts it below 1e-6
        dec = make_dec(alpha, 1.0, 26)
        res = build_dilation(alpha, dec, tol=1e-6)
        assert res.j.signature[1] == 0
        for z in disk_points(1, 0.5, 20, 2):
            assert abs(eval_transfer(res.alpha_tilde, z)[0, 0]) <= 1e-6


class TestBuildU:
    def test_hyperbolic_column_matching(self):
        # U sends the degree-(n+1) column of zF to the degree-(n+1)
        # column of F - F(0) stacked with the degree-n column of zG
        alpha, _ = hyperbolic_system()
        g = system_operators(alpha)
        dec = make_dec(alpha, 2.0, 8)
        res = build_dilation(alpha, dec, tol=1e-2)
        phi0, j0, jm = res.k0_basis, res.k0_symmetry, dec.j_m()
        k0 = phi0.shape[1]
        for t in range(1, dec.degree + 1):
            dom_col = dec.stacked_coefficient((t - 1,))
            f_t = dec.stacked_coefficient((t,))
            xi = j0.matrix @ phi0.conj().T @ jm.matrix @ f_t
            ran_col = np.vstack([xi, g[0] if t == 1 else np.zeros((2, 2))])
            np.testing.assert_allclose(res.u_matrix @ dom_col, ran_col, atol=1e-10)

    def test_span_dimensions_agree(self):
        alpha, _ = hyperbolic_system()
        u, dom, ran, defect = build_U(make_dec(alpha, 2.0, 10), system_operators(alpha))
        assert dom.dim == ran.dim == u.shape[1]
        assert defect <= 1e-12
        assert dom.is_regular() and ran.is_regular()

    def test_matrix_unit_exact_spans(self):
        alpha, _ = matrix_unit_system()
        u, dom, ran, defect = build_U(make_dec(alpha, 1.0, 4), system_operators(alpha))
        assert dom.dim == 2
        assert defect <= 1e-14


class TestVerifiers:
    def test_linear_tf_negative_control(self):
        # an identity in place of the matched extension breaks the realization
        alpha, _ = hyperbolic_system()
        dec = make_dec(alpha, 2.0, 8)
        res = build_dilation(alpha, dec, tol=1e-2)
        k0 = res.k0_basis.shape[1]
        t_tilde = np.hstack([res.k0_basis, dec.f0()])
        bad = MultiparametricSystem(
            n=1,
            a=(t_tilde[:k0, :k0],),
            b=(t_tilde[:k0, k0:],),
            c=(t_tilde[k0:, :k0],),
            d=(t_tilde[k0:, k0:],),
        )
        g = system_operators(alpha)
        assert verify_linear_tf(bad, g, disk_points(1, 0.5, 20, 3)) >= 1e-2

    def test_linear_tf_zero_horizon(self):
        alpha, _ = matrix_unit_system()
        res = build_dilation(alpha, make_dec(alpha, 1.0, 4), tol=1e-10)
        check = MultiparametricSystem(
            n=2,
            a=tuple(m[:2, :2] for m in res.check_operators),
            b=tuple(m[:2, 2:] for m in res.check_operators),
            c=tuple(m[2:, :2] for m in res.check_operators),
            d=tuple(m[2:, 2:] for m in res.check_operators),
        )
        g = system_operators(alpha)
        assert verify_linear_tf(check, g, disk_points(2, 0.5, 20, 4)) <= 1e-13

    def test_verify_dilation_trivial(self):
        alpha, j = matrix_unit_system()
        report = verify_dilation(alpha, alpha, j, disk_points(2, 0.5, 20, 5))
        assert max(report.values()) <= 1e-14

    def test_verify_dilation_flags_perturbation(self):
        alpha, _ = hyperbolic_system()
        res = build_dilation(alpha, make_dec(alpha, 2.0, 12), tol=1e-3)
        at = res.alpha_tilde
        lead = at.state_dim - 1
        a0 = np.array(at.a[0])
        a0[lead, lead] += 1e-3
        bad = MultiparametricSystem(n=1, a=(a0,), b=at.b, c=at.c, d=at.d)
        report = verify_dilation(alpha, bad, res.j, disk_points(1, 0.5, 10, 6))
        assert report["compression"] == pytest.approx(1e-3, rel=1e-6)

    def test_verify_dilation_embedding_error(self):
        alpha, _ = hyperbolic_system()
        small = MultiparametricSystem(
            n=1,
            a=(np.zeros((0, 0)),),
            b=(np.zeros((0, 1)),),
            c=(np.zeros((1, 0)),),
            d=(np.ones((1, 1)),),
        )
        with pytest.raises(ValueError, match="embed"):
            verify_dilation(alpha, small, CanonicalSymmetry.identity(0), [])


class TestErrorPaths:
    def test_rectangular_io_rejected(self):
        alpha = MultiparametricSystem(
            n=1,
            a=(np.zeros((1, 1)),),
            b=(np.zeros((1, 2)),),
            c=(np.zeros((1, 1)),),
            d=(np.zeros((1, 2)),),
        )
        wide_dec = make_dec(hyperbolic_system()[0], 2.0, 4)
        with pytest.raises(ValueError, match="pad"):
            build_dilation(alpha, wide_dec)

    def test_mismatched_decomposition_rejected(self):
        alpha, _ = matrix_unit_system()
        dec = make_dec(hyperbolic_system()[0], 2.0, 4)
        with pytest.raises(ValueError, match="match"):
            build_dilation(alpha, dec)

    def test_failure_names_stage(self):
        alpha, _ = hyperbolic_system()
        with pytest.raises(ValueError, match="lin-tf"):
            build_dilation(alpha, make_dec(alpha, 2.0, 6), tol=1e-6)
