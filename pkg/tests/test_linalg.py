import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banditsrl.linalg import (
    LinAlgError, RlsState, SymMatrix, constrained_ls, constrained_ls_gram,
    mahalanobis_norm, min_eigenvalue)
from oracles import (
    charpoly_min_eig, direct_rls, grid_constrained_ls_1d,
    projected_gradient_ls, power_min_eig)


def random_sym(rng, d, scale=1.0):
    a = scale * rng.standard_normal((d, d))
    return 0.5 * (a + a.T)


class TestSymMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(LinAlgError):
            SymMatrix([[1.0, 2.0], [2.0 + 1e-15, 1.0]])

    def test_rejects_nonsquare_and_nonfinite(self):
        with pytest.raises(LinAlgError):
            SymMatrix(np.zeros((2, 3)))
        with pytest.raises(LinAlgError):
            SymMatrix([[np.nan]])

    def test_mirrored_makes_exact_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            m = SymMatrix.mirrored(rng.standard_normal((4, 4)))
            assert np.array_equal(m.a, m.a.T)

    def test_array_protocol(self):
        m = SymMatrix.identity(3, scale=2.0)
        assert m.dim == 3
        assert np.allclose(np.asarray(m) @ np.eye(3), 2.0 * np.eye(3))


class TestRlsState:
    def test_single_update_hand_example(self):
        # d=2, lam=1, one sample phi=(1,0), y=1.
        st_ = RlsState(2, lam=1.0).update(np.array([1.0, 0.0]), 1.0)
        assert np.allclose(st_.V.a, [[2.0, 0.0], [0.0, 1.0]])
        assert np.allclose(st_.theta, [0.5, 0.0])
        assert st_.t == 1

    def test_zero_feature_is_noop_on_design(self):
        st_ = RlsState(2).update(np.zeros(2), 0.0)
        assert np.allclose(st_.V.a, np.eye(2))
        assert np.allclose(st_.theta, np.zeros(2))

    def test_50_updates_match_direct_inverse(self):
        rng = np.random.default_rng(1)
        st_ = RlsState(4, lam=0.7)
        phis = rng.standard_normal((50, 4))
        ys = rng.standard_normal(50)
        for p, y in zip(phis, ys):
            st_.update(p, y)
        v, vinv, theta = direct_rls(phis, ys, 0.7)
        assert np.max(np.abs(st_.V.a - v)) < 1e-10
        assert np.max(np.abs(st_.Vinv.a - vinv)) < 1e-8
        assert np.max(np.abs(st_.theta - theta)) < 1e-8

    def test_inverse_consistency_many_sequences(self):
        # d <= 10, 1000 random sequences: V @ Vinv stays within 1e-8 of I.
        rng = np.random.default_rng(2)
        for _ in range(1000):
            d = int(rng.integers(1, 11))
            n = int(rng.integers(1, 40))
            st_ = RlsState(d, lam=float(rng.uniform(0.1, 2.0)))
            for _ in range(n):
                st_.update(rng.standard_normal(d), float(rng.standard_normal()))
            assert st_.inverse_drift() < 1e-8

    def test_theta_identity_and_gram_psd(self):
        rng = np.random.default_rng(3)
        st_ = RlsState(5)
        for _ in range(200):
            st_.update(rng.standard_normal(5), float(rng.standard_normal()))
        assert np.max(np.abs(st_.theta - st_.Vinv.a @ st_.b)) < 1e-10
        assert min_eigenvalue(SymMatrix.mirrored(st_.gram())) > -1e-8

    def test_reinversion_bounds_drift(self):
        rng = np.random.default_rng(4)
        st_ = RlsState(3)
        for _ in range(2 * RlsState.REINVERT_EVERY + 50):
            st_.update(rng.standard_normal(3), float(rng.standard_normal()))
        assert st_.inverse_drift() < 1e-8

    def test_from_data_matches_update_path(self):
        rng = np.random.default_rng(5)
        phis = rng.standard_normal((120, 6))
        ys = rng.standard_normal(120)
        batch = RlsState.from_data(phis, ys, lam=1.3)
        inc = RlsState(6, lam=1.3)
        for p, y in zip(phis, ys):
            inc.update(p, y)
        assert np.max(np.abs(batch.V.a - inc.V.a)) < 1e-9
        assert np.max(np.abs(batch.theta - inc.theta)) < 1e-8
        assert batch.t == inc.t and abs(batch.sum_y2 - inc.sum_y2) < 1e-9

    def test_copy_is_independent(self):
        st_ = RlsState(2).update(np.ones(2), 1.0)
        dup = st_.copy()
        dup.update(np.ones(2), -1.0)
        assert st_.t == 1 and dup.t == 2
        assert not np.allclose(st_.theta, dup.theta)

    def test_rejects_bad_inputs(self):
        st_ = RlsState(2)
        with pytest.raises(LinAlgError):
            st_.update(np.array([1.0]), 0.0)
        with pytest.raises(LinAlgError):
            st_.update(np.array([np.inf, 0.0]), 0.0)
        with pytest.raises(LinAlgError):
            st_.update(np.zeros(2), float("nan"))
        with pytest.raises(LinAlgError):
            RlsState(0)
        with pytest.raises(LinAlgError):
            RlsState(2, lam=0.0)


class TestMinEigenvalue:
    def test_identity_and_zero(self):
        assert min_eigenvalue(SymMatrix.identity(3)) == pytest.approx(1.0)
        assert min_eigenvalue(np.zeros((5, 5))) == 0.0

    def test_two_by_two_hand_example(self):
        # Char poly roots of [[2,1],[1,2]] are {1, 3}.
        assert min_eigenvalue(np.array([[2.0, 1.0], [1.0, 2.0]])) == \
            pytest.approx(1.0, abs=1e-12)

    def test_charpoly_oracle_small_dims(self):
        rng = np.random.default_rng(6)
        for i in range(1000):
            d = 1 + i % 3
            a = random_sym(rng, d, scale=float(rng.uniform(0.1, 5.0)))
            assert min_eigenvalue(a) == pytest.approx(
                charpoly_min_eig(a), abs=1e-8)

    def test_power_iteration_oracle(self):
        rng = np.random.default_rng(7)
        for i in range(200):
            d = 2 + i % 9
            a = random_sym(rng, d)
            assert min_eigenvalue(a) == pytest.approx(
                power_min_eig(a, seed=i), abs=1e-6)

    def test_numpy_cross_check_large(self):
        rng = np.random.default_rng(8)
        for d in (6, 12, 18, 24):
            a = random_sym(rng, d, scale=3.0)
            assert min_eigenvalue(a) == pytest.approx(
                float(np.linalg.eigvalsh(a)[0]), abs=1e-9)

    def test_rejects_bad_inputs(self):
        with pytest.raises(LinAlgError):
            min_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(LinAlgError):
            min_eigenvalue(np.eye(2), tol=0.0)

    @given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
    @settings(max_examples=60, deadline=None)
    def test_scale_equivariance(self, seed, c):
        rng = np.random.default_rng(seed)
        a = random_sym(rng, int(rng.integers(1, 7)))
        lam = min_eigenvalue(a)
        assert min_eigenvalue(c * a) == pytest.approx(
            c * lam, abs=1e-8 * max(1.0, c * abs(lam)))


class TestMahalanobis:
    def test_hand_examples(self):
        assert mahalanobis_norm([1.0, 0.0], np.eye(2)) == pytest.approx(1.0)
        assert mahalanobis_norm([0.0, 0.0], np.eye(2)) == 0.0
        assert mahalanobis_norm([1.0, 1.0], 0.5 * np.eye(2)) == \
            pytest.approx(1.0, abs=1e-12)

    def test_negative_form_raises(self):
        with pytest.raises(LinAlgError):
            mahalanobis_norm([0.0, 1.0], np.diag([1.0, -1.0]))

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            d = int(rng.integers(1, 8))
            root = rng.standard_normal((d, d))
            minv = root @ root.T + 0.1 * np.eye(d)
            v = rng.standard_normal(d)
            assert mahalanobis_norm(v, SymMatrix.mirrored(minv)) == \
                pytest.approx(math.sqrt(v @ minv @ v), rel=1e-12)


class TestConstrainedLs:
    def test_interior_1d(self):
        theta, mse = constrained_ls([(np.array([1.0]), 1.0),
                                     (np.array([1.0]), 1.0)], bound=10.0)
        assert theta == pytest.approx([1.0], abs=1e-8)
        assert mse == pytest.approx(0.0, abs=1e-12)

    def test_boundary_1d_hand_example(self):
        theta, mse = constrained_ls([(np.array([1.0]), 1.0),
                                     (np.array([1.0]), 1.0)], bound=0.5)
        assert theta == pytest.approx([0.5], abs=1e-7)
        assert mse == pytest.approx(0.25, abs=1e-7)

    def test_interior_matches_normal_equations(self):
        rng = np.random.default_rng(10)
        phis = rng.standard_normal((20, 2))
        ys = rng.standard_normal(20)
        theta, _ = constrained_ls((phis, ys), bound=1e6)
        expect = np.linalg.solve(phis.T @ phis, phis.T @ ys)
        assert np.max(np.abs(theta - expect)) < 1e-8

    def test_boundary_1d_grid_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(2, 30))
            phis = rng.standard_normal(n)
            ys = phis * rng.uniform(1.5, 4.0) + 0.1 * rng.standard_normal(n)
            bound = float(rng.uniform(0.2, 1.0))
            theta, mse = constrained_ls(
                (phis.reshape(-1, 1), ys), bound=bound)
            g_theta, g_mse = grid_constrained_ls_1d(phis, ys, bound)
            assert theta[0] == pytest.approx(g_theta, abs=1e-6)
            assert mse == pytest.approx(g_mse, abs=1e-6)

    def test_boundary_multid_projected_gradient_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            n, d = 40, int(rng.integers(2, 5))
            phis = rng.standard_normal((n, d))
            truth = rng.standard_normal(d) * 3.0
            ys = phis @ truth
            bound = 0.5 * float(np.linalg.norm(truth))
            theta, mse = constrained_ls((phis, ys), bound=bound)
            p_theta, p_mse = projected_gradient_ls(phis, ys, bound)
            assert mse == pytest.approx(p_mse, abs=1e-5)
            assert np.max(np.abs(theta - p_theta)) < 1e-3

    def test_kkt_conditions(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            n, d = 30, int(rng.integers(1, 6))
            phis = rng.standard_normal((n, d))
            ys = rng.standard_normal(n) * 2.0
            bound = float(rng.uniform(0.1, 3.0))
            theta, _ = constrained_ls((phis, ys), bound=bound)
            gram = phis.T @ phis
            bvec = phis.T @ ys
            grad = gram @ theta - bvec
            norm = float(np.linalg.norm(theta))
            if norm < bound * (1.0 - 1e-6):
                assert np.linalg.norm(grad) <= 1e-6 * max(1.0, np.linalg.norm(bvec))
            else:
                assert norm == pytest.approx(bound, rel=2e-8)
                gn = np.linalg.norm(grad)
                if gn > 1e-10:
                    cosine = float(grad @ theta) / (gn * norm)
                    assert math.acos(max(-1.0, min(1.0, -cosine))) < 1e-4

    def test_gram_route_matches_data_route(self):
        rng = np.random.default_rng(14)
        phis = rng.standard_normal((25, 3))
        ys = rng.standard_normal(25)
        t1, m1 = constrained_ls((phis, ys), bound=0.4)
        gram = phis.T @ phis
        t2, m2 = constrained_ls_gram(0.5 * (gram + gram.T), phis.T @ ys,
                                     float(ys @ ys), 25, 0.4)
        assert np.max(np.abs(t1 - t2)) < 1e-12
        assert m1 == pytest.approx(m2, rel=1e-12)

    def test_mse_divisor_and_nonnegativity(self):
        theta, mse = constrained_ls([(np.array([1.0]), 2.0)], bound=5.0)
        assert theta == pytest.approx([2.0], abs=1e-8)
        assert mse >= 0.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(LinAlgError):
            constrained_ls([], bound=1.0)
        with pytest.raises(LinAlgError):
            constrained_ls([(np.array([1.0]), 1.0)], bound=0.0)
        with pytest.raises(LinAlgError):
            constrained_ls([(np.array([1.0]), 1.0)], bound=1.0, tol=-1.0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_solution_feasible_and_no_worse_than_random_feasible(self, seed):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(1, 25)), int(rng.integers(1, 5))
        phis = rng.standard_normal((n, d))
        ys = rng.standard_normal(n)
        bound = float(rng.uniform(0.05, 2.0))
        theta, mse = constrained_ls((phis, ys), bound=bound)
        assert np.linalg.norm(theta) <= bound * (1.0 + 1e-6)
        assert mse >= 0.0
        probe = rng.standard_normal(d)
        probe *= rng.uniform(0.0, bound) / max(np.linalg.norm(probe), 1e-12)
        assert mse <= float(np.mean((phis @ probe - ys) ** 2)) + 1e-9
