import numpy as np
import pytest

from chanid.channel import (
    ChoiMatrix,
    NotCompletelyPositiveError,
    amplitude_damping_channel,
    choi,
    compose,
    depolarizing_channel,
    from_choi,
    identity_channel,
    is_completely_dominated,
    random_channel,
    stinespring,
    tensor_with_identity,
    unitary_channel,
    zero_map,
)
from chanid.linalg import (
    DensityOperator,
    operator_norm,
    partial_trace,
    random_unitary,
    tensor_product,
    trace_norm,
)

from conftest import (
    apply_via_choi_oracle,
    choi_elementwise_oracle,
    rand_complex,
    rand_density_mat,
)


def rand_channels(n, d1=2, d2=2, rank=2, base_seed=0):
    return [random_channel(d1, d2, rank, base_seed + k) for k in range(n)]


class TestApply:
    def test_identity_channel(self):
        rng = np.random.default_rng(0)
        rho = DensityOperator(rand_density_mat(rng, 3))
        out = identity_channel(3).apply(rho)
        np.testing.assert_allclose(out.mat, rho.mat, atol=1e-15)

    def test_fully_depolarizing(self):
        rng = np.random.default_rng(1)
        rho = DensityOperator(rand_density_mat(rng, 2))
        out = depolarizing_channel(1.0, 2).apply(rho)
        np.testing.assert_allclose(out.mat, np.eye(2) / 2, atol=1e-12)

    def test_agrees_with_choi_contraction(self):
        rng = np.random.default_rng(2)
        t = random_channel(3, 2, 3, seed=5)
        rho = rand_density_mat(rng, 3)
        np.testing.assert_allclose(
            t.apply_matrix(rho), apply_via_choi_oracle(t, rho), atol=1e-10
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            identity_channel(2).apply_matrix(np.eye(3))

    def test_preserves_trace_and_positivity(self):
        rng = np.random.default_rng(3)
        for k, t in enumerate(rand_channels(10, d1=3, d2=2, rank=4)):
            rho = DensityOperator(rand_density_mat(rng, 3))
            out = t.apply(rho)
            assert abs(np.trace(out.mat) - 1.0) <= 1e-10
            assert np.linalg.eigvalsh(out.mat)[0] >= -1e-9


class TestDuality:
    def test_identity_dual(self):
        rng = np.random.default_rng(4)
        x = rand_complex(rng, 2, 2)
        np.testing.assert_allclose(identity_channel(2).dual_apply(x), x, atol=1e-15)

    def test_unitary_dual_is_inverse_conjugation(self):
        u = random_unitary(3, seed=6)
        t = unitary_channel(u)
        rng = np.random.default_rng(5)
        x = rand_complex(rng, 3, 3)
        np.testing.assert_allclose(t.dual_apply(x), u.conj().T @ x @ u, atol=1e-12)

    def test_trace_duality_identity(self):
        rng = np.random.default_rng(6)
        for k in range(20):
            t = random_channel(2, 3, 2, seed=100 + k)
            rho = rand_density_mat(rng, 2)
            x = rand_complex(rng, 3, 3)
            lhs = np.trace(t.apply_matrix(rho) @ x)
            rhs = np.trace(rho @ t.dual_apply(x))
            assert abs(lhs - rhs) <= 1e-10

    def test_dual_is_unital_for_channels(self):
        for t in rand_channels(8, d1=3, d2=2, rank=3, base_seed=40):
            assert operator_norm(t.dual_apply(np.eye(2)) - np.eye(3)) <= 1e-9


class TestChoi:
    def test_identity_choi_structure(self):
        c = choi(identity_channel(2))
        expected = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                expected[i * 2 + i, j * 2 + j] = 1.0  # sum_ij |ii><jj|
        np.testing.assert_allclose(c.mat, expected, atol=1e-15)
        assert np.trace(c.mat) == pytest.approx(2.0, abs=1e-12)
        assert np.linalg.matrix_rank(c.mat, tol=1e-10) == 1

    def test_trace_equals_input_dim(self):
        for t in rand_channels(5, d1=3, d2=2, rank=2, base_seed=60):
            assert np.trace(choi(t).mat).real == pytest.approx(3.0, abs=1e-10)

    def test_matches_elementwise_oracle(self):
        t = random_channel(2, 3, 4, seed=8)
        np.testing.assert_allclose(choi(t).mat, choi_elementwise_oracle(t), atol=1e-12)

    def test_trace_preserving_marginal_is_identity(self):
        for t in rand_channels(5, d1=3, d2=2, rank=3, base_seed=80):
            marg = partial_trace(choi(t).mat, (2, 3), "first")
            assert operator_norm(marg - np.eye(3)) <= 1e-9

    def test_normalized_flag(self):
        t = random_channel(2, 2, 2, seed=9)
        np.testing.assert_allclose(
            choi(t, normalized=True).mat * 2, choi(t).mat, atol=1e-14
        )


class TestFromChoi:
    def test_identity_round_trip(self):
        t = from_choi(choi(identity_channel(3)))
        assert len(t.kraus) == 1
        np.testing.assert_allclose(t.kraus[0], np.eye(3), atol=1e-12)

    def test_unitary_channel_has_single_kraus(self):
        u = random_unitary(2, seed=10)
        t = from_choi(choi(unitary_channel(u)))
        assert len(t.kraus) == 1

    def test_round_trip_as_maps(self):
        rng = np.random.default_rng(7)
        for k in range(10):
            t = random_channel(2, 3, 3, seed=200 + k)
            back = from_choi(choi(t))
            rho = rand_density_mat(rng, 2)
            np.testing.assert_allclose(
                back.apply_matrix(rho), t.apply_matrix(rho), atol=1e-9
            )
            assert trace_norm(choi(back).mat - choi(t).mat) <= 1e-8

    def test_kraus_set_is_minimal(self):
        t = random_channel(2, 2, 3, seed=11)
        back = from_choi(choi(t))
        vecs = np.stack([a.reshape(-1) for a in back.kraus])
        gram = vecs @ vecs.conj().T
        assert np.linalg.matrix_rank(gram, tol=1e-10) == len(back.kraus)

    def test_rejects_non_psd(self):
        bad = ChoiMatrix(dim_in=2, dim_out=2, mat=np.diag([1.0, 1.0, 1.0, -1.0]))
        with pytest.raises(NotCompletelyPositiveError):
            from_choi(bad)


class TestTensorWithIdentity:
    def test_identity_stays_identity(self):
        t = tensor_with_identity(identity_channel(2), 3)
        rng = np.random.default_rng(8)
        x = rand_complex(rng, 6, 6)
        np.testing.assert_allclose(t.apply_matrix(x), x, atol=1e-14)

    def test_product_states_factorize(self):
        rng = np.random.default_rng(9)
        t = random_channel(2, 2, 2, seed=12)
        a, b = rand_density_mat(rng, 2), rand_density_mat(rng, 3)
        lhs = tensor_with_identity(t, 3).apply_matrix(tensor_product(a, b))
        np.testing.assert_allclose(lhs, tensor_product(t.apply_matrix(a), b), atol=1e-12)

    def test_entangled_input_matches_direct_kraus_sum(self):
        rng = np.random.default_rng(10)
        t = random_channel(2, 3, 2, seed=13)
        x = rand_complex(rng, 4, 4)
        direct = np.zeros((6, 6), dtype=complex)
        for a in t.kraus:
            lift = np.kron(a, np.eye(2))
            direct += lift @ x @ lift.conj().T
        np.testing.assert_allclose(
            tensor_with_identity(t, 2).apply_matrix(x), direct, atol=1e-12
        )


class TestStinespring:
    def test_identity_has_trivial_environment(self):
        pair = stinespring(identity_channel(2))
        assert pair.dim_env == 1
        assert pair.v.shape == (2, 2)

    def test_unitary_dilation(self):
        u = random_unitary(3, seed=14)
        pair = stinespring(unitary_channel(u))
        assert pair.dim_env == 1
        rng = np.random.default_rng(11)
        rho = rand_density_mat(rng, 3)
        out = pair.v.conj().T @ np.kron(rho, np.eye(1)) @ pair.v
        np.testing.assert_allclose(out, u @ rho @ u.conj().T, atol=1e-12)

    def test_dilation_reproduces_channel(self):
        rng = np.random.default_rng(12)
        t = random_channel(3, 2, 4, seed=15)
        pair = stinespring(t)
        for _ in range(20):
            rho = rand_density_mat(rng, 3)
            out = pair.v.conj().T @ np.kron(rho, np.eye(pair.dim_env)) @ pair.v
            assert operator_norm(out - t.apply_matrix(rho)) <= 1e-9

    def test_environment_dimension_is_choi_rank(self):
        t = random_channel(2, 2, 3, seed=16)
        assert stinespring(t).dim_env == 3


class TestCompleteDomination:
    def test_reflexive(self):
        for t in rand_channels(5, d1=2, d2=3, rank=2, base_seed=300):
            assert is_completely_dominated(t, t, 1.0)

    def test_zero_map_dominated_by_everything(self):
        t = random_channel(2, 2, 2, seed=17)
        assert is_completely_dominated(zero_map(2, 2), t, 0.5)

    @pytest.mark.parametrize("lam", [1.0, 2.0, 10.0])
    def test_depolarizing_not_dominated_by_identity(self, lam):
        dep = depolarizing_channel(1.0, 2)
        ident = identity_channel(2)
        assert not is_completely_dominated(dep, ident, lam)
        # eigenvalue oracle: lam*C_id - C_dep = 2*lam |Om><Om| - I/2 has
        # eigenvalue -1/2 on the complement of the entangled direction
        diff = lam * choi(ident).mat - choi(dep).mat
        assert np.linalg.eigvalsh(diff)[0] == pytest.approx(-0.5, abs=1e-12)

    def test_transitivity_with_matching_factors(self):
        rng = np.random.default_rng(13)
        for k in range(10):
            base = rand_density_mat(rng, 4) * rng.uniform(0.2, 1.0)
            extra1 = rand_density_mat(rng, 4) * rng.uniform(0.0, 0.5)
            extra2 = rand_density_mat(rng, 4) * rng.uniform(0.0, 0.5)
            lam, mu = rng.uniform(1.0, 3.0), rng.uniform(1.0, 3.0)
            s = from_choi(ChoiMatrix(2, 2, base))
            t = from_choi(ChoiMatrix(2, 2, base / lam + extra1))
            u = from_choi(ChoiMatrix(2, 2, (base / lam + extra1) / mu + extra2))
            assert is_completely_dominated(s, t, lam)
            assert is_completely_dominated(t, u, mu)
            assert is_completely_dominated(s, u, lam * mu)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            is_completely_dominated(identity_channel(2), identity_channel(3), 1.0)


class TestRandomChannel:
    def test_rank_one_square_is_unitary(self):
        t = random_channel(3, 3, 1, seed=18)
        assert len(t.kraus) == 1
        u = t.kraus[0]
        assert operator_norm(u.conj().T @ u - np.eye(3)) <= 1e-10

    def test_exactly_trace_preserving(self):
        for k in range(10):
            t = random_channel(3, 2, 4, seed=400 + k)
            assert t.tp_defect <= 1e-10

    def test_choi_rank_matches_kraus_rank(self):
        for rank in (1, 2, 3, 4):
            t = random_channel(2, 2, rank, seed=19 + rank)
            vals = np.linalg.eigvalsh(choi(t).mat)
            assert int(np.sum(vals > 1e-9)) == rank

    def test_deterministic(self):
        a = random_channel(2, 2, 2, seed=77)
        b = random_channel(2, 2, 2, seed=77)
        for x, y in zip(a.kraus, b.kraus):
            assert np.array_equal(x, y)

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            random_channel(2, 2, 5, seed=0)
        with pytest.raises(ValueError):
            random_channel(2, 2, 0, seed=0)

    def test_infeasible_isometry_rejected(self):
        with pytest.raises(ValueError):
            random_channel(3, 2, 1, seed=0)


class TestNamedChannels:
    def test_depolarizing_zero_is_identity_on_basis(self):
        t = depolarizing_channel(0.0, 3)
        for i in range(3):
            for j in range(3):
                unit = np.zeros((3, 3))
                unit[i, j] = 1.0
                np.testing.assert_allclose(t.apply_matrix(unit), unit, atol=1e-14)

    def test_full_damping_decays_to_ground(self):
        rng = np.random.default_rng(14)
        t = amplitude_damping_channel(1.0)
        rho = rand_density_mat(rng, 2)
        np.testing.assert_allclose(
            t.apply_matrix(rho), np.diag([1.0, 0.0]), atol=1e-12
        )

    def test_depolarizing_choi_spectrum(self):
        lam = 0.3
        vals = np.linalg.eigvalsh(choi(depolarizing_channel(lam, 2), normalized=True).mat)
        expected = np.sort([1 - 3 * lam / 4, lam / 4, lam / 4, lam / 4])
        np.testing.assert_allclose(vals, expected, atol=1e-12)

    def test_parameter_range_errors(self):
        with pytest.raises(ValueError):
            depolarizing_channel(1.5, 2)
        with pytest.raises(ValueError):
            amplitude_damping_channel(-0.1)
        with pytest.raises(ValueError):
            unitary_channel(np.ones((2, 2)))


class TestComposition:
    def test_composition_is_a_channel(self):
        a = random_channel(2, 3, 2, seed=20)
        b = random_channel(3, 2, 3, seed=21)
        c = compose(b, a)
        assert c.trace_preserving
        assert (c.dim_in, c.dim_out) == (2, 2)
        rng = np.random.default_rng(15)
        rho = rand_density_mat(rng, 2)
        np.testing.assert_allclose(
            c.apply_matrix(rho), b.apply_matrix(a.apply_matrix(rho)), atol=1e-12
        )

    def test_inner_dimension_checked(self):
        with pytest.raises(ValueError):
            compose(identity_channel(3), identity_channel(2))
