import math

import numpy as np
import pytest

from entlab import blockmat as bm
from entlab.algebra import (
    BlockStructure,
    DensityState,
    central_distribution,
    central_uniform_state,
    rank_dim,
    schatten,
    tracial_state,
)
from entlab.errors import DomainError, ShapeError, StructureError

from conftest import random_state


class TestBlockStructure:
    @pytest.mark.parametrize(
        "dims,expected",
        [((2,), (2, 4)), ((1, 1), (2, 2)), ((2, 1), (3, 5))],
    )
    def test_rank_dim(self, dims, expected):
        assert rank_dim(BlockStructure(dims)) == expected

    def test_rank_dim_bounds(self, rng):
        for _ in range(20):
            dims = tuple(int(d) for d in rng.integers(1, 5, size=rng.integers(1, 4)))
            r, d = rank_dim(BlockStructure(dims))
            assert r <= d <= r * r
            if all(x == 1 for x in dims):
                assert r == d
            else:
                assert d > r

    def test_invalid(self):
        with pytest.raises(ShapeError):
            BlockStructure(())
        with pytest.raises(ShapeError):
            BlockStructure((2, 0))


class TestDensityState:
    def test_validation(self):
        s = BlockStructure((2,))
        with pytest.raises(DomainError):
            DensityState(s, [np.diag([0.6, 0.6])])  # trace 1.2
        with pytest.raises(DomainError):
            DensityState(s, [np.array([[0.5, 0.5], [-0.5, 0.5]])])  # not hermitian
        with pytest.raises(ShapeError):
            DensityState(s, [np.eye(3) / 3])

    def test_zero_weight_block_allowed(self):
        s = BlockStructure((2, 1))
        st = DensityState(s, [np.eye(2) / 2, np.zeros((1, 1))])
        np.testing.assert_allclose(st.nu(), [1.0, 0.0])

    def test_from_full_rejects_off_block(self):
        s = BlockStructure((1, 1))
        m = np.array([[0.5, 0.3], [0.3, 0.5]])
        with pytest.raises(StructureError):
            DensityState.from_full(m, s)

    def test_full_matrix_roundtrip(self, rng):
        st = random_state(rng, (2, 3))
        back = DensityState.from_full(st.full_matrix(), st.structure)
        for a, b in zip(back.blocks, st.blocks):
            np.testing.assert_allclose(a, b, atol=1e-14)

    def test_wire_roundtrip(self, rng):
        st = random_state(rng, (2, 1))
        back = DensityState.from_wire(st.to_wire(), st.structure)
        for a, b in zip(back.blocks, st.blocks):
            np.testing.assert_array_equal(a, b)


class TestCentralDistribution:
    def test_single_block(self, rng):
        st = random_state(rng, (3,))
        np.testing.assert_allclose(central_distribution(st), [1.0], atol=1e-12)

    def test_abelian_readout(self):
        s = BlockStructure((1, 1))
        st = DensityState(s, [np.array([[0.3]]), np.array([[0.7]])])
        np.testing.assert_allclose(central_distribution(st), [0.3, 0.7])

    def test_linearity(self, rng):
        s = BlockStructure((2, 2))
        rho1 = random_state(rng, (2,)).blocks[0]
        rho2 = random_state(rng, (2,)).blocks[0]
        st = DensityState(s, [0.6 * rho1, 0.4 * rho2])
        np.testing.assert_allclose(central_distribution(st), [0.6, 0.4], atol=1e-12)

    def test_sums_to_one(self, rng):
        for dims in [(2,), (2, 1), (3, 2, 1)]:
            st = random_state(rng, dims)
            assert abs(central_distribution(st).sum() - 1.0) < 1e-10


class TestTracialState:
    def test_single_qubit_block(self):
        st = tracial_state(BlockStructure((2,)))
        np.testing.assert_allclose(st.blocks[0], np.eye(2) / 2)

    def test_two_atoms(self):
        st = tracial_state(BlockStructure((1, 1)))
        np.testing.assert_allclose(st.nu(), [0.5, 0.5])

    def test_mixed_blocks(self):
        # nu(i) = d_i^2 / sum d_j^2 evaluated by hand for (2, 1)
        st = tracial_state(BlockStructure((2, 1)))
        np.testing.assert_allclose(st.nu(), [4 / 5, 1 / 5], atol=1e-14)
        np.testing.assert_allclose(st.blocks[0], np.eye(2) * 2 / 5)
        np.testing.assert_allclose(st.blocks[1], np.eye(1) / 5)

    def test_unitary_invariance(self, rng):
        st = tracial_state(BlockStructure((3, 2)))
        for i, b in enumerate(st.blocks):
            u = bm.haar_unitary(b.shape[0], rng)
            np.testing.assert_allclose(u @ b @ u.conj().T, b, atol=1e-14)

    def test_central_uniform(self):
        st = central_uniform_state(BlockStructure((2, 1)))
        np.testing.assert_allclose(st.full_matrix(), np.eye(3) / 3)


class TestSchatten:
    def test_pure_state(self):
        eta = np.array([1.0, 1j]) / math.sqrt(2)
        st = DensityState(BlockStructure((2,)), [np.outer(eta, eta.conj())])
        triples = schatten(st)
        assert len(triples) == 1
        lam, vec, idx = triples[0]
        assert abs(lam - 1.0) < 1e-12 and idx == 0
        assert abs(abs(np.vdot(vec, eta)) - 1.0) < 1e-12

    def test_diagonal(self):
        st = DensityState(BlockStructure((2,)), [np.diag([0.75, 0.25])])
        triples = schatten(st)
        np.testing.assert_allclose([t[0] for t in triples], [0.75, 0.25])
        np.testing.assert_allclose(np.abs(triples[0][1]), [1, 0], atol=1e-12)
        np.testing.assert_allclose(np.abs(triples[1][1]), [0, 1], atol=1e-12)

    def test_hand_2x2(self):
        # eigenproblem of [[.5,.25],[.25,.5]] by hand: .5 +/- .25
        st = DensityState(
            BlockStructure((2,)), [np.array([[0.5, 0.25], [0.25, 0.5]])]
        )
        triples = schatten(st)
        np.testing.assert_allclose([t[0] for t in triples], [0.75, 0.25])
        np.testing.assert_allclose(triples[0][1], np.array([1, 1]) / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(
            np.abs(triples[1][1]), np.abs(np.array([1, -1]) / np.sqrt(2)), atol=1e-12
        )

    def test_reassembly_and_orthonormality(self, rng):
        for dims in [(3,), (2, 2), (4, 1)]:
            st = random_state(rng, dims)
            triples = schatten(st)
            assert abs(sum(t[0] for t in triples) - 1.0) < 1e-10
            total = sum(lam * np.outer(v, v.conj()) for lam, v, _ in triples)
            assert bm.max_abs(total - st.full_matrix()) < 1e-10
            # orthonormal within blocks
            for i in range(st.structure.num_blocks):
                vecs = [v for lam, v, idx in triples if idx == i]
                for a in range(len(vecs)):
                    for b in range(a + 1, len(vecs)):
                        assert abs(np.vdot(vecs[a], vecs[b])) < 1e-10

    def test_zero_weight_dropped(self):
        st = DensityState(BlockStructure((2, 1)), [np.eye(2) / 2, np.zeros((1, 1))])
        assert all(idx == 0 for _, _, idx in schatten(st))
