import math

import numpy as np
import pytest

from entlab import blockmat as bm
from entlab.algebra import BlockStructure, DensityState
from entlab.entangle import (
    AmplitudeOperator,
    CompoundState,
    Decomposition,
    amplitude_expectation,
    c_compound,
    classify,
    compound_from_amplitude,
    d_compound,
    entangled_expectation,
    entangling_from_amplitude,
    entangling_from_decomposition,
    marginals,
    schatten_decomposition,
    standard_compound,
    strong_orthogonality_defect,
    weak_orthogonality_defect,
)
from entlab.errors import DomainError, ShapeError, StructureError

from conftest import random_amplitude, random_state

E1 = np.array([1.0, 0.0], dtype=complex)
E2 = np.array([0.0, 1.0], dtype=complex)


def bell_amplitude():
    vec = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return AmplitudeOperator(vec[:, None], 2, 2)


def matrix_units(d):
    for i in range(d):
        for j in range(d):
            u = np.zeros((d, d), dtype=complex)
            u[i, j] = 1.0
            yield u


class TestAmplitudeOperator:
    def test_normalization_enforced(self):
        with pytest.raises(DomainError):
            AmplitudeOperator(np.ones((4, 1)), 2, 2)

    def test_minimal_domain_trimming(self):
        m = np.zeros((4, 3), dtype=complex)
        m[0, 0] = 1.0
        ups = AmplitudeOperator(m, 2, 2)
        assert ups.dim_f == 1

    def test_shape_guard(self):
        with pytest.raises(ShapeError):
            AmplitudeOperator(np.ones((3, 1)) / np.sqrt(3), 2, 2)


class TestCompoundFromAmplitude:
    def test_product_vector(self, rng):
        zeta = np.array([0.6, 0.8j])
        eta = np.array([1.0, 1.0]) / np.sqrt(2)
        ups = AmplitudeOperator(np.kron(zeta, eta)[:, None], 2, 2)
        cs = compound_from_amplitude(ups)
        expected = bm.kron(np.outer(zeta, zeta.conj()), np.outer(eta, eta.conj()))
        np.testing.assert_allclose(cs.omega, expected, atol=1e-12)

    def test_bell_marginals(self):
        cs = compound_from_amplitude(bell_amplitude())
        # oracle: expand u u† by hand for the Bell vector
        expected = np.zeros((4, 4), dtype=complex)
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)]:
            expected[i, j] = 0.5
        np.testing.assert_allclose(cs.omega, expected, atol=1e-14)
        sig, rho = marginals(cs)
        np.testing.assert_allclose(sig.full_matrix(), np.eye(2) / 2, atol=1e-12)
        np.testing.assert_allclose(rho.full_matrix(), np.eye(2) / 2, atol=1e-12)

    def test_classically_correlated_mixture(self):
        m = np.zeros((4, 2), dtype=complex)
        m[0, 0] = 1 / np.sqrt(2)  # e1 (x) e1
        m[3, 1] = 1 / np.sqrt(2)  # e2 (x) e2
        cs = compound_from_amplitude(AmplitudeOperator(m, 2, 2))
        expected = 0.5 * np.diag([1.0, 0, 0, 0]) + 0.5 * np.diag([0, 0, 0, 1.0])
        np.testing.assert_allclose(cs.omega, expected, atol=1e-14)

    def test_marginals_are_states(self, rng):
        for _ in range(10):
            cs = compound_from_amplitude(random_amplitude(rng))
            sig, rho = marginals(cs)
            assert abs(sig.nu().sum() - 1.0) < 1e-10
            assert abs(rho.nu().sum() - 1.0) < 1e-10


class TestReconstruction:
    def test_product_amplitude(self):
        zeta = np.array([0.6, 0.8])
        eta = np.array([1.0, 0.0])
        ups = AmplitudeOperator(np.kron(zeta, eta)[:, None], 2, 2)
        kappa = entangling_from_amplitude(ups)
        # defining identity with scalars: k[(0,h),n] = u[(n,h),0]
        np.testing.assert_allclose(
            kappa.matrix, ups.matrix.reshape(2, 2).T.reshape(2, 2), atol=1e-14
        )
        cs = compound_from_amplitude(ups)
        np.testing.assert_allclose(
            kappa.sigma(), bm.partial_trace(cs.omega, 2, 2, "right"), atol=1e-12
        )

    def test_bell_gram_and_marginal(self):
        kappa = entangling_from_amplitude(bell_amplitude())
        np.testing.assert_allclose(kappa.gram(), np.eye(2) / 2, atol=1e-12)
        np.testing.assert_allclose(kappa.rho(), np.eye(2) / 2, atol=1e-12)

    def test_matrix_unit_bruteforce(self, rng):
        for _ in range(8):
            ups = random_amplitude(rng)
            kappa = entangling_from_amplitude(ups)
            for b in matrix_units(ups.dim_g):
                for a in matrix_units(ups.dim_h):
                    lhs = entangled_expectation(kappa, b, a)
                    rhs = amplitude_expectation(ups, b, a)
                    assert abs(lhs - rhs) < 1e-10

    def test_gram_and_marginals_vs_omega(self, rng):
        for _ in range(10):
            ups = random_amplitude(rng)
            kappa = entangling_from_amplitude(ups)
            omega = ups.matrix @ ups.matrix.conj().T
            sig = bm.partial_trace(omega, ups.dim_g, ups.dim_h, "right")
            rho = bm.partial_trace(omega, ups.dim_g, ups.dim_h, "left")
            assert bm.max_abs(kappa.sigma() - sig) < 1e-10
            assert bm.max_abs(kappa.rho() - rho) < 1e-10
            # Gram matrix is the basis transpose of the G-marginal.
            assert bm.max_abs(kappa.gram() - sig.T) < 1e-10


class TestStandardCompound:
    def test_pure_state_is_product(self, rng):
        eta = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        eta /= np.linalg.norm(eta)
        st = DensityState(BlockStructure((3,)), [np.outer(eta, eta.conj())])
        cs = standard_compound(st)
        sig, rho = marginals(cs)
        np.testing.assert_allclose(sig.full_matrix(), st.full_matrix(), atol=1e-10)
        np.testing.assert_allclose(rho.full_matrix(), st.full_matrix(), atol=1e-10)
        # rank-one overall: a pure product state
        w = bm.psd_eigvals(cs.omega)
        assert w[0] > 1 - 1e-10 and abs(w[1]) < 1e-10

    def test_maximally_mixed_gives_bell(self):
        st = DensityState(BlockStructure((2,)), [np.eye(2) / 2])
        cs = standard_compound(st)
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        np.testing.assert_allclose(cs.omega, np.outer(bell, bell.conj()), atol=1e-12)

    def test_block_mixture_weights(self, rng):
        st = random_state(rng, (2, 3))
        cs = standard_compound(st)
        nu = st.nu()
        # spectrum of the compound is exactly the central weights
        w = bm.psd_eigvals(cs.omega)
        np.testing.assert_allclose(w[:2], np.sort(nu)[::-1], atol=1e-10)
        assert bm.max_abs(w[2:]) < 1e-10

    def test_marginal_symmetry_complex_states(self, rng):
        for dims in [(2,), (3,), (2, 2), (4, 1)]:
            st = random_state(rng, dims)
            sig, rho = marginals(standard_compound(st))
            for a, b in zip(sig.blocks, st.blocks):
                assert bm.max_abs(np.asarray(a) - np.asarray(b)) < 1e-10
            for a, b in zip(rho.blocks, st.blocks):
                assert bm.max_abs(np.asarray(a) - np.asarray(b)) < 1e-10

    def test_pairing_formula_real_state(self, rng):
        # on real states the compound pairs as tr(transpose(B) r^1/2 A r^1/2)
        mat = rng.standard_normal((3, 3))
        mat = mat @ mat.T
        mat /= np.trace(mat)
        st = DensityState(BlockStructure((3,)), [mat])
        root = bm.spectral_fn(st.full_matrix(), "sqrt")
        cs = standard_compound(st)
        for b in matrix_units(3):
            for a in matrix_units(3):
                expected = np.trace(b.T @ root @ a @ root)
                got = np.trace(bm.kron(b, a) @ cs.omega)
                assert abs(expected - got) < 1e-10

    def test_diagonal_support(self, rng):
        st = random_state(rng, (2, 2))
        cs = standard_compound(st)
        # mass only on the paired diagonal blocks H_i (x) H_i
        d = st.dim
        probe = np.array(cs.omega)
        for i in range(st.structure.num_blocks):
            s = st.structure.block_slice(i)
            rows = [g * d + h for g in range(s.start, s.stop) for h in range(s.start, s.stop)]
            probe[np.ix_(rows, rows)] = 0.0
        assert bm.max_abs(probe) < 1e-12


class TestCCompound:
    def test_single_term_product(self, rng):
        sig = random_state(rng, (2,))
        rho = random_state(rng, (3,))
        cs = c_compound([sig], [rho], [1.0])
        np.testing.assert_allclose(
            cs.omega, bm.kron(sig.full_matrix(), rho.full_matrix()), atol=1e-12
        )

    def test_two_pure_terms(self):
        s = BlockStructure((2,))
        p1 = DensityState(s, [np.outer(E1, E1)])
        p2 = DensityState(s, [np.outer(E2, E2)])
        cs = c_compound([p1, p2], [p1, p2], [0.5, 0.5])
        np.testing.assert_allclose(cs.omega, np.diag([0.5, 0, 0, 0.5]), atol=1e-14)

    def test_self_dual_family_marginals(self):
        # terms eta_n eta_n† (x) eta_n eta_n† with non-orthogonal eta_n
        s = BlockStructure((2,))
        eta1 = E1
        eta2 = (E1 + E2) / np.sqrt(2)
        mu = [0.5, 0.5]
        parts = [DensityState(s, [np.outer(e, e.conj())]) for e in (eta1, eta2)]
        cs = c_compound(parts, parts, mu)
        mix = 0.5 * np.outer(eta1, eta1.conj()) + 0.5 * np.outer(eta2, eta2.conj())
        sig, rho = marginals(cs)
        np.testing.assert_allclose(sig.full_matrix(), mix, atol=1e-12)
        np.testing.assert_allclose(rho.full_matrix(), mix, atol=1e-12)

    def test_length_mismatch(self, rng):
        st = random_state(rng, (2,))
        with pytest.raises(ShapeError):
            c_compound([st], [st, st], [0.5, 0.5])


class TestDCompound:
    def test_single_part(self, rng):
        st = random_state(rng, (2,))
        dec = Decomposition([st.full_matrix()])
        cs = d_compound(dec)
        np.testing.assert_allclose(cs.omega, st.full_matrix(), atol=1e-12)
        assert cs.structure_b.dims == (1,)

    def test_schatten_parts_block_diagonal(self):
        st = DensityState(BlockStructure((2,)), [np.diag([0.75, 0.25])])
        cs = d_compound(schatten_decomposition(st))
        expected = np.zeros((4, 4))
        expected[0, 0] = 0.75
        expected[3, 3] = 0.25
        np.testing.assert_allclose(cs.omega, expected, atol=1e-12)

    def test_nonorthogonal_parts_marginal_eigs(self):
        eta2 = (E1 + E2) / np.sqrt(2)
        dec = Decomposition(
            [0.5 * np.outer(E1, E1), 0.5 * np.outer(eta2, eta2.conj())],
            kind="pure",
        )
        cs = d_compound(dec)
        sig, rho = marginals(cs)
        np.testing.assert_allclose(sig.full_matrix(), np.eye(2) / 2, atol=1e-12)
        # hand result: eigenvalues of [[3/4, 1/4], [1/4, 1/4]] are (2±sqrt2)/4
        w = bm.psd_eigvals(rho.full_matrix())
        np.testing.assert_allclose(
            w, [(2 + np.sqrt(2)) / 4, (2 - np.sqrt(2)) / 4], atol=1e-12
        )
        np.testing.assert_allclose(w, [0.85355339, 0.14644661], atol=1e-7)

    def test_commutes_with_probe_projectors(self, rng):
        st = random_state(rng, (3,))
        dec = schatten_decomposition(st)
        cs = d_compound(dec)
        n, dh = len(dec.parts), dec.dim
        for k in range(n):
            proj = np.zeros((n, n))
            proj[k, k] = 1.0
            lifted = bm.kron(proj, np.eye(dh))
            assert bm.max_abs(lifted @ cs.omega - cs.omega @ lifted) < 1e-12

    def test_multiblock_parts_respect_structure(self, rng):
        st = random_state(rng, (2, 1))
        cs = d_compound(schatten_decomposition(st), st.structure)
        sig, rho = marginals(cs)
        for a, b in zip(rho.blocks, st.blocks):
            assert bm.max_abs(np.asarray(a) - np.asarray(b)) < 1e-10


class TestClassify:
    def test_schatten_is_o(self, rng):
        st = random_state(rng, (3,))
        assert classify(schatten_decomposition(st)).label == "o"

    def test_pure_nonorthogonal_is_d(self):
        eta2 = (E1 + E2) / np.sqrt(2)
        dec = Decomposition(
            [0.5 * np.outer(E1, E1), 0.5 * np.outer(eta2, eta2.conj())]
        )
        rep = classify(dec)
        assert rep.label == "d" and all(rep.pure_flags)
        assert rep.orthogonality_defect > 1e-3

    def test_mixed_overlapping_is_c(self):
        dec = Decomposition([np.eye(2) * 0.25, np.diag([0.3, 0.2])])
        rep = classify(dec)
        assert rep.label == "c"
        assert not all(rep.pure_flags)

    def test_hierarchy(self, rng):
        # every orthogonal decomposition with rank-one parts passes the d check
        st = random_state(rng, (4,))
        rep = classify(schatten_decomposition(st))
        assert rep.label == "o" and all(rep.pure_flags)

    def test_kind_validation(self):
        with pytest.raises(DomainError):
            Decomposition([np.eye(2) / 2], kind="pure")  # not rank one
        with pytest.raises(DomainError):
            eta2 = (E1 + E2) / np.sqrt(2)
            Decomposition(
                [0.5 * np.outer(E1, E1), 0.5 * np.outer(eta2, eta2.conj())],
                kind="orthogonal",
            )


class TestOrthogonalityDefects:
    def test_standard_kappa_in_eigenbasis(self, rng):
        from entlab.entangle import standard_amplitude

        st = random_state(rng, (3,))
        kappa = entangling_from_amplitude(standard_amplitude(st))
        _, basis = bm.herm_eig(st.full_matrix())
        assert weak_orthogonality_defect(kappa, basis) < 1e-9

    def test_random_kappa_sigma_eigenbasis(self, rng):
        for _ in range(5):
            ups = random_amplitude(rng, dim_g=3, dim_h=3, dim_f=2)
            kappa = entangling_from_amplitude(ups)
            w, basis = bm.herm_eig(kappa.sigma())
            assert weak_orthogonality_defect(kappa, basis, mu=w) < 1e-9

    def test_random_basis_generic_defect(self, rng):
        ups = random_amplitude(rng, dim_g=3, dim_h=3, dim_f=2)
        kappa = entangling_from_amplitude(ups)
        defects = [
            weak_orthogonality_defect(kappa, bm.haar_unitary(3, rng))
            for _ in range(6)
        ]
        assert max(defects) > 1e-3

    def test_schatten_diagonal_construction(self, rng):
        st = random_state(rng, (3,))
        dec = schatten_decomposition(st)
        kappa = entangling_from_decomposition(dec)
        assert strong_orthogonality_defect(kappa, dec.parts) < 1e-9

    def test_nonorthogonal_parts_still_strong(self):
        eta2 = (E1 + E2) / np.sqrt(2)
        dec = Decomposition(
            [0.5 * np.outer(E1, E1), 0.5 * np.outer(eta2, eta2.conj())]
        )
        kappa = entangling_from_decomposition(dec)
        assert strong_orthogonality_defect(kappa, dec.parts) < 1e-9

    def test_bell_strong_vs_weak(self):
        kappa = entangling_from_amplitude(bell_amplitude())
        assert strong_orthogonality_defect(kappa) > 0.4
        assert weak_orthogonality_defect(kappa, np.eye(2)) < 1e-9

    def test_strong_implies_weak(self, rng):
        for _ in range(5):
            st = random_state(rng, (3,))
            dec = schatten_decomposition(st)
            kappa = entangling_from_decomposition(dec)
            if strong_orthogonality_defect(kappa, dec.parts) < 1e-9:
                mu = dec.weights()
                assert weak_orthogonality_defect(
                    kappa, np.eye(kappa.dim_g), mu=mu
                ) < 1e-8


class TestCompoundStateValidation:
    def test_support_violation_rejected(self):
        sb = BlockStructure((1, 1))
        sa = BlockStructure((1, 1))
        omega = np.full((4, 4), 0.25)
        with pytest.raises(StructureError):
            CompoundState(omega, sb, sa)

    def test_trace_violation(self):
        sb = sa = BlockStructure((2,))
        with pytest.raises(DomainError):
            CompoundState(np.eye(4), sb, sa)

    def test_wire_roundtrip(self, rng):
        cs = compound_from_amplitude(random_amplitude(rng, dim_g=2, dim_h=2))
        back = CompoundState.from_wire(cs.to_wire())
        np.testing.assert_array_equal(back.omega, cs.omega)
