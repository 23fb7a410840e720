"""Operator algebra, Bessel evaluations and state containers."""

import math

import numpy as np
import pytest

from rabi_spt.hilbert import (
    TRUNCATION_TAIL,
    HilbertSpec,
    QuantumState,
    TruncationError,
    UnsupportedError,
    annihilation,
    bessel_j,
    coherent_state,
    displacement,
    expectation,
    fidelity,
    fock_parity,
    join,
    matrix_exp,
    number_op,
    partial_trace_qubit,
    partial_trace_resonator,
    partial_transpose_qubit,
    qubit_block,
    qubit_op,
    squeezing,
    squeezing_leakage,
)


def bessel_series(m: int, x: float, terms: int = 40) -> float:
    """Independent power-series evaluation of J_m for integer m >= 0."""
    s = 0.0
    for k in range(terms):
        s += (-1.0) ** k / (math.factorial(k) * math.factorial(k + m)) * (x / 2.0) ** (2 * k + m)
    return s


class TestBessel:
    def test_against_power_series(self):
        for m in range(9):
            for x in (0.1, 0.5, 0.82925, 2.0, 5.0):
                assert abs(bessel_j(m, x) - bessel_series(m, x)) < 1e-9

    def test_pinned_value_at_modulation_depth(self):
        # frozen from the 40-term power series
        assert abs(bessel_j(2, 0.82925) - 0.081135860050343) < 1e-10
        assert abs(bessel_j(0, 0.82925) - 0.835335078275156) < 1e-10

    def test_negative_order_reflection(self):
        for m in range(1, 9):
            for x in (0.3, 0.82925, 2.7):
                assert abs(bessel_j(-m, x) - (-1.0) ** m * bessel_j(m, x)) < 1e-12

    def test_jacobi_anger_resummation(self):
        """Sideband weights must resum to the original phase modulation."""
        theta = 0.7
        for x in (0.82925, 2.0):
            s = sum(
                1j ** m * bessel_j(m, x) * np.exp(1j * m * theta)
                for m in range(-15, 16)
            )
            assert abs(s - np.exp(1j * x * math.cos(theta))) < 1e-9


class TestLadderOperators:
    def test_annihilation_matrix_elements(self):
        a = annihilation(12)
        for n in range(1, 12):
            assert a[n - 1, n] == pytest.approx(math.sqrt(n))
        assert np.count_nonzero(a) == 11

    def test_vacuum_is_annihilated(self):
        a = annihilation(8)
        vac = np.zeros(8)
        vac[0] = 1.0
        assert np.linalg.norm(a @ vac) == 0.0

    def test_commutator_up_to_truncation(self):
        nf = 10
        a = annihilation(nf)
        comm = a @ a.conj().T - a.conj().T @ a
        expected = np.eye(nf)
        expected[-1, -1] = -(nf - 1)  # the cutoff eats the top level
        np.testing.assert_allclose(comm, expected, atol=1e-12)

    def test_number_and_parity(self):
        nf = 9
        a = annihilation(nf)
        np.testing.assert_allclose(number_op(nf), a.conj().T @ a, atol=1e-12)
        np.testing.assert_allclose(
            fock_parity(nf), np.diag((-1.0) ** np.arange(nf)), atol=1e-12
        )

    def test_spec_argument_accepted(self):
        spec = HilbertSpec(7)
        np.testing.assert_array_equal(annihilation(spec), annihilation(7))


class TestQubitOperators:
    def test_pauli_algebra(self):
        sx, sy, sz = (qubit_op(n) for n in "xyz")
        for s in (sx, sy, sz):
            np.testing.assert_allclose(s @ s, np.eye(2), atol=1e-15)
            np.testing.assert_allclose(s, s.conj().T, atol=1e-15)
        # energy convention: excited level at +1
        np.testing.assert_allclose(sz @ np.array([0.0, 1.0]), [0.0, 1.0], atol=1e-15)
        plus, minus = qubit_op("plus"), qubit_op("minus")
        np.testing.assert_allclose(sx, plus + minus, atol=1e-15)
        np.testing.assert_allclose(sy, 1j * (plus - minus), atol=1e-15)

    def test_minus_lowers_excited_to_ground(self):
        minus = qubit_op("minus")
        e = np.array([0.0, 1.0])
        g = np.array([1.0, 0.0])
        np.testing.assert_allclose(minus @ e, g, atol=1e-15)
        assert np.linalg.norm(minus @ g) == 0.0

    def test_plus_is_adjoint_of_minus(self):
        np.testing.assert_allclose(
            qubit_op("plus"), qubit_op("minus").conj().T, atol=1e-15
        )

    def test_three_level_ladder(self):
        low = qubit_op("lower", 3)
        f = np.array([0.0, 0.0, 1.0])
        e = np.array([0.0, 1.0, 0.0])
        np.testing.assert_allclose(low @ f, math.sqrt(2.0) * e, atol=1e-15)

    def test_unknown_name_rejected(self):
        with pytest.raises((KeyError, ValueError)):
            qubit_op("w")


class TestDisplacement:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(displacement(10, 0.0), np.eye(10), atol=1e-14)

    def test_vacuum_overlap(self):
        d = displacement(40, 1.0)
        assert abs(d[0, 0] - math.exp(-0.5)) < 1e-8

    def test_inverse(self):
        nf = 40
        prod = displacement(nf, 0.7 + 0.4j) @ displacement(nf, -0.7 - 0.4j)
        assert np.max(np.abs(prod - np.eye(nf))) < 1e-8

    def test_matches_coherent_state(self):
        nf = 40
        alpha = 1.1 - 0.6j
        np.testing.assert_allclose(
            displacement(nf, alpha)[:, 0], coherent_state(nf, alpha), atol=1e-8
        )

    def test_truncation_guard(self):
        with pytest.raises(TruncationError):
            displacement(6, 3.0)


class TestSqueezing:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(squeezing(12, 0.0), np.eye(12), atol=1e-14)

    def test_quadrature_variance(self):
        """Positive r shrinks Var[(a + a^dag)/2] to exp(-2r)/4."""
        nf, r = 40, 0.2
        psi = squeezing(nf, r)[:, 0]
        a = annihilation(nf)
        x = 0.5 * (a + a.conj().T)
        var = np.vdot(psi, x @ x @ psi).real - np.vdot(psi, x @ psi).real ** 2
        assert abs(var - math.exp(-2 * r) / 4.0) < 1e-6

    def test_even_photon_content(self):
        psi = squeezing(40, 0.3)[:, 0]
        assert np.max(np.abs(psi[1::2])) < 1e-10

    def test_amplitudes_match_analytic_law(self):
        nf, r = 40, 0.35
        psi = squeezing(nf, r)[:, 0]
        th = math.tanh(r)
        for k in range(6):
            expected = (
                math.sqrt(math.factorial(2 * k))
                / (2.0 ** k * math.factorial(k))
                * th ** k
                / math.sqrt(math.cosh(r))
            )
            assert abs(abs(psi[2 * k]) - expected) < 1e-10

    def test_leakage_law_and_guard(self):
        # exact even-photon tail mass
        leak = squeezing_leakage(8, 1.5)
        tail = 1.0 - sum(
            math.factorial(2 * k) * math.tanh(1.5) ** (2 * k)
            / (4.0 ** k * math.factorial(k) ** 2 * math.cosh(1.5))
            for k in range(4)
        )
        assert abs(leak - tail) < 1e-12
        assert leak > TRUNCATION_TAIL
        with pytest.raises(TruncationError):
            squeezing(8, 1.5)


class TestMatrixExp:
    def test_zero(self):
        np.testing.assert_allclose(matrix_exp(np.zeros((5, 5))), np.eye(5), atol=1e-14)

    def test_pauli_rotation(self):
        got = matrix_exp(0.5j * math.pi * qubit_op("x"))
        np.testing.assert_allclose(got, 1j * qubit_op("x"), atol=1e-10)

    def test_diagonal(self):
        d = np.diag([0.3, -1.2, 2.5])
        np.testing.assert_allclose(matrix_exp(d), np.diag(np.exp(np.diag(d))), atol=1e-12)

    def test_inverse_pairs(self, rng):
        for _ in range(5):
            m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            m *= 10.0 / np.linalg.norm(m, 2)
            prod = matrix_exp(m) @ matrix_exp(-m)
            assert np.max(np.abs(prod - np.eye(8))) < 1e-8


def random_density(rng, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


class TestJointStructure:
    def test_join_ordering(self):
        """Qubit factor on the left, resonator on the right."""
        spec = HilbertSpec(5)
        sz = qubit_op("z")
        np.testing.assert_array_equal(
            join(spec, qubit=sz), np.kron(sz, np.eye(5))
        )
        num = number_op(5)
        np.testing.assert_array_equal(
            join(spec, resonator=num), np.kron(np.eye(2), num)
        )

    def test_partial_traces_of_product(self, rng):
        spec = HilbertSpec(6)
        rho_q = random_density(rng, 2)
        rho_r = random_density(rng, 6)
        joint = np.kron(rho_q, rho_r)
        np.testing.assert_allclose(partial_trace_qubit(joint, spec), rho_r, atol=1e-12)
        np.testing.assert_allclose(partial_trace_resonator(joint, spec), rho_q, atol=1e-12)

    def test_partial_traces_preserve_trace(self, rng):
        spec = HilbertSpec(4)
        for _ in range(50):
            joint = random_density(rng, spec.dim)
            assert abs(np.trace(partial_trace_qubit(joint, spec)) - 1.0) < 1e-12
            assert abs(np.trace(partial_trace_resonator(joint, spec)) - 1.0) < 1e-12

    def test_qubit_block_of_product(self, rng):
        spec = HilbertSpec(6)
        rho_q = random_density(rng, 2)
        rho_r = random_density(rng, 6)
        joint = np.kron(rho_q, rho_r)
        np.testing.assert_allclose(
            qubit_block(joint, "g", "e", spec), rho_q[0, 1] * rho_r, atol=1e-12
        )
        np.testing.assert_allclose(
            qubit_block(joint, "g", "g", spec) + qubit_block(joint, "e", "e", spec),
            partial_trace_qubit(joint, spec),
            atol=1e-12,
        )


class TestPartialTranspose:
    def test_separable_stays_positive(self, rng):
        spec = HilbertSpec(5)
        rho = 0.5 * np.kron(random_density(rng, 2), random_density(rng, 5))
        rho += 0.5 * np.kron(random_density(rng, 2), random_density(rng, 5))
        eigs = np.linalg.eigvalsh(partial_transpose_qubit(rho, spec))
        assert eigs.min() > -1e-12

    def test_bell_like_minimum(self):
        spec = HilbertSpec(4)
        e0 = np.kron([0.0, 1.0], [1.0, 0.0, 0.0, 0.0])
        g1 = np.kron([1.0, 0.0], [0.0, 1.0, 0.0, 0.0])
        psi = (e0 + g1) / math.sqrt(2.0)
        pt = partial_transpose_qubit(np.outer(psi, psi.conj()), spec)
        assert abs(np.linalg.eigvalsh(pt).min() + 0.5) < 1e-12

    def test_involution(self, rng):
        spec = HilbertSpec(3)
        rho = random_density(rng, spec.dim)
        np.testing.assert_allclose(
            partial_transpose_qubit(partial_transpose_qubit(rho, spec), spec),
            rho,
            atol=1e-14,
        )

    def test_three_levels_unsupported(self):
        spec = HilbertSpec(3, 3)
        with pytest.raises(UnsupportedError):
            partial_transpose_qubit(np.eye(spec.dim) / spec.dim, spec)


class TestQuantumState:
    def test_from_vector_normalizes(self):
        spec = HilbertSpec(4)
        v = np.zeros(spec.dim, dtype=complex)
        v[0] = 2.0
        st = QuantumState.from_vector(v, spec)
        assert abs(np.trace(st.rho) - 1.0) < 1e-12
        assert st.purity() == pytest.approx(1.0)

    def test_rho_is_read_only(self):
        spec = HilbertSpec(3)
        st = QuantumState.from_vector(np.ones(spec.dim), spec)
        with pytest.raises(ValueError):
            st.rho[0, 0] = 5.0

    def test_validate_rejects_bad_matrices(self):
        spec = HilbertSpec(3)
        dim = spec.dim
        bad_herm = np.eye(dim, dtype=complex) / dim
        bad_herm[0, 1] = 0.5
        with pytest.raises(ValueError):
            QuantumState(bad_herm, spec).validate()
        with pytest.raises(ValueError):
            QuantumState(2.0 * np.eye(dim) / dim, spec).validate()
        neg = np.eye(dim, dtype=complex) / (dim - 1)
        neg[0, 0] = -1.0 / (dim - 1)
        with pytest.raises(ValueError):
            QuantumState(neg, spec).validate()

    def test_purity_of_maximally_mixed(self):
        spec = HilbertSpec(5)
        st = QuantumState(np.eye(spec.dim) / spec.dim, spec)
        assert st.purity() == pytest.approx(1.0 / spec.dim)


class TestFidelityAndExpectation:
    def test_pure_state_overlap(self, rng):
        for _ in range(10):
            u = rng.normal(size=6) + 1j * rng.normal(size=6)
            v = rng.normal(size=6) + 1j * rng.normal(size=6)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            f = fidelity(np.outer(u, u.conj()), np.outer(v, v.conj()))
            assert abs(f - abs(np.vdot(u, v)) ** 2) < 1e-7

    def test_identical_states(self, rng):
        rho = random_density(rng, 7)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_symmetry(self, rng):
        a = random_density(rng, 5)
        b = random_density(rng, 5)
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-10)

    def test_coherent_state_statistics(self):
        nf = 30
        alpha = 1.3
        c = coherent_state(nf, alpha)
        assert abs(np.vdot(c, c) - 1.0) < 1e-12
        assert abs(expectation(np.outer(c, c.conj()), number_op(nf)) - alpha ** 2) < 1e-9
        # Poisson amplitudes
        for n in range(5):
            expected = math.exp(-alpha ** 2 / 2.0) * alpha ** n / math.sqrt(math.factorial(n))
            assert abs(c[n] - expected) < 1e-12
