"""Finite-dimensional qubit-resonator Hilbert space utilities.

Conventions used across the package:

* Joint operators act on ``qubit x resonator`` (qubit index slowest), so a
  joint matrix has shape ``(nq * nf, nq * nf)`` with ``nq`` qubit levels and
  ``nf`` Fock levels.
* Qubit basis ordering is ``|g> = 0``, ``|e> = 1`` (and ``|f> = 2`` when a
  third level is kept), hence ``sigma_z = |e><e| - |g><g|`` and
  ``sigma_minus = |g><e|``.
* All operators are dense ``numpy`` arrays of dtype complex128; frequencies
  are angular (rad/us) and times are in microseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.special
import scipy.stats

# Operators are plain dense complex matrices.
ComplexOperator = np.ndarray

#: Probability mass allowed beyond the Fock cutoff before an operation
#: is considered unfaithful to the truncated space.
TRUNCATION_TAIL = 1e-6


class TruncationError(Exception):
    """An operation would populate Fock levels beyond the cutoff."""


class ConvergenceError(Exception):
    """A numerical routine failed to produce a finite result."""


class UnsupportedError(Exception):
    """The operation is not defined for this space (e.g. >2 qubit levels)."""


@dataclass(frozen=True)
class HilbertSpec:
    """Shape of the truncated joint space.

    Parameters
    ----------
    n_fock:
        Number of retained Fock levels ``|0> .. |n_fock-1>``.
    n_qubit_levels:
        Number of retained qubit levels (2 or 3).
    """

    n_fock: int = 40
    n_qubit_levels: int = 2

    def __post_init__(self):
        if self.n_fock < 2:
            raise ValueError("n_fock must be at least 2")
        if self.n_qubit_levels not in (2, 3):
            raise ValueError("n_qubit_levels must be 2 or 3")

    @property
    def dim(self) -> int:
        return self.n_fock * self.n_qubit_levels


@dataclass(frozen=True)
class QuantumState:
    """Density matrix on a :class:`HilbertSpec` (or on one factor).

    ``rho`` is stored as a read-only complex array.  ``validate`` checks the
    density-matrix axioms within numerical tolerance and raises ``ValueError``
    on violation.
    """

    rho: np.ndarray
    spec: HilbertSpec
    joint: bool = field(default=True)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        dim = self.spec.dim if self.joint else self.spec.n_fock
        if rho.shape != (dim, dim):
            raise ValueError(f"state shape {rho.shape} does not match spec dim {dim}")

    @classmethod
    def from_vector(cls, psi: np.ndarray, spec: HilbertSpec, joint: bool = True) -> "QuantumState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError("zero vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()), spec, joint)

    def validate(self, *, herm_tol: float = 1e-10, trace_tol: float = 1e-9,
                 eig_tol: float = 1e-8) -> "QuantumState":
        rho = self.rho
        scale = max(np.linalg.norm(rho), 1.0)
        if np.linalg.norm(rho - rho.conj().T) > herm_tol * scale:
            raise ValueError("state is not Hermitian within tolerance")
        if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
            raise ValueError("state trace differs from 1 beyond tolerance")
        if np.linalg.eigvalsh(rho).min() < -eig_tol:
            raise ValueError("state has a negative eigenvalue beyond tolerance")
        return self

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


# ---------------------------------------------------------------------------
# elementary operators


def _nf(spec_or_n: "HilbertSpec | int") -> int:
    """Factor-local constructors take either the spec or a bare cutoff."""
    if isinstance(spec_or_n, HilbertSpec):
        return spec_or_n.n_fock
    return int(spec_or_n)


def annihilation(n_fock: "HilbertSpec | int") -> ComplexOperator:
    """Resonator annihilation operator on the truncated Fock space."""
    n_fock = _nf(n_fock)
    a = np.zeros((n_fock, n_fock), dtype=complex)
    for n in range(1, n_fock):
        a[n - 1, n] = math.sqrt(n)
    return a


def annihilation_joint(spec: HilbertSpec) -> ComplexOperator:
    """Annihilation operator embedded in the joint space."""
    return join(spec, resonator=annihilation(spec.n_fock))


def number_op(n_fock: "HilbertSpec | int") -> ComplexOperator:
    return np.diag(np.arange(_nf(n_fock), dtype=float)).astype(complex)


def fock_parity(n_fock: "HilbertSpec | int") -> ComplexOperator:
    """Photon-number parity ``(-1)^(a^dag a)`` on the resonator factor."""
    return np.diag((-1.0) ** np.arange(_nf(n_fock))).astype(complex)


def qubit_op(name: str, n_qubit_levels: int = 2) -> ComplexOperator:
    """Qubit operator in the ``|g>, |e>, (|f>)`` basis.

    ``name`` is one of ``x, y, z, minus, plus, lower``; ``lower`` is the
    multi-level ladder ``|g><e| + sqrt(2)|e><f|`` and equals ``minus`` for
    two levels.
    """
    op = np.zeros((n_qubit_levels, n_qubit_levels), dtype=complex)
    if name == "z":
        op[0, 0], op[1, 1] = -1.0, 1.0
    elif name == "x":
        op[0, 1] = op[1, 0] = 1.0
    elif name == "y":
        op[0, 1], op[1, 0] = -1j, 1j
    elif name == "minus":
        op[0, 1] = 1.0
    elif name == "plus":
        op[1, 0] = 1.0
    elif name == "lower":
        for j in range(1, n_qubit_levels):
            op[j - 1, j] = math.sqrt(j)
    else:
        raise ValueError(f"unknown qubit operator {name!r}")
    return op


def join(spec: HilbertSpec, qubit: ComplexOperator | None = None,
         resonator: ComplexOperator | None = None) -> ComplexOperator:
    """Embed factor-local operators into the joint space (identity default)."""
    q = np.eye(spec.n_qubit_levels, dtype=complex) if qubit is None else np.asarray(qubit, dtype=complex)
    r = np.eye(spec.n_fock, dtype=complex) if resonator is None else np.asarray(resonator, dtype=complex)
    if q.shape != (spec.n_qubit_levels, spec.n_qubit_levels):
        raise ValueError("qubit factor has wrong shape")
    if r.shape != (spec.n_fock, spec.n_fock):
        raise ValueError("resonator factor has wrong shape")
    return np.kron(q, r)


def fock_state(n_fock: "HilbertSpec | int", n: int) -> np.ndarray:
    n_fock = _nf(n_fock)
    if not 0 <= n < n_fock:
        raise IndexError("Fock index outside the truncated space")
    v = np.zeros(n_fock, dtype=complex)
    v[n] = 1.0
    return v


def qubit_state(n_qubit_levels: int, level: int | str) -> np.ndarray:
    v = np.zeros(n_qubit_levels, dtype=complex)
    v[_qubit_index(level, n_qubit_levels)] = 1.0
    return v


def _qubit_index(level: int | str, n_qubit_levels: int) -> int:
    if isinstance(level, str):
        try:
            level = "gef".index(level)
        except ValueError:
            raise IndexError(f"unknown qubit level {level!r}")
    if not 0 <= level < n_qubit_levels:
        raise IndexError("qubit level outside the retained space")
    return level


# ---------------------------------------------------------------------------
# displacement / squeezing with truncation guards


def displacement_leakage(n_fock: "HilbertSpec | int", beta: complex) -> float:
    """Estimated probability mass a displacement of the vacuum by ``beta``
    places at or beyond the cutoff (Poisson tail of mean ``|beta|^2``)."""
    n_fock = _nf(n_fock)
    mean = abs(beta) ** 2
    if mean == 0:
        return 0.0
    return float(scipy.stats.poisson.sf(n_fock - 1, mean))


def displacement(n_fock: "HilbertSpec | int", beta: complex) -> ComplexOperator:
    """Displacement operator ``exp(beta a^dag - conj(beta) a)``.

    Raises
    ------
    TruncationError
        If a coherent state of amplitude ``beta`` would leave more than
        ``TRUNCATION_TAIL`` of its mass beyond the cutoff.
    """
    n_fock = _nf(n_fock)
    leak = displacement_leakage(n_fock, beta)
    if leak > TRUNCATION_TAIL:
        raise TruncationError(
            f"displacement |beta|={abs(beta):.3f} leaks {leak:.2e} past n_fock={n_fock}")
    a = annihilation(n_fock)
    return matrix_exp(beta * a.conj().T - np.conj(beta) * a)


def squeezing_leakage(n_fock: "HilbertSpec | int", r: float) -> float:
    """Mass of the squeezed vacuum ``S(r)|0>`` at or beyond the cutoff.

    Uses the exact photon-number law of the squeezed vacuum,
    ``P_2k = (2k)! tanh^2k(r) / (4^k (k!)^2 cosh r)``.
    """
    n_fock = _nf(n_fock)
    t = math.tanh(abs(r)) ** 2
    if t == 0:
        return 0.0
    total = 0.0
    term = 1.0 / math.cosh(r)  # P_0
    k = 0
    while 2 * k < n_fock:
        total += term
        term *= t * (2 * k + 1) / (2 * k + 2)  # P_{2k+2} / P_{2k}
        k += 1
    return max(0.0, 1.0 - total)


def squeezing(n_fock: "HilbertSpec | int", r: float) -> ComplexOperator:
    """Single-mode squeezing ``exp[(r a^2 - r a^dag^2)/2]`` for real ``r``.

    Positive ``r`` squeezes the ``a + a^dag`` quadrature: the variance of
    ``(a + a^dag)/2`` in ``S(r)|0>`` is ``exp(-2r)/4``.

    Raises ``TruncationError`` when the squeezed vacuum would leak more than
    ``TRUNCATION_TAIL`` of its mass past the cutoff.
    """
    n_fock = _nf(n_fock)
    leak = squeezing_leakage(n_fock, r)
    if leak > TRUNCATION_TAIL:
        raise TruncationError(
            f"squeezing r={r:.3f} leaks {leak:.2e} past n_fock={n_fock}")
    a = annihilation(n_fock)
    ad = a.conj().T
    return matrix_exp(0.5 * r * (a @ a - ad @ ad))


# ---------------------------------------------------------------------------
# scalar / matrix special functions


def bessel_j(m: int, x: float) -> float:
    """Bessel function of the first kind with integer order."""
    return float(scipy.special.jv(m, x))


def matrix_exp(a: ComplexOperator) -> ComplexOperator:
    """Matrix exponential of a dense complex matrix.

    Raises ``ConvergenceError`` if the result contains non-finite entries.
    """
    out = scipy.linalg.expm(np.asarray(a, dtype=complex))
    if not np.all(np.isfinite(out)):
        raise ConvergenceError("matrix exponential produced non-finite entries")
    return out


# ---------------------------------------------------------------------------
# partial operations on joint states


def _as_blocks(rho: np.ndarray, spec: HilbertSpec) -> np.ndarray:
    dim = spec.dim
    if rho.shape != (dim, dim):
        raise ValueError("joint operator has wrong shape for spec")
    return rho.reshape(spec.n_qubit_levels, spec.n_fock, spec.n_qubit_levels, spec.n_fock)


def partial_trace_qubit(state: QuantumState | np.ndarray, spec: HilbertSpec | None = None) -> ComplexOperator:
    """Trace out the qubit, returning the reduced resonator density matrix."""
    rho, spec = _rho_spec(state, spec)
    return np.einsum("kikj->ij", _as_blocks(rho, spec))


def partial_trace_resonator(state: QuantumState | np.ndarray, spec: HilbertSpec | None = None) -> ComplexOperator:
    """Trace out the resonator, returning the reduced qubit density matrix."""
    rho, spec = _rho_spec(state, spec)
    return np.einsum("kili->kl", _as_blocks(rho, spec))


def qubit_block(state: QuantumState | np.ndarray, k: int | str, kp: int | str,
                spec: HilbertSpec | None = None) -> ComplexOperator:
    """Resonator-space block ``<k| rho |k'>`` of a joint density matrix.

    The block of a proper density matrix is unnormalized; its trace is the
    population of (or coherence between) the qubit levels.
    """
    rho, spec = _rho_spec(state, spec)
    i = _qubit_index(k, spec.n_qubit_levels)
    j = _qubit_index(kp, spec.n_qubit_levels)
    return _as_blocks(rho, spec)[i, :, j, :].copy()


def partial_transpose_qubit(state: QuantumState | np.ndarray, spec: HilbertSpec | None = None) -> ComplexOperator:
    """Partial transpose over the qubit factor of a two-level joint state."""
    rho, spec = _rho_spec(state, spec)
    if spec.n_qubit_levels != 2:
        raise UnsupportedError("partial transpose implemented for two qubit levels only")
    blocks = _as_blocks(rho, spec)
    return blocks.transpose(2, 1, 0, 3).reshape(spec.dim, spec.dim)


def _rho_spec(state, spec):
    if isinstance(state, QuantumState):
        return np.asarray(state.rho), state.spec
    if spec is None:
        raise ValueError("spec required when passing a bare array")
    return np.asarray(state, dtype=complex), spec


# ---------------------------------------------------------------------------
# convenience constructors and measures


def coherent_state(n_fock: "HilbertSpec | int", alpha: complex) -> np.ndarray:
    """Coherent-state vector ``D(alpha)|0>`` on the truncated space."""
    n_fock = _nf(n_fock)
    return displacement(n_fock, alpha) @ fock_state(n_fock, 0)


def expectation(op: ComplexOperator, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``[Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2``.

    Reduces to ``|<psi|phi>|^2`` for pure states.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    inner = sqrt_rho @ sigma @ sqrt_rho
    ev = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2)
