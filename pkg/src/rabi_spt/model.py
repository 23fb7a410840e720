"""Device model and effective quantum Rabi description.

A transmon whose frequency is modulated at two tones while it is driven
transversally realizes, in the frame rotating with the drive and the
resonator, an effective quantum Rabi Hamiltonian

    H = (Omega/2) sigma_z + delta a^dag a + eta sigma_x (a + a^dag)

with a normalized coupling ``xi = 2 eta / sqrt(Omega delta)`` that crosses
the superradiant critical point at ``xi = 1``.  This module maps circuit
parameters onto the effective ones, builds the exact rotating-frame
Hamiltonian with all retained sidebands (two and three qubit levels), and
provides the low-energy analytics of both phases.

Angular frequencies are in rad/us; ``*_mhz`` constructors take plain MHz
(cycles) and multiply by 2*pi.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import numpy as np

from .hilbert import (
    ComplexOperator,
    HilbertSpec,
    QuantumState,
    annihilation,
    bessel_j,
    displacement,
    fock_parity,
    fock_state,
    join,
    matrix_exp,
    number_op,
    qubit_op,
    qubit_state,
    squeezing,
)

TWO_PI = 2.0 * math.pi


class CriticalPointError(Exception):
    """Requested analytics exactly at the critical coupling."""


class DispersiveViolation(Exception):
    """An ancilla frequency schedule enters the non-dispersive regime."""


@dataclass(frozen=True)
class DeviceParams:
    """Circuit-level parameters.  Frequencies angular (rad/us), times in us.

    ``omega0`` is the static test-qubit frequency, ``omega_p`` the resonator
    frequency, ``f_idle`` the ancilla idle frequency.  ``eps1, nu1`` and
    ``eps2, nu2`` are the amplitudes and frequencies of the two qubit
    frequency-modulation tones, ``K`` the transverse drive amplitude,
    ``lam`` the qubit-resonator coupling, ``lambda_prime`` the
    ancilla-resonator coupling and ``gamma`` the qubit anharmonicity.
    ``Fg, Fe`` are test-qubit readout fidelities, ``Fg_anc, Fe_anc`` the
    ancilla ones.
    """

    omega0: float
    omega_p: float
    f_idle: float
    eps1: float
    nu1: float
    eps2: float
    nu2: float
    K: float
    lam: float
    lambda_prime: float
    gamma_anh: float
    T1_q: float
    T2_q: float
    T1_p: float
    Fg: float = 1.0
    Fe: float = 1.0
    Fg_anc: float = 1.0
    Fe_anc: float = 1.0

    @classmethod
    def from_mhz(cls, *, omega0=5180.0, omega_p=5581.0, f_idle=5930.0,
                 eps1=165.85, nu1=200.0, eps2=0.0, nu2=33.28, K=19.91,
                 lam=19.91, lambda_prime=20.91, gamma_anh=250.0,
                 T1_q=21.5, T2_q=1.1, T1_p=12.9,
                 Fg=0.983, Fe=0.937, Fg_anc=0.990, Fe_anc=0.920) -> "DeviceParams":
        """Build from MHz-valued frequencies (times stay in us)."""
        return cls(omega0=TWO_PI * omega0, omega_p=TWO_PI * omega_p,
                   f_idle=TWO_PI * f_idle, eps1=TWO_PI * eps1, nu1=TWO_PI * nu1,
                   eps2=TWO_PI * eps2, nu2=TWO_PI * nu2, K=TWO_PI * K,
                   lam=TWO_PI * lam, lambda_prime=TWO_PI * lambda_prime,
                   gamma_anh=TWO_PI * gamma_anh, T1_q=T1_q, T2_q=T2_q, T1_p=T1_p,
                   Fg=Fg, Fe=Fe, Fg_anc=Fg_anc, Fe_anc=Fe_anc)

    def with_eps2(self, eps2: float) -> "DeviceParams":
        return replace(self, eps2=eps2)


def table_s2() -> DeviceParams:
    """Measured device parameters of the experiment this package models."""
    return DeviceParams.from_mhz()


PRESETS = {"table-s2": table_s2}


@dataclass(frozen=True)
class EffectiveParams:
    """Effective Rabi-model parameters (rad/us).

    ``xi`` is the normalized coupling ``2 eta / sqrt(Omega delta)``; it is
    NaN when ``Omega * delta <= 0``.  ``B0`` is the drive-induced qubit
    splitting that the second modulation tone must match, ``mu`` the
    first-tone modulation index.
    """

    eta: float
    Omega: float
    delta: float
    B0: float = float("nan")
    mu: float = float("nan")

    @property
    def xi(self) -> float:
        prod = self.Omega * self.delta
        if not math.isfinite(prod) or prod <= 0.0:
            return float("nan")
        return 2.0 * self.eta / math.sqrt(prod)


def effective_from_device(dev: DeviceParams, delta: float = float("nan"),
                          eps2: float | None = None) -> EffectiveParams:
    """Map circuit parameters to effective Rabi parameters.

    ``delta`` (resonator-frame detuning) is an external knob set by the
    ancilla Stark shift; ``eps2`` overrides the second-tone amplitude when
    given.  The coupling keeps the second-order sideband of the modulated
    exchange interaction, the drive keeps the zeroth-order one:
    ``eta = lam J_2(mu) / 2``, ``B0 = 2 K J_0(mu)``, ``Omega = eps2 / 2``.
    """
    mu = dev.eps1 / dev.nu1
    eta = dev.lam * bessel_j(2, mu) / 2.0
    b0 = 2.0 * dev.K * bessel_j(0, mu)
    e2 = dev.eps2 if eps2 is None else eps2
    return EffectiveParams(eta=eta, Omega=e2 / 2.0, delta=delta, B0=b0, mu=mu)


# ---------------------------------------------------------------------------
# Hamiltonians


def rabi_hamiltonian(spec: HilbertSpec, p: EffectiveParams) -> ComplexOperator:
    """Effective quantum Rabi Hamiltonian on the joint space."""
    if spec.n_qubit_levels != 2:
        raise ValueError("the effective model is two-level")
    a = annihilation(spec.n_fock)
    h = 0.5 * p.Omega * join(spec, qubit=qubit_op("z"))
    h = h + p.delta * join(spec, resonator=number_op(spec.n_fock))
    h = h + p.eta * join(spec, qubit=qubit_op("x"), resonator=a + a.conj().T)
    return h


def parity_operator(spec: HilbertSpec) -> ComplexOperator:
    """Joint excitation parity ``(-1)^(q^dag q + a^dag a)``.

    Its value is +1 on the joint ground state ``|g, 0>``.  For two qubit
    levels the negative of this operator, ``sigma_z (-1)^(a^dag a)``,
    commutes with :func:`rabi_hamiltonian`.
    """
    qpar = np.diag([(-1.0) ** j for j in range(spec.n_qubit_levels)]).astype(complex)
    return join(spec, qubit=qpar, resonator=fock_parity(spec.n_fock))


class RotatingFrameModel:
    """Sideband expansion of the modulated, driven system in the frame
    rotating at the resonator and instantaneous qubit frequencies.

    Keeps modulation sidebands ``|m| <= m_max``.  For three qubit levels the
    ``e-f`` ladder (coupling enhanced by sqrt(2), detuned by the
    anharmonicity) is retained, which is what limits the fidelity of the
    two-level effective description.
    """

    def __init__(self, spec: HilbertSpec, dev: DeviceParams, m_max: int = 8):
        self.spec = spec
        self.dev = dev
        self.m_max = m_max
        nf, nq = spec.n_fock, spec.n_qubit_levels
        a = annihilation(nf)
        self.num = join(spec, resonator=number_op(nf))
        # modulation tone 2 shifts level j by j*eps2*cos(nu2 t); the constant
        # -1/2 offset reproduces the sigma_z/2 form for two levels
        zdiag = np.diag([j - 0.5 for j in range(nq)]).astype(complex)
        self.zhalf = join(spec, qubit=zdiag)
        mu = dev.eps1 / dev.nu1
        sge = np.zeros((nq, nq), dtype=complex)
        sge[0, 1] = 1.0
        ladders = [(sge, 0.0)]
        if nq >= 3:
            sef = np.zeros((nq, nq), dtype=complex)
            sef[1, 2] = math.sqrt(2.0)
            ladders.append((sef, dev.gamma_anh))
        mats = []
        freqs = []
        for m in range(-m_max, m_max + 1):
            jm = bessel_j(m, mu)
            for sig, anh in ladders:
                # lam J_m e^{-i[(m-2)nu1 - anh] t} a^dag sigma  (+ h.c. at eval)
                mats.append(jm * dev.lam * join(spec, qubit=sig, resonator=a.conj().T))
                freqs.append((m - 2) * dev.nu1 - anh)
                # K J_m e^{-i[m nu1 - anh] t} sigma  (+ h.c. at eval)
                mats.append(jm * dev.K * join(spec, qubit=sig))
                freqs.append(m * dev.nu1 - anh)
        self.terms = np.array(mats)
        self.freqs = np.array(freqs)

    def hamiltonian(self, t: float, delta: float, eps2: float) -> ComplexOperator:
        """Instantaneous Hamiltonian for given detuning and tone-2 amplitude."""
        phases = np.exp(-1j * self.freqs * t)
        m = np.tensordot(phases, self.terms, axes=1)
        h = m + m.conj().T
        h += delta * self.num
        h += eps2 * math.cos(self.dev.nu2 * t) * self.zhalf
        return h


@functools.lru_cache(maxsize=8)
def _cached_frame(spec: HilbertSpec, dev: DeviceParams, m_max: int) -> RotatingFrameModel:
    return RotatingFrameModel(spec, dev, m_max)


def rotating_frame_hamiltonian(spec: HilbertSpec, dev: DeviceParams, delta: float,
                               t: float, *, eps2: float | None = None,
                               m_max: int = 8) -> ComplexOperator:
    """Full rotating-frame Hamiltonian at time ``t`` (see RotatingFrameModel)."""
    e2 = dev.eps2 if eps2 is None else eps2
    return _cached_frame(spec, dev, m_max).hamiltonian(t, delta, e2)


def drive_frame_rotation(spec: HilbertSpec, b0: float, t: float) -> ComplexOperator:
    """Unitary ``exp(i b0 sigma_x t / 2)`` on the ``g-e`` doublet.

    The effective two-level description lives in the frame co-rotating with
    the drive-induced qubit splitting ``b0``.  Apply this to a rotating-frame
    state before comparing it against an effective-model state at the same
    time; states at ``t = 0`` coincide in both frames.
    """
    sx = join(spec, qubit=qubit_op("x", spec.n_qubit_levels))
    return matrix_exp(0.5j * b0 * t * sx)


# ---------------------------------------------------------------------------
# low-energy analytics of the two phases


@dataclass(frozen=True)
class SWAnalytics:
    """Closed-form ground-state data from a Schrieffer-Wolff treatment.

    ``phase`` is ``"normal"`` or ``"superradiant"``; ``r`` the squeezing
    parameter, ``alpha`` the field displacement (0 in the normal phase),
    ``theta`` the qubit rotation angle (0 in the normal phase) and ``gap``
    the excitation gap.
    """

    phase: str
    xi: float
    r: float
    alpha: float
    theta: float
    gap: float


def np_sp_analytics(p: EffectiveParams) -> SWAnalytics:
    """Ground-state analytics on either side of the critical point ``xi = 1``."""
    xi = p.xi
    if not math.isfinite(xi):
        raise ValueError("normalized coupling undefined (Omega*delta <= 0)")
    if abs(xi - 1.0) < 1e-9:
        raise CriticalPointError("analytics diverge at xi = 1")
    if xi < 1.0:
        r = -0.25 * math.log1p(-xi ** 2)
        return SWAnalytics(phase="normal", xi=xi, r=r, alpha=0.0, theta=0.0,
                           gap=p.delta * math.sqrt(1.0 - xi ** 2))
    r = -0.25 * math.log1p(-xi ** -4)
    alpha = math.sqrt(p.Omega / (4.0 * xi ** 2 * p.delta) * (xi ** 4 - 1.0))
    theta = math.atan(math.sqrt((xi ** 2 - 1.0) / (xi ** 2 + 1.0)))
    return SWAnalytics(phase="superradiant", xi=xi, r=r, alpha=alpha, theta=theta,
                       gap=p.delta * math.sqrt(1.0 - xi ** -4))


def np_ground_state(spec: HilbertSpec, p: EffectiveParams) -> QuantumState:
    """Normal-phase ground state: squeezed vacuum with the qubit in ``|g>``.

    The low-energy analytics report ``r`` as the growth exponent of the
    ``a + a^dag`` quadrature, opposite in sign to the convention of
    :func:`rabi_spt.hilbert.squeezing`; hence the negated argument.
    """
    an = np_sp_analytics(p)
    if an.phase != "normal":
        raise ValueError("parameters are in the superradiant phase")
    field = squeezing(spec.n_fock, -an.r) @ fock_state(spec.n_fock, 0)
    psi = np.kron(qubit_state(spec.n_qubit_levels, "g"), field)
    return QuantumState.from_vector(psi, spec)


def _sp_branch_vector(spec: HilbertSpec, an: SWAnalytics, sign: int) -> np.ndarray:
    # r is the quadrature-growth exponent; see np_ground_state on the sign
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    field = displacement(spec.n_fock, sign * an.alpha) @ (
        squeezing(spec.n_fock, -an.r) @ fock_state(spec.n_fock, 0))
    qubit = np.zeros(spec.n_qubit_levels, dtype=complex)
    # |down_pm> = mp sin(theta) |e> + cos(theta) |g>
    qubit[0] = math.cos(an.theta)
    qubit[1] = -sign * math.sin(an.theta)
    return np.kron(qubit, field)


def sp_ground_state(spec: HilbertSpec, p: EffectiveParams, sign: int = +1) -> QuantumState:
    """One symmetry-broken superradiant branch (displacement ``sign * alpha``)."""
    an = np_sp_analytics(p)
    if an.phase != "superradiant":
        raise ValueError("parameters are in the normal phase")
    return QuantumState.from_vector(_sp_branch_vector(spec, an, sign), spec)


def sp_cat_state(spec: HilbertSpec, p: EffectiveParams) -> QuantumState:
    """Even-excitation-parity superposition of the two superradiant branches.

    This is the state an ideal symmetry-preserving quench from ``|g, 0>``
    (excitation parity +1) prepares.
    """
    an = np_sp_analytics(p)
    if an.phase != "superradiant":
        raise ValueError("parameters are in the normal phase")
    psi = _sp_branch_vector(spec, an, +1) + _sp_branch_vector(spec, an, -1)
    return QuantumState.from_vector(psi, spec)


# ---------------------------------------------------------------------------
# residual Stark and Kerr corrections


@dataclass(frozen=True)
class StarkCorrections:
    """Drive-induced residual shifts (rad/us): qubit Stark shifts from the
    retained sidebands (``s1`` two-level, ``s2`` the three-level correction)
    and the resulting resonator self-Kerr estimate."""

    s1: float
    s2: float
    kerr: float


def stark_corrections(dev: DeviceParams) -> StarkCorrections:
    """AC-Stark and Kerr corrections from the off-resonant sidebands."""
    mu = dev.eps1 / dev.nu1
    j0 = bessel_j(0, mu) * dev.lam
    j1 = bessel_j(1, mu) * dev.lam
    jm1 = bessel_j(-1, mu) * dev.lam
    s1 = j0 ** 2 / (2.0 * dev.nu1) + j1 ** 2 / dev.nu1 + jm1 ** 2 / (3.0 * dev.nu1)
    s2 = (2.0 * j0 ** 2 / (2.0 * dev.nu1 + dev.gamma_anh)
          + 2.0 * j1 ** 2 / (dev.nu1 + dev.gamma_anh)
          + 2.0 * jm1 ** 2 / (3.0 * dev.nu1 + dev.gamma_anh))
    kerr = (s1 - 0.5 * s2) ** 2 / (2.0 * dev.K)
    return StarkCorrections(s1=s1, s2=s2, kerr=kerr)


# ---------------------------------------------------------------------------
# ancilla frequency schedule realizing a detuning ramp


def ancilla_stark_schedule(dev: DeviceParams, delta_fn, *, guard: float = 5.0):
    """Ancilla frequency schedule ``f(t)`` that realizes the detuning ramp
    ``delta_fn`` through the ancilla's dispersive pull on the resonator.

    The map inverts ``delta(t) - delta(0) = lam'^2 [1/(f_idle - omega_p)
    - 1/(f(t) - omega_p)]``.  Each evaluation checks the dispersive
    condition ``|f(t) - omega_p| >= guard * lam'`` and raises
    :class:`DispersiveViolation` otherwise.
    """
    delta0 = delta_fn(0.0)
    idle_pull = 1.0 / (dev.f_idle - dev.omega_p)

    def f(t: float) -> float:
        bracket = (delta_fn(t) - delta0) / dev.lambda_prime ** 2 - idle_pull
        if bracket == 0.0:
            raise DispersiveViolation("ancilla frequency diverges")
        freq = dev.omega_p - 1.0 / bracket
        if abs(freq - dev.omega_p) < guard * dev.lambda_prime:
            raise DispersiveViolation(
                f"|f - omega_p| = {abs(freq - dev.omega_p):.3g} rad/us at t={t:.4f} us "
                f"violates the {guard:g} lam' dispersive margin")
        return freq

    return f


def detuning_from_ancilla(dev: DeviceParams, freq: float, delta0: float) -> float:
    """Forward dispersive map: detuning realized by ancilla frequency ``freq``."""
    return delta0 + dev.lambda_prime ** 2 * (
        1.0 / (dev.f_idle - dev.omega_p) - 1.0 / (freq - dev.omega_p))
