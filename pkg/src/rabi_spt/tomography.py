"""Wigner-matrix tomography and its measured-signal emulation.

The qubit-conditioned Wigner matrix at a phase-space point ``beta`` is

    W_{k,k'}(beta) = (2/pi) sum_n (-1)^n <n| D(-beta) rho_{k,k'} D(beta) |n>

with ``rho_{k,k'} = <k| rho |k'>`` a resonator-space block of the joint
state.  Diagonal elements are measured directly; off-diagonal elements come
from measuring the diagonal in rotated qubit bases

    |+x> = (|e> + |g>)/sqrt(2),   |-x> = (|e> - |g>)/sqrt(2),
    |+y> = (|e> + i|g>)/sqrt(2),  |-y> = (|e> - i|g>)/sqrt(2),

through Re W_{e,g} = (W_{+x,+x} - W_{-x,-x})/2 and
Im W_{e,g} = (W_{-y,-y} - W_{+y,+y})/2, where the rotated maps are the
unnormalized ones (conditioning population times normalized Wigner map).

The measured chain mirrors the experiment: displace the field, couple a
resonant ancilla, record photon-number-dependent Rabi oscillations, and fit
the photon distribution from the multi-tone signal.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
import scipy.optimize

from .hilbert import (
    ComplexOperator,
    HilbertSpec,
    QuantumState,
    TRUNCATION_TAIL,
    TruncationError,
    UnsupportedError,
    annihilation,
    displacement,
    displacement_leakage,
    fock_parity,
    partial_trace_qubit,
    qubit_block,
)
from .model import DeviceParams

EXACT_FORWARD = "exact-forward"
FIT_FROM_SIGNAL = "fit-from-signal"

# Grid points whose displaced field exceeds this mean photon number are
# excluded from the measured chain (the multi-tone fit degrades there).
MASK_NBAR = 10.0


class GridMismatch(Exception):
    """Rotated-basis maps do not share a grid."""


class DistributionError(Exception):
    """A photon distribution is not normalized."""


class FitDivergence(Exception):
    """The photon-number fit failed to explain the signal."""


class IllConditioned(Exception):
    """The fit design matrix is numerically degenerate."""


class NotConverged(Exception):
    """Reconstruction stopped before reaching residual stationarity."""


# ---------------------------------------------------------------------------
# Records


@dataclass
class WignerRecord:
    """Wigner-matrix values on a grid of phase-space points.

    ``w_ee``/``w_gg`` are the unnormalized diagonal maps, ``re_w_eg`` and
    ``im_w_eg`` the off-diagonal parts.  ``masked`` flags points the
    measured chain skipped (large displaced photon number or a per-point
    failure); their values are NaN.  ``populations`` holds the conditioning
    probability per basis setting and outcome, keyed like ``"x:+"``.
    """

    beta: np.ndarray
    w_ee: np.ndarray
    w_gg: np.ndarray
    re_w_eg: np.ndarray
    im_w_eg: np.ndarray
    masked: np.ndarray
    provenance: str
    populations: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provenance not in (EXACT_FORWARD, FIT_FROM_SIGNAL):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        n = len(self.beta)
        for name in ("w_ee", "w_gg", "re_w_eg", "im_w_eg", "masked"):
            if len(getattr(self, name)) != n:
                raise GridMismatch(f"{name} length does not match the grid")

    @property
    def n_points(self) -> int:
        return len(self.beta)


@dataclass
class RabiSignal:
    """Time-resolved ancilla excitation probability.

    ``setting`` identifies where in the tomography protocol the signal was
    taken: (beta, basis setting, conditioned outcome), or a free-form id.
    """

    taus: np.ndarray
    p_e: np.ndarray
    shots: int | None = None
    setting: tuple | str = ""

    def __post_init__(self) -> None:
        self.taus = np.asarray(self.taus, dtype=float)
        self.p_e = np.asarray(self.p_e, dtype=float)
        if self.taus.shape != self.p_e.shape:
            raise ValueError("taus and p_e must have the same shape")
        if np.any(self.p_e < -1e-12) or np.any(self.p_e > 1 + 1e-12):
            raise ValueError("p_e outside [0, 1]")


@dataclass
class PhotonFit:
    """Result of the multi-tone Rabi-signal fit."""

    p_n: np.ndarray
    p_g0: float
    residual_rms: float
    condition: float


@dataclass
class ReconstructionResult:
    rho_hat: QuantumState
    residual: float
    iterations: int
    converged: bool


class RotatedCombination(NamedTuple):
    re_w_eg: np.ndarray
    im_w_eg: np.ndarray
    discrepancy: float


# ---------------------------------------------------------------------------
# Exact forward map


@lru_cache(maxsize=4096)
def _displaced_parity(n_fock: int, beta: complex) -> ComplexOperator:
    # (2/pi) D(beta) (-1)^n D(-beta); Hermitian, eigenvalues +-2/pi.
    d = displacement(n_fock, beta)
    m = (2.0 / math.pi) * (d @ fock_parity(n_fock) @ d.conj().T)
    m.setflags(write=False)
    return m


def displaced_parity(n_fock: int | HilbertSpec, beta: complex) -> ComplexOperator:
    """Observable whose expectation is the Wigner value at ``beta``."""
    n_fock = n_fock.n_fock if isinstance(n_fock, HilbertSpec) else int(n_fock)
    return _displaced_parity(n_fock, complex(beta))


def _dedupe(beta_grid) -> np.ndarray:
    grid = [complex(b) for b in np.asarray(beta_grid, dtype=complex).ravel()]
    return np.asarray(list(dict.fromkeys(grid)), dtype=complex)


def wigner_matrix_forward(state: QuantumState, beta_grid,
                          mask_on_guard: bool = False) -> WignerRecord:
    """Exact Wigner matrix of a joint state on a grid of points.

    Each point is checked against the truncation guard: a displacement by
    ``beta`` must keep more than ``1 - TRUNCATION_TAIL`` of a displaced
    vacuum inside the cutoff, otherwise the point raises
    :class:`TruncationError` (default) or is masked out (``mask_on_guard``).
    The map itself is exact for states of the truncated space (linearity
    and round-trip identities hold to rounding); how closely the truncated
    state represents an untruncated one is the caller's n_fock choice, and
    the worst displaced-state occupancy of the top three levels is reported
    in ``diagnostics["displaced_tail_max"]`` to make that visible.
    """
    spec = state.spec
    grid = _dedupe(beta_grid)
    n = len(grid)
    w_ee = np.full(n, np.nan)
    w_gg = np.full(n, np.nan)
    re_eg = np.full(n, np.nan)
    im_eg = np.full(n, np.nan)
    masked = np.zeros(n, dtype=bool)

    rho_ee = qubit_block(state, "e", "e")
    rho_gg = qubit_block(state, "g", "g")
    rho_eg = qubit_block(state, "e", "g")
    sigma = partial_trace_qubit(state.rho, spec)
    tail_max = 0.0

    for i, beta in enumerate(grid):
        leak = displacement_leakage(spec.n_fock, beta)
        if leak > TRUNCATION_TAIL:
            if not mask_on_guard:
                raise TruncationError(
                    f"displacement at beta={beta:.3g} leaks {leak:.2e} "
                    f"past n_fock={spec.n_fock}")
            masked[i] = True
            continue
        d = displacement(spec.n_fock, -beta)
        moved_diag = np.einsum("ij,jk,ik->i", d, sigma, d.conj(), optimize=True).real
        tail_max = max(tail_max, float(moved_diag[spec.n_fock - 3:].sum()))
        m = displaced_parity(spec.n_fock, beta)
        w_ee[i] = np.trace(rho_ee @ m).real
        w_gg[i] = np.trace(rho_gg @ m).real
        val = np.trace(rho_eg @ m)
        re_eg[i] = val.real
        im_eg[i] = val.imag

    pops = {"z:e": float(np.trace(rho_ee).real), "z:g": float(np.trace(rho_gg).real)}
    return WignerRecord(grid, w_ee, w_gg, re_eg, im_eg, masked, EXACT_FORWARD,
                        populations=pops,
                        diagnostics={"displaced_tail_max": tail_max})


# ---------------------------------------------------------------------------
# Rotated-basis protocol


class BasisSetting(NamedTuple):
    name: str
    outcomes: tuple
    vectors: np.ndarray  # columns are the basis kets in (g, e) amplitudes


def rotated_basis_settings() -> tuple:
    """The three measurement settings of the off-diagonal protocol.

    Measuring the qubit after the mapping rotation is equivalent to
    projecting onto the listed kets; amplitudes are given in the (g, e)
    ordering of the computational basis.
    """
    s2 = 1.0 / math.sqrt(2.0)
    z = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)          # |g>, |e>
    x = np.array([[s2, s2], [s2, -s2]], dtype=complex)             # |+x>, |-x>
    y = np.array([[1j * s2, -1j * s2], [s2, s2]], dtype=complex)   # |+y>, |-y>
    return (
        BasisSetting("z", ("e", "g"), z[:, ::-1].copy()),
        BasisSetting("x", ("+", "-"), x),
        BasisSetting("y", ("+", "-"), y),
    )


def combine_rotated(w_px, w_mx, w_py, w_my) -> RotatedCombination:
    """Off-diagonal Wigner parts from the four rotated diagonal maps.

    Also cross-checks that both rotated bases agree on the basis-independent
    combination (W_ee + W_gg)/2 and reports the worst absolute discrepancy.
    """
    maps = [np.asarray(w, dtype=float) for w in (w_px, w_mx, w_py, w_my)]
    if len({m.shape for m in maps}) != 1:
        raise GridMismatch("rotated maps do not share a grid")
    w_px, w_mx, w_py, w_my = maps
    re = 0.5 * (w_px - w_mx)
    im = 0.5 * (w_my - w_py)
    both = np.isfinite(w_px + w_mx + w_py + w_my)
    disc = 0.0
    if np.any(both):
        disc = float(np.max(np.abs(0.5 * (w_px + w_mx) - 0.5 * (w_py + w_my))[both]))
    return RotatedCombination(re, im, disc)


# ---------------------------------------------------------------------------
# Measured chain: Rabi signal synthesis and photon-number fit


def _readout_pair(dev: DeviceParams, readout_error, ancilla: bool):
    if readout_error is None or readout_error is False:
        return None
    if readout_error is True:
        return (dev.Fg_anc, dev.Fe_anc) if ancilla else (dev.Fg, dev.Fe)
    fg, fe = readout_error
    return float(fg), float(fe)


def _rabi_tones(n: int, dev: DeviceParams, taus: np.ndarray) -> np.ndarray:
    # B[t, n] = exp(-kappa_n tau) cos(2 sqrt(n) lambda' tau); kappa_0 = 0.
    ns = np.arange(n, dtype=float)
    kappa = ns ** 0.7 / dev.T1_p
    return np.exp(-np.outer(taus, kappa)) * np.cos(2.0 * np.outer(taus, np.sqrt(ns)) * dev.lambda_prime)


def simulate_rabi_signal(p_n, dev: DeviceParams, taus, shots: int | None = None, *,
                         p_g0: float = 1.0, readout_error=False,
                         rng: np.random.Generator | None = None,
                         setting: tuple | str = "") -> RabiSignal:
    """Ancilla Rabi signal of a photon distribution.

    ``p_e(tau) = (1/2)[1 - p_g0 sum_n P_n exp(-kappa_n tau) cos(2 sqrt(n)
    lambda' tau)]`` with the empirical decay ``kappa_n = n^0.7 / T1_p``.
    Readout error maps ``p -> p Fe + (1 - p)(1 - Fg)`` (ancilla fidelities
    by default); shot noise draws ``binomial(shots, p)/shots``.
    """
    p_n = np.asarray(p_n, dtype=float)
    taus = np.asarray(taus, dtype=float)
    if abs(p_n.sum() - 1.0) > 1e-8 or np.any(p_n < -1e-10):
        raise DistributionError(f"photon distribution sums to {p_n.sum():.10f}")
    if np.any(taus < 0):
        raise ValueError("interaction times must be nonnegative")
    tones = _rabi_tones(len(p_n), dev, taus)
    p_e = 0.5 * (1.0 - p_g0 * (tones @ p_n))
    ro = _readout_pair(dev, readout_error, ancilla=True)
    if ro is not None:
        fg, fe = ro
        p_e = p_e * fe + (1.0 - p_e) * (1.0 - fg)
    if shots is not None:
        if rng is None:
            rng = np.random.default_rng()
        p_e = rng.binomial(int(shots), np.clip(p_e, 0.0, 1.0)) / float(shots)
    return RabiSignal(taus, np.clip(p_e, 0.0, 1.0), shots, setting)


def fit_photon_distribution(sig: RabiSignal, n_max: int, dev: DeviceParams, *,
                            readout=None) -> PhotonFit:
    """Recover ``(P_n, p_g0)`` from a Rabi signal.

    Writing ``y = 1 - 2 p_e`` and ``q_n = p_g0 P_n``, the model is linear:
    ``y(tau) = sum_n q_n B_n(tau)`` with fixed tones ``B_n``, so the
    constrained least-squares problem (``q_n >= 0``, ``sum q <= 1``) is
    solved globally by nonnegative least squares; when the unconstrained
    optimum violates ``sum q <= 1`` the solution lies on the boundary and a
    penalty row pins it there.  ``readout = (Fg, Fe)`` first inverts the
    readout-error map.

    Raises
    ------
    IllConditioned
        If the tone matrix is numerically degenerate.
    FitDivergence
        If the fit explains almost none of the signal.
    """
    taus = sig.taus
    if len(taus) < 2 * (n_max + 2):
        raise ValueError(f"need at least {2 * (n_max + 2)} samples for n_max={n_max}")
    y = 1.0 - 2.0 * sig.p_e
    if readout is not None:
        fg, fe = readout
        y = (y - (fg - fe)) / (fe + fg - 1.0)
    b = _rabi_tones(n_max + 1, dev, taus)
    cond = float(np.linalg.cond(b))
    if not np.isfinite(cond) or cond > 1e10:
        raise IllConditioned(f"tone matrix condition number {cond:.2e}")
    q, _ = scipy.optimize.nnls(b, y)
    if q.sum() > 1.0:
        w = 1e4
        b_aug = np.vstack([b, w * np.ones((1, n_max + 1))])
        y_aug = np.concatenate([y, [w]])
        q, _ = scipy.optimize.nnls(b_aug, y_aug)
        if q.sum() > 0:
            q /= q.sum()
    p_g0 = float(q.sum())
    resid = float(np.sqrt(np.mean((b @ q - y) ** 2)))
    signal_rms = float(np.sqrt(np.mean(y**2)))
    if p_g0 <= 1e-6 or (signal_rms > 0.1 and resid > 0.9 * signal_rms):
        raise FitDivergence(
            f"fit explains too little signal (residual {resid:.3f} of {signal_rms:.3f})")
    return PhotonFit(q / p_g0, p_g0, resid, cond)


# ---------------------------------------------------------------------------
# Full measured chain


def _conditional_block(rho_blocks: np.ndarray, u: np.ndarray) -> np.ndarray:
    # <u| rho |u> over the qubit factor; rho_blocks indexed (q, i, q', j).
    return np.einsum("q,qipj,p->ij", u.conj(), rho_blocks, u, optimize=True)


def _default_taus() -> np.ndarray:
    return np.arange(1, 502, dtype=float) * 2e-3


def simulate_tomography(state: QuantumState, dev: DeviceParams, beta_grid, *,
                        taus=None, n_max: int = 20, shots: int | None = None,
                        readout_error=False, correct_readout: bool | None = None,
                        mask_nbar: float = MASK_NBAR,
                        rng: np.random.Generator | None = None,
                        threads: int | None = None) -> WignerRecord:
    """Emulate the full measured tomography chain on a joint state.

    Per grid point and basis setting: rotate and project the qubit, displace
    the conditional field state by ``-beta``, synthesize the ancilla Rabi
    signal from its exact photon distribution, fit the distribution back,
    and assemble ``W = (2/pi) sum (-1)^n P_n``.  Unnormalized maps are the
    conditioning population times the normalized map, and the off-diagonal
    element comes from :func:`combine_rotated`.

    Points whose displaced mean photon number exceeds ``mask_nbar`` are
    masked, as are points where a per-point fit fails (recorded under
    ``diagnostics["failures"]``, never fatal).  ``correct_readout`` undoes
    the readout-error map inside the fit and on the conditioning
    populations; it defaults to whether ``readout_error`` is applied.
    """
    spec = state.spec
    if spec.n_qubit_levels != 2:
        raise UnsupportedError("measured tomography conditions on a two-level qubit")
    if correct_readout is None:
        correct_readout = bool(readout_error)
    grid = _dedupe(beta_grid)
    if taus is None:
        taus = _default_taus()
    taus = np.asarray(taus, dtype=float)
    n_max = min(n_max, spec.n_fock - 1)

    blocks = state.rho.reshape(2, spec.n_fock, 2, spec.n_fock)
    sigma = partial_trace_qubit(state.rho, spec)
    nbar0 = float(np.trace(sigma @ np.diag(np.arange(spec.n_fock))).real)
    a_exp = complex(np.trace(annihilation(spec.n_fock) @ sigma))

    settings = rotated_basis_settings()
    anc_ro = _readout_pair(dev, readout_error, ancilla=True)
    test_ro = _readout_pair(dev, readout_error, ancilla=False)

    # Conditioning populations are beta-independent (the qubit is measured
    # before the displacement); map them through the test-qubit readout
    # error and optionally back.
    pops: dict[str, float] = {}
    true_pops: dict[str, float] = {}
    cond_states: dict[str, np.ndarray] = {}
    for st in settings:
        for col, out in enumerate(st.outcomes):
            block = _conditional_block(blocks, st.vectors[:, col])
            p = float(np.trace(block).real)
            key = f"{st.name}:{out}"
            true_pops[key] = p
            cond_states[key] = block / p if p > 1e-12 else block
            if test_ro is not None:
                fg, fe = test_ro
                p_meas = p * fe + (1.0 - p) * (1.0 - fg)
                p = (p_meas - (1.0 - fg)) / (fe + fg - 1.0) if correct_readout else p_meas
            pops[key] = p

    child_rngs = None
    if shots is not None:
        if rng is None:
            rng = np.random.default_rng()
        child_rngs = rng.spawn(len(grid))

    fit_readout = anc_ro if (anc_ro is not None and correct_readout) else None
    maps = {key: np.full(len(grid), np.nan) for key in cond_states}
    masked = np.zeros(len(grid), dtype=bool)
    failures: list[tuple[int, str]] = []

    def run_point(i: int) -> None:
        beta = grid[i]
        nbar_d = nbar0 + abs(beta) ** 2 - 2.0 * (np.conj(beta) * a_exp).real
        if nbar_d > mask_nbar:
            masked[i] = True
            return
        try:
            d = displacement(spec.n_fock, -beta)
        except TruncationError as exc:
            masked[i] = True
            failures.append((i, f"{type(exc).__name__}: {exc}"))
            return
        point_rng = child_rngs[i] if child_rngs is not None else None
        for key, sigma_j in cond_states.items():
            if true_pops[key] <= 1e-12:
                # empty subensemble: nothing to measure, zero weight anyway
                maps[key][i] = 0.0
                continue
            moved = d @ sigma_j @ d.conj().T
            p_full = np.clip(np.diag(moved).real, 0.0, None)
            p_full /= p_full.sum()
            try:
                sig = simulate_rabi_signal(
                    p_full, dev, taus, shots, readout_error=readout_error,
                    rng=point_rng, setting=(beta, *key.split(":")))
                fit = fit_photon_distribution(sig, n_max, dev, readout=fit_readout)
            except (FitDivergence, IllConditioned) as exc:
                masked[i] = True
                failures.append((i, f"{key} {type(exc).__name__}: {exc}"))
                return
            signs = 1.0 - 2.0 * (np.arange(n_max + 1) % 2)
            maps[key][i] = pops[key] * (2.0 / math.pi) * float(signs @ fit.p_n)

    n_workers = threads if threads else int(os.environ.get("RABI_SPT_THREADS", "1") or 1)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run_point, range(len(grid))))
    else:
        for i in range(len(grid)):
            run_point(i)

    for arr in maps.values():
        arr[masked] = np.nan
    combo = combine_rotated(maps["x:+"], maps["x:-"], maps["y:+"], maps["y:-"])
    diagnostics = {"failures": failures, "basis_discrepancy": combo.discrepancy,
                   "n_masked": int(masked.sum()), "n_max": n_max,
                   "shots": shots, "readout_error": bool(readout_error),
                   "correct_readout": bool(correct_readout)}
    return WignerRecord(grid, maps["z:e"], maps["z:g"], combo.re_w_eg, combo.im_w_eg,
                        masked, FIT_FROM_SIGNAL, populations=pops,
                        diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# Density-matrix reconstruction


def _simplex_project(eigs: np.ndarray) -> np.ndarray:
    # Euclidean projection of a real vector onto {x >= 0, sum x = 1}.
    srt = np.sort(eigs)[::-1]
    css = np.cumsum(srt) - 1.0
    idx = np.arange(1, len(eigs) + 1)
    cand = srt - css / idx
    k = np.max(np.where(cand > 0)[0]) + 1
    theta = css[k - 1] / k
    return np.clip(eigs - theta, 0.0, None)


def _psd_trace_project(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    eigs, vecs = np.linalg.eigh(rho)
    return (vecs * _simplex_project(eigs)) @ vecs.conj().T


def reconstruction_operators(record: WignerRecord, spec: HilbertSpec):
    """Hermitian observables and target values for the unmasked samples."""
    if spec.n_qubit_levels != 2:
        raise UnsupportedError("reconstruction assumes a two-level qubit factor")
    nf = spec.n_fock
    e_ee = np.zeros((2, 2), dtype=complex); e_ee[1, 1] = 1.0
    e_gg = np.zeros((2, 2), dtype=complex); e_gg[0, 0] = 1.0
    e_ge = np.zeros((2, 2), dtype=complex); e_ge[0, 1] = 1.0  # |g><e|
    ops, vals = [], []
    for i, beta in enumerate(record.beta):
        if record.masked[i]:
            continue
        m = displaced_parity(nf, beta)
        cross = np.kron(e_ge, m)
        for op, val in (
            (np.kron(e_ee, m), record.w_ee[i]),
            (np.kron(e_gg, m), record.w_gg[i]),
            (0.5 * (cross + cross.conj().T), record.re_w_eg[i]),
            ((cross - cross.conj().T) / 2j, record.im_w_eg[i]),
        ):
            if np.isfinite(val):
                ops.append(op)
                vals.append(val)
    return ops, np.asarray(vals, dtype=float)


def _hermitian_design(ops: list, dim: int) -> np.ndarray:
    """Real design matrix over the Hermitian parametrization.

    Coordinates: diagonal entries, then Re and Im of the upper triangle;
    for Hermitian rho and O, tr(rho O) = sum_i rho_ii O_ii +
    sum_{i<j} 2[Re rho_ij Re O_ji - Im rho_ij Im O_ji].
    """
    iu, ju = np.triu_indices(dim, k=1)
    rows = np.empty((len(ops), dim * dim))
    for s, op in enumerate(ops):
        rows[s, :dim] = np.diag(op).real
        rows[s, dim:dim + len(iu)] = 2.0 * op[ju, iu].real
        rows[s, dim + len(iu):] = -2.0 * op[ju, iu].imag
    return rows


def _pack_hermitian(rho: np.ndarray, iu, ju) -> np.ndarray:
    return np.concatenate([np.diag(rho).real, rho[iu, ju].real, rho[iu, ju].imag])


def _unpack_hermitian(x: np.ndarray, dim: int, iu, ju) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[np.arange(dim), np.arange(dim)] = x[:dim]
    off = x[dim:dim + len(iu)] + 1j * x[dim + len(iu):]
    rho[iu, ju] = off
    rho[ju, iu] = off.conj()
    return rho


def reconstruct_density(record: WignerRecord, spec: HilbertSpec, *,
                        max_iter: int = 500, tol: float = 1e-8) -> ReconstructionResult:
    """Density matrix consistent with sampled Wigner values.

    Alternates an unconstrained least-squares update ``x <- x - pinv(A)(Ax
    - w)`` over the Hermitian parametrization with projection onto the PSD
    trace-one set (eigenvalue clipping via simplex projection), stopping at
    residual stationarity ``tol`` or ``max_iter``; the final iterate always
    satisfies the hard constraints.  Underdetermined sample sets are
    allowed (the update is minimum-norm).
    """
    ops, vals = reconstruction_operators(record, spec)
    if not len(ops):
        raise ValueError("record holds no usable samples")
    dim = spec.dim
    iu, ju = np.triu_indices(dim, k=1)
    a = _hermitian_design(ops, dim)
    a_pinv = np.linalg.pinv(a)

    rho = _psd_trace_project(_unpack_hermitian(a_pinv @ vals, dim, iu, ju))
    prev = np.inf
    resid = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        x = _pack_hermitian(rho, iu, ju)
        misfit = a @ x - vals
        resid = float(np.sqrt(np.mean(misfit**2)))
        if abs(prev - resid) < tol:
            converged = True
            break
        prev = resid
        rho = _psd_trace_project(_unpack_hermitian(x - a_pinv @ misfit, dim, iu, ju))
    state = QuantumState(rho, spec)
    return ReconstructionResult(state, resid, iterations, converged)


# ---------------------------------------------------------------------------
# CSV schemas


def wigner_to_csv(record: WignerRecord, path) -> None:
    """Columns re_beta, im_beta, w_ee, w_gg, re_w_eg, im_w_eg, masked, provenance."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re_beta", "im_beta", "w_ee", "w_gg", "re_w_eg", "im_w_eg",
                     "masked", "provenance"])
        for i, beta in enumerate(record.beta):
            wr.writerow([f"{beta.real:.10e}", f"{beta.imag:.10e}",
                         f"{record.w_ee[i]:.10e}", f"{record.w_gg[i]:.10e}",
                         f"{record.re_w_eg[i]:.10e}", f"{record.im_w_eg[i]:.10e}",
                         int(record.masked[i]), record.provenance])


def wigner_from_csv(path) -> WignerRecord:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    beta = np.array([float(r["re_beta"]) + 1j * float(r["im_beta"]) for r in rows])
    cols = {name: np.array([float(r[name]) for r in rows])
            for name in ("w_ee", "w_gg", "re_w_eg", "im_w_eg")}
    masked = np.array([bool(int(r["masked"])) for r in rows])
    provenance = rows[0]["provenance"] if rows else EXACT_FORWARD
    return WignerRecord(beta, cols["w_ee"], cols["w_gg"], cols["re_w_eg"],
                        cols["im_w_eg"], masked, provenance)


def rabi_signal_to_csv(sig: RabiSignal, path) -> None:
    """Columns tau_us, p_e, setting."""
    label = sig.setting if isinstance(sig.setting, str) else \
        ":".join(str(s) for s in sig.setting)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["tau_us", "p_e", "setting"])
        for t, p in zip(sig.taus, sig.p_e):
            wr.writerow([f"{t:.6f}", f"{p:.10e}", label])


def density_to_csv(state: QuantumState, path) -> None:
    """Dense entries as rows (row, col, re, im)."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["row", "col", "re", "im"])
        for i in range(state.rho.shape[0]):
            for j in range(state.rho.shape[1]):
                v = state.rho[i, j]
                wr.writerow([i, j, f"{v.real:.12e}", f"{v.imag:.12e}"])


def density_from_csv(path, spec: HilbertSpec) -> QuantumState:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rho = np.zeros((spec.dim, spec.dim), dtype=complex)
    for r in rows:
        rho[int(r["row"]), int(r["col"])] = float(r["re"]) + 1j * float(r["im"])
    return QuantumState(rho, spec)
