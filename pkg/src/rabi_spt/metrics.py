"""Scalar characterizations of quench output states.

Covers the entanglement negativity, purity, vacuum-to-field coherence sums,
phase-space separation of the normal and superradiant components, and the
super-cat geometry (fitted lobe amplitude, component populations, cat size
and squared lobe distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.special

from .hilbert import (
    HilbertSpec,
    QuantumState,
    annihilation,
    join,
    partial_trace_qubit,
    partial_transpose_qubit,
    qubit_block,
)


class EmptyBlock(Exception):
    """A conditional block carries (numerically) no population."""


class NotSeparable(Exception):
    """Vacuum and displaced components overlap too much to split."""


@dataclass
class CatAnalysis:
    """Three-component super-cat geometry.

    ``populations`` are the (vacuum, +lobe, -lobe) weights of the
    three-component model, renormalized from the raw projections; whatever
    raw mass the three projections missed is ``remainder`` (slightly
    negative when the components overlap and get double counted).
    ``d_squared = 4 |alpha_hat|^2`` identically.
    """

    alpha_hat: complex
    populations: tuple
    cat_size: float
    d_squared: float
    remainder: float


def purity(state: QuantumState | np.ndarray) -> float:
    """Tr(rho^2) of a joint state or bare matrix."""
    rho = state.rho if isinstance(state, QuantumState) else np.asarray(state)
    return float(np.trace(rho @ rho).real)


def negativity(state: QuantumState | np.ndarray, spec: HilbertSpec | None = None) -> float:
    """Absolute sum of the negative eigenvalues after qubit partial transpose."""
    pt = partial_transpose_qubit(state, spec)
    eigs = np.linalg.eigvalsh(pt)
    return float(-eigs[eigs < 0].sum())


def _block_trace(rho_kk: np.ndarray) -> float:
    tr = float(np.trace(rho_kk).real)
    if tr <= 1e-12:
        raise EmptyBlock(f"block trace {tr:.3e}")
    return tr


def np_sp_coherence(rho_kk: np.ndarray) -> float:
    """Coherence between the empty and filled field states of one block:
    ``sum_{n>=1} |<0| rho |n>| / Tr(rho)``."""
    rho_kk = np.asarray(rho_kk)
    tr = _block_trace(rho_kk)
    return float(np.abs(rho_kk[0, 1:]).sum() / tr)


def order_parameter(rho_kk: np.ndarray) -> complex:
    """Field coherence ``<a>`` of a resonator block (normalized)."""
    rho_kk = np.asarray(rho_kk)
    tr = _block_trace(rho_kk)
    return complex(np.trace(annihilation(len(rho_kk)) @ rho_kk) / tr)


# ---------------------------------------------------------------------------
# Phase-space separation and cat geometry


def _coherent_amplitudes(n_fock: int, beta: complex) -> np.ndarray:
    # Unguarded truncated coherent vector; peak searches only ever compare
    # Husimi values, so a clipped tail merely underestimates far points.
    n = np.arange(n_fock)
    logmag = -0.5 * abs(beta) ** 2 + n * np.log(abs(beta) + 1e-300) - 0.5 * scipy.special.gammaln(n + 1)
    phase = np.exp(1j * n * np.angle(beta)) if beta != 0 else np.ones(n_fock)
    vec = np.exp(logmag) * phase
    if beta == 0:
        vec = np.zeros(n_fock); vec[0] = 1.0
    return vec


def husimi(rho_kk: np.ndarray, beta: complex) -> float:
    """Q-function value ``<beta| rho |beta> / pi`` of a resonator block."""
    v = _coherent_amplitudes(len(rho_kk), beta)
    return float((v.conj() @ rho_kk @ v).real / math.pi)


def fit_lobe_amplitude(rho_kk: np.ndarray, *, r_min: float = 1.0) -> complex:
    """Displaced-lobe amplitude: Husimi peak outside the vacuum disk.

    Coarse grid over the annulus ``r_min <= |beta| <= sqrt(n_fock)``,
    keeping the strongest radially local maximum so that the shoulder of a
    dominant vacuum component cannot shadow a weaker displaced lobe, then a
    local simplex refinement.
    """
    rho_kk = np.asarray(rho_kk)
    radii = np.arange(r_min, math.sqrt(len(rho_kk)), 0.25)
    angles = np.linspace(0.0, 2.0 * math.pi, 48, endpoint=False)
    q_best = np.empty(len(radii))
    b_best = np.empty(len(radii), dtype=complex)
    for i, r in enumerate(radii):
        qs = [husimi(rho_kk, r * complex(math.cos(th), math.sin(th)))
              for th in angles]
        j = int(np.argmax(qs))
        q_best[i] = qs[j]
        b_best[i] = r * complex(math.cos(angles[j]), math.sin(angles[j]))
    interior = (q_best[1:-1] >= q_best[:-2]) & (q_best[1:-1] >= q_best[2:])
    if interior.any():
        idx = 1 + int(np.argmax(np.where(interior, q_best[1:-1], -np.inf)))
    else:
        idx = int(np.argmax(q_best))
    best = b_best[idx]
    res = scipy.optimize.minimize(
        lambda xy: -husimi(rho_kk, complex(xy[0], xy[1])),
        [best.real, best.imag], method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-12})
    return complex(res.x[0], res.x[1])


def separate_phases(rho_kk: np.ndarray, *, alpha_hat: complex | None = None,
                    r_cut: float | None = None):
    """Split a resonator block into vacuum-region and displaced-field parts.

    The vacuum disk of radius ``r_cut`` (default ``|alpha_hat| / 2``) maps,
    for a phase-invariant criterion, to the Fock shells ``n <= r_cut^2``;
    the block is split by the complementary shell projectors and each part
    renormalized.  Returns ``(rho_sp, rho_np, (w_np, w_sp))`` with the
    weights summing to 1; the superradiant part is ``None`` when everything
    sits in the disk.  By construction the superradiant part carries zero
    population on the disk shells (the experiment's analogous split leaves
    ~0.1%).

    Raises
    ------
    NotSeparable
        If the fitted lobes sit closer than 2 units to the origin while
        carrying significant weight, or if more than 10% of the mass lives
        in the annulus between the disk and the lobe region.
    """
    rho_kk = np.asarray(rho_kk)
    tr = _block_trace(rho_kk)
    rho = rho_kk / tr
    pn = np.clip(np.diag(rho).real, 0.0, None)

    if pn[2:].sum() < 1e-9:
        # nothing beyond the first two shells: pure vacuum region
        return None, rho, (1.0, 0.0)

    if alpha_hat is None:
        alpha_hat = fit_lobe_amplitude(rho)
    mag = abs(alpha_hat)
    if r_cut is None:
        r_cut = mag / 2.0
    n_cut = int(math.floor(r_cut**2))
    w_np = float(pn[: n_cut + 1].sum())
    w_sp = float(pn[n_cut + 1:].sum())
    if w_sp > 0.05 and mag < 2.0:
        raise NotSeparable(
            f"lobe amplitude {mag:.2f} is within 2 units of the vacuum")
    lobe_inner = int(math.floor(max(mag - 1.0, 0.0) ** 2))
    annulus = float(pn[n_cut + 1: lobe_inner + 1].sum())
    if annulus > 0.1:
        raise NotSeparable(
            f"{annulus:.1%} of the mass sits between the vacuum disk and the lobes")

    if w_sp < 1e-12:
        return None, rho / w_np, (1.0, 0.0)
    rho_np = np.zeros_like(rho)
    rho_np[: n_cut + 1, : n_cut + 1] = rho[: n_cut + 1, : n_cut + 1]
    rho_sp = np.zeros_like(rho)
    rho_sp[n_cut + 1:, n_cut + 1:] = rho[n_cut + 1:, n_cut + 1:]
    return rho_sp / w_sp, rho_np / w_np, (w_np, w_sp)


def cat_size_formula(p_vac: float, p_plus: float, p_minus: float, alpha: complex) -> float:
    """Population-weighted mean squared separation of the three components.

    ``S = [sqrt(P0 P+) |a^2| + sqrt(P0 P-) |a^2| + sqrt(P+ P-) |2 a^2|] /
    [sqrt(P0 P+) + sqrt(P0 P-) + sqrt(P+ P-)]``; at ``P0 = 0`` this reduces
    to the two-component value ``2 |alpha|^2``.
    """
    a2 = abs(alpha) ** 2
    g0p = math.sqrt(max(p_vac * p_plus, 0.0))
    g0m = math.sqrt(max(p_vac * p_minus, 0.0))
    gpm = math.sqrt(max(p_plus * p_minus, 0.0))
    denom = g0p + g0m + gpm
    if denom <= 0.0:
        return 0.0
    return (g0p * a2 + g0m * a2 + gpm * 2.0 * a2) / denom


def cat_analysis(rho_kk: np.ndarray, *, alpha: complex | None = None) -> CatAnalysis:
    """Super-cat geometry of a resonator block.

    The lobe amplitude is fitted by Husimi-peak search unless supplied;
    component populations are the vacuum and ``|+-alpha_hat>`` projections
    renormalized to the three-component model.
    """
    rho_kk = np.asarray(rho_kk)
    tr = _block_trace(rho_kk)
    rho = rho_kk / tr
    if alpha is None:
        separate_phases(rho)  # asserts separability
        alpha = fit_lobe_amplitude(rho)
    if abs(alpha) < 1e-6:
        return CatAnalysis(complex(alpha), (1.0, 0.0, 0.0), 0.0, 0.0, 0.0)
    nf = len(rho)
    p_raw = []
    for b in (0.0, alpha, -alpha):
        v = _coherent_amplitudes(nf, b)
        p_raw.append(float((v.conj() @ rho @ v).real))
    total = sum(p_raw)
    pops = tuple(p / total for p in p_raw)
    size = cat_size_formula(*pops, alpha)
    return CatAnalysis(complex(alpha), pops, size,
                       4.0 * abs(alpha) ** 2, 1.0 - total)


def sp_projected_state(state: QuantumState, *, alpha_hat: complex | None = None,
                       r_cut: float | None = None) -> QuantumState:
    """Joint state conditioned on the field lying outside the vacuum disk.

    Applies ``1 (qubit) x shell projector (field)`` with the same disk cut
    as :func:`separate_phases` and renormalizes.  One way to attach a joint
    qubit-field description to the superradiant subensemble; the choice of
    conditioning is a modeling convention, not a unique prescription.
    """
    spec = state.spec
    sigma = partial_trace_qubit(state.rho, spec)
    if alpha_hat is None:
        alpha_hat = fit_lobe_amplitude(sigma / max(np.trace(sigma).real, 1e-300))
    if r_cut is None:
        r_cut = abs(alpha_hat) / 2.0
    n_cut = int(math.floor(r_cut**2))
    shell = np.zeros(spec.n_fock)
    shell[n_cut + 1:] = 1.0
    proj = join(spec, resonator=np.diag(shell).astype(complex))
    rho = proj @ state.rho @ proj
    w = float(np.trace(rho).real)
    if w <= 1e-12:
        raise EmptyBlock(f"projected weight {w:.3e}")
    return QuantumState(rho / w, spec)


# ---------------------------------------------------------------------------
# Report assembly


def metrics_report(state: QuantumState) -> dict:
    """All scalar metrics of a joint state, JSON-ready.

    Cat geometry and coherences are evaluated per conditional block; the
    reference coherence is that of a coherent state with the fitted lobe
    amplitude.  Blocks or analyses that fail their preconditions are
    reported as None rather than aborting the report.
    """
    spec = state.spec
    out: dict = {
        "negativity": negativity(state),
        "purity": purity(state),
    }
    sigma = partial_trace_qubit(state.rho, spec)
    for label in ("ee", "gg"):
        blk = qubit_block(state, label[0], label[1])
        try:
            out[f"C_{label}"] = np_sp_coherence(blk)
        except EmptyBlock:
            out[f"C_{label}"] = None
        try:
            ana = cat_analysis(blk)
            out[f"S_{label}"] = ana.cat_size
        except (EmptyBlock, NotSeparable):
            out[f"S_{label}"] = None
    try:
        ana = cat_analysis(sigma)
        out["alpha_hat"] = [ana.alpha_hat.real, ana.alpha_hat.imag]
        out["d_squared"] = ana.d_squared
        ref = _coherent_amplitudes(spec.n_fock, abs(ana.alpha_hat))
        out["C_reference"] = np_sp_coherence(np.outer(ref, ref.conj()))
        rho_sp, _, weights = separate_phases(sigma, alpha_hat=ana.alpha_hat)
        out["weights"] = list(weights)
        out["sp_vacuum_population"] = (
            float(rho_sp[0, 0].real) if rho_sp is not None else None)
        out["negativity_sp"] = negativity(
            sp_projected_state(state, alpha_hat=ana.alpha_hat))
    except (EmptyBlock, NotSeparable):
        out["alpha_hat"] = None
        out["d_squared"] = None
        out["C_reference"] = None
        out["weights"] = None
        out["sp_vacuum_population"] = None
        out["negativity_sp"] = None
    return out
