"""Command-line pipelines over the simulation and tomography modules.

Verbs: ``quench`` (integrate a coupling ramp and save trajectory plus state
snapshots), ``wigner`` (Wigner-matrix tomography of a saved or preset state,
exact or through the emulated measurement chain), ``reconstruct`` (density
matrix from a Wigner-matrix CSV plus a metrics report), ``metrics`` (scalar
report for a state), and ``compare`` (final photon distributions of the
effective and full models, closed and decoherent).

Configuration is a strict TOML file (unknown keys or sections are rejected
before any computation, exit code 2); frequencies are given in MHz, times
in us.  Numerical failures exit 3; a reconstruction that stops without
reaching stationarity writes its best iterate and exits 4.  All randomness
flows from one seeded generator; with a fixed seed the CSV and JSON outputs
are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import zipfile
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .hilbert import (
    ConvergenceError,
    HilbertSpec,
    QuantumState,
    TruncationError,
    UnsupportedError,
    fidelity,
    fock_state,
    partial_trace_qubit,
    qubit_state,
)
from .model import (
    CriticalPointError,
    DeviceParams,
    DispersiveViolation,
    EffectiveParams,
    drive_frame_rotation,
    effective_from_device,
    np_ground_state,
    sp_cat_state,
    sp_ground_state,
)
from .quench import (
    TOMOGRAPHY_TIME,
    LindbladSpec,
    QuenchSchedule,
    StepSizeUnderflow,
    run_quench,
    trajectory_to_csv,
)
from .tomography import (
    DistributionError,
    FitDivergence,
    GridMismatch,
    IllConditioned,
    density_to_csv,
    reconstruct_density,
    simulate_tomography,
    wigner_from_csv,
    wigner_matrix_forward,
    wigner_to_csv,
)
from .metrics import EmptyBlock, NotSeparable, metrics_report
from . import __version__

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4

NUMERICAL_ERRORS = (
    TruncationError, ConvergenceError, UnsupportedError, StepSizeUnderflow,
    DispersiveViolation, CriticalPointError, GridMismatch, DistributionError,
    FitDivergence, IllConditioned, EmptyBlock, NotSeparable,
    FloatingPointError, np.linalg.LinAlgError, ValueError, KeyError,
)


class ConfigError(Exception):
    """Bad configuration file, flag combination, or state source."""


# ---------------------------------------------------------------------------
# configuration

_FLOAT = ("float",)
_INT = ("int",)
_BOOL = ("bool",)
_STR = ("str",)
_LIST = ("list",)

_DEVICE_KEYS = {k: _FLOAT for k in (
    "omega0", "omega_p", "f_idle", "eps1", "nu1", "eps2", "nu2", "K", "lam",
    "lambda_prime", "gamma_anh", "T1_q", "T2_q", "T1_p",
    "Fg", "Fe", "Fg_anc", "Fe_anc")}
_DEVICE_KEYS["preset"] = _STR

_SCHEMA = {
    "run": {"seed": _INT, "level": _STR, "out": _STR, "threads": _INT},
    "device": _DEVICE_KEYS,
    "schedule": {"xi0": _FLOAT, "xi_max": _FLOAT, "t_f": _FLOAT,
                 "ratio": _FLOAT, "omega_correction": _FLOAT,
                 "delta_offset": _FLOAT},
    "quench": {"n_fock": _INT, "dt": _FLOAT, "decoherent": _BOOL,
               "t_phi_override": _FLOAT, "dressed_channels": _BOOL,
               "resonant_nu2": _BOOL, "m_max": _INT,
               "snapshot_every": _FLOAT, "keep_times": _LIST},
    "state": {"preset": _STR, "path": _STR, "time": _FLOAT, "xi": _FLOAT,
              "alpha": _FLOAT, "ratio": _FLOAT, "n_fock": _INT},
    "tomography": {"mode": _STR, "re_min": _FLOAT, "re_max": _FLOAT,
                   "re_n": _INT, "im_min": _FLOAT, "im_max": _FLOAT,
                   "im_n": _INT, "n_max": _INT, "shots": _INT,
                   "readout_error": _BOOL, "correct_readout": _BOOL,
                   "mask_nbar": _FLOAT, "tau_step": _FLOAT, "n_tau": _INT},
    "reconstruct": {"n_fock": _INT, "max_iter": _INT, "tol": _FLOAT},
    "compare": {"n_fock": _INT, "dt_effective": _FLOAT, "dt_full": _FLOAT,
                "m_max": _INT},
}


def _check_type(path: str, value, kinds) -> None:
    kind = kinds[0]
    if kind == "bool":
        ok = isinstance(value, bool)
    elif kind == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "float":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind == "str":
        ok = isinstance(value, str)
    else:
        ok = isinstance(value, list) and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    if not ok:
        raise ConfigError(f"key '{path}' expects {kind}, got {value!r}")


def load_config(path: str | os.PathLike | None) -> dict:
    """Parse and strictly validate a TOML run configuration."""
    if path is None:
        return {}
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for section, body in cfg.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section '{section}'")
        if not isinstance(body, dict):
            raise ConfigError(f"section '{section}' must be a table")
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            _check_type(f"{section}.{key}", value, _SCHEMA[section][key])
    return cfg


def _device_from(cfg: dict) -> DeviceParams:
    body = dict(cfg.get("device", {}))
    preset = body.pop("preset", "table-s2")
    if preset != "table-s2":
        raise ConfigError(f"unknown device preset '{preset}'")
    return DeviceParams.from_mhz(**{k: float(v) for k, v in body.items()})


def _schedule_from(cfg: dict, dev: DeviceParams) -> QuenchSchedule:
    body = {k: float(v) for k, v in cfg.get("schedule", {}).items()}
    eta = effective_from_device(dev, delta=1.0).eta
    return QuenchSchedule(eta=eta, **body)


def _lindblad_from(cfg: dict, dev: DeviceParams) -> LindbladSpec | None:
    body = cfg.get("quench", {})
    if not body.get("decoherent", True):
        return None
    return LindbladSpec.from_device(dev, t_phi_override=body.get("t_phi_override", 0.5))


def _effective_at(dev: DeviceParams, xi: float, ratio: float) -> EffectiveParams:
    eta = effective_from_device(dev, delta=1.0).eta
    delta = 2.0 * eta / (xi * math.sqrt(ratio))
    return EffectiveParams(eta=eta, Omega=ratio * delta, delta=delta)


# ---------------------------------------------------------------------------
# state sources

PRESET_STATES = ("vacuum", "np", "sp", "sp-cat")


def preset_state(name: str, dev: DeviceParams, n_fock: int, *,
                 xi: float | None = None, alpha: float = 2.62,
                 ratio: float = 10.0) -> QuantumState:
    """Analytic preset states: ``vacuum``, ``np`` (squeezed normal-phase
    ground state), ``sp`` (one symmetry-broken branch) and ``sp-cat``
    (even-parity branch superposition with lobe amplitude ``alpha``)."""
    spec = HilbertSpec(n_fock)
    if name == "vacuum":
        psi = np.kron(qubit_state(2, "g"), fock_state(n_fock, 0))
        return QuantumState.from_vector(psi, spec)
    if name == "np":
        return np_ground_state(spec, _effective_at(dev, 0.5 if xi is None else xi, ratio))
    xi = 1.5 if xi is None else xi
    if xi <= 1.0:
        raise ConfigError("presets 'sp' and 'sp-cat' need xi > 1")
    # the branch displacement is sqrt(ratio (xi^4 - 1)) / (2 xi); choose the
    # frequency ratio that realizes the requested lobe amplitude
    ratio = 4.0 * xi**2 * alpha**2 / (xi**4 - 1.0)
    params = _effective_at(dev, xi, ratio)
    if name == "sp":
        return sp_ground_state(spec, params)
    if name == "sp-cat":
        return sp_cat_state(spec, params)
    raise ConfigError(f"unknown preset '{name}' (choose from {PRESET_STATES})")


def _load_snapshot(path: Path, want_time: float | None) -> QuantumState:
    if path.is_dir():
        files = sorted(path.glob("state_t*.npz"))
        if not files:
            raise ConfigError(f"no state snapshots under {path}")
        if want_time is None:
            want_time = TOMOGRAPHY_TIME
        times = [float(f.stem.split("state_t")[1]) for f in files]
        idx = int(np.argmin([abs(t - want_time) for t in times]))
        if abs(times[idx] - want_time) > 1e-6:
            raise ConfigError(
                f"no snapshot at t = {want_time} us (have {times})")
        path = files[idx]
    try:
        with np.load(path) as data:
            rho = data["rho"]
            spec = HilbertSpec(int(data["n_fock"]), int(data["n_qubit_levels"]))
    except (OSError, KeyError, zipfile.BadZipFile) as exc:
        raise ConfigError(f"cannot load state from {path}: {exc}") from exc
    return QuantumState(rho, spec)


def resolve_state(args, cfg: dict, dev: DeviceParams) -> tuple[QuantumState, dict]:
    """State selected by flags or the [state] config section."""
    body = cfg.get("state", {})
    path = getattr(args, "state", None) or body.get("path")
    preset = getattr(args, "preset", None) or body.get("preset")
    if path is not None and preset is not None:
        raise ConfigError("give either a state path or a preset, not both")
    if path is not None:
        state = _load_snapshot(Path(path), body.get("time"))
        return state, {"source": "snapshot", "path": str(path),
                       "time": body.get("time", TOMOGRAPHY_TIME)}
    if preset is None:
        raise ConfigError("no state source: pass --state/--preset or a [state] section")
    if preset not in PRESET_STATES:
        raise ConfigError(f"unknown preset '{preset}' (choose from {PRESET_STATES})")
    n_fock = int(body.get("n_fock", 40))
    xi = body.get("xi")
    state = preset_state(preset, dev, n_fock, xi=xi,
                         alpha=float(body.get("alpha", 2.62)),
                         ratio=float(body.get("ratio", 10.0)))
    desc = {"source": "preset", "preset": preset, "n_fock": n_fock}
    if preset != "vacuum":
        desc["xi"] = xi if xi is not None else (0.5 if preset == "np" else 1.5)
    if preset in ("sp", "sp-cat"):
        desc["alpha"] = float(body.get("alpha", 2.62))
    return state, desc


# ---------------------------------------------------------------------------
# output plumbing


def _write_atomic(path: Path, writer) -> None:
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


def _write_json(path: Path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
    _write_atomic(path, lambda p: Path(p).write_text(text))


def _manifest(command: str, args, cfg: dict, seed: int, outputs: list,
              extra: dict | None = None) -> dict:
    digest = None
    if args.config is not None:
        digest = hashlib.sha256(Path(args.config).read_bytes()).hexdigest()
    man = {
        "command": command,
        "package_version": __version__,
        "config": cfg,
        "config_file_sha256": digest,
        "seed": seed,
        "outputs": outputs,
    }
    if getattr(args, "level", None):
        man["level"] = args.level
    if extra:
        man.update(extra)
    return man


def _outdir(args, cfg: dict, command: str) -> Path:
    out = args.out or cfg.get("run", {}).get("out") or f"runs/{command}"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _beta_grid(tomo: dict, mode: str) -> np.ndarray:
    default_n = 41 if mode == "exact" else 21
    re = np.linspace(float(tomo.get("re_min", -4.0)), float(tomo.get("re_max", 4.0)),
                     int(tomo.get("re_n", default_n)))
    im = np.linspace(float(tomo.get("im_min", -4.0)), float(tomo.get("im_max", 4.0)),
                     int(tomo.get("im_n", default_n)))
    return (re[:, None] + 1j * im[None, :]).ravel()


# ---------------------------------------------------------------------------
# commands


def cmd_quench(args, cfg: dict, rng: np.random.Generator, seed: int) -> int:
    dev = _device_from(cfg)
    schedule = _schedule_from(cfg, dev)
    lindblad = _lindblad_from(cfg, dev)
    body = cfg.get("quench", {})
    level = args.level or cfg.get("run", {}).get("level", "rabi")
    spec = HilbertSpec(int(body.get("n_fock", 40)),
                       3 if level == "three-level" else 2)
    rec = run_quench(
        dev, schedule, lindblad, level=level, spec=spec,
        dt=body.get("dt"), snapshot_every=float(body.get("snapshot_every", 0.01)),
        keep_times=body.get("keep_times"), m_max=int(body.get("m_max", 8)),
        resonant_nu2=bool(body.get("resonant_nu2", True)),
        dressed_channels=body.get("dressed_channels"))

    outdir = _outdir(args, cfg, "quench")
    outputs = ["trajectory.csv"]
    _write_atomic(outdir / "trajectory.csv", lambda p: trajectory_to_csv(rec, p))
    def save_state(path, st, t):
        with open(path, "wb") as fh:
            np.savez(fh, rho=st.rho, n_fock=st.spec.n_fock,
                     n_qubit_levels=st.spec.n_qubit_levels, time=t,
                     level=rec.level)

    for t, st in sorted(rec.states.items()):
        name = f"state_t{t:.6f}.npz"
        _write_atomic(outdir / name, lambda p, st=st, t=t: save_state(p, st, t))
        outputs.append(name)
    man = _manifest("quench", args, cfg, seed, outputs, extra=rec.manifest())
    _write_json(outdir / "manifest.json", man)
    outputs.append("manifest.json")
    print(f"quench: {len(rec.times)} samples, final nbar = {rec.nbar[-1]:.4f}, "
          f"wrote {outdir}")
    return EXIT_OK


def cmd_wigner(args, cfg: dict, rng: np.random.Generator, seed: int) -> int:
    dev = _device_from(cfg)
    state, source = resolve_state(args, cfg, dev)
    tomo = cfg.get("tomography", {})
    mode = "exact"
    if tomo.get("mode"):
        mode = tomo["mode"]
    if args.exact:
        mode = "exact"
    if args.measured:
        mode = "measured"
    if mode not in ("exact", "measured"):
        raise ConfigError(f"tomography mode must be exact|measured, not '{mode}'")
    grid = _beta_grid(tomo, mode)

    if mode == "exact":
        record = wigner_matrix_forward(state, grid, mask_on_guard=True)
    else:
        taus = None
        if "tau_step" in tomo or "n_tau" in tomo:
            taus = np.arange(1, int(tomo.get("n_tau", 501)) + 1) * float(
                tomo.get("tau_step", 2e-3))
        threads = cfg.get("run", {}).get("threads")
        record = simulate_tomography(
            state, dev, grid, taus=taus, n_max=int(tomo.get("n_max", 20)),
            shots=tomo.get("shots"),
            readout_error=bool(tomo.get("readout_error", False)),
            correct_readout=tomo.get("correct_readout"),
            mask_nbar=float(tomo.get("mask_nbar", 10.0)),
            rng=rng, threads=threads)

    outdir = _outdir(args, cfg, "wigner")
    _write_atomic(outdir / "wigner.csv", lambda p: wigner_to_csv(record, p))
    man = _manifest("wigner", args, cfg, seed, ["wigner.csv"],
                    extra={"mode": mode, "state_source": source,
                           "n_points": len(record.beta),
                           "n_masked": int(np.sum(record.masked)),
                           "diagnostics": _json_safe(record.diagnostics)})
    _write_json(outdir / "manifest.json", man)
    print(f"wigner: {mode} mode, {len(record.beta)} points "
          f"({int(np.sum(record.masked))} masked), wrote {outdir}")
    return EXIT_OK


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def cmd_reconstruct(args, cfg: dict, rng: np.random.Generator, seed: int) -> int:
    record = wigner_from_csv(args.wigner_csv)
    body = cfg.get("reconstruct", {})
    spec = HilbertSpec(int(body.get("n_fock", 12)))
    result = reconstruct_density(record, spec,
                                 max_iter=int(body.get("max_iter", 500)),
                                 tol=float(body.get("tol", 1e-8)))
    outdir = _outdir(args, cfg, "reconstruct")
    _write_atomic(outdir / "density.csv", lambda p: density_to_csv(result.rho_hat, p))
    report = metrics_report(result.rho_hat)
    _write_json(outdir / "metrics.json", report)
    summary = {"residual": result.residual, "iterations": result.iterations,
               "converged": result.converged}
    _write_json(outdir / "reconstruction.json", summary)
    man = _manifest("reconstruct", args, cfg, seed,
                    ["density.csv", "metrics.json", "reconstruction.json"],
                    extra={"wigner_csv": str(args.wigner_csv), **summary})
    _write_json(outdir / "manifest.json", man)
    if not result.converged:
        print(f"reconstruct: NOT converged after {result.iterations} iterations "
              f"(residual {result.residual:.3e}); best iterate written to {outdir}",
              file=sys.stderr)
        return EXIT_NOT_CONVERGED
    print(f"reconstruct: converged in {result.iterations} iterations, "
          f"residual {result.residual:.3e}, wrote {outdir}")
    return EXIT_OK


def cmd_metrics(args, cfg: dict, rng: np.random.Generator, seed: int) -> int:
    dev = _device_from(cfg)
    state, source = resolve_state(args, cfg, dev)
    report = metrics_report(state)
    outdir = _outdir(args, cfg, "metrics")
    _write_json(outdir / "metrics.json", report)
    man = _manifest("metrics", args, cfg, seed, ["metrics.json"],
                    extra={"state_source": source})
    _write_json(outdir / "manifest.json", man)
    keys = ("negativity", "purity", "C_gg", "S_gg")
    shown = ", ".join(f"{k}={report[k]:.4f}" if isinstance(report[k], float)
                      else f"{k}=None" for k in keys)
    print(f"metrics: {shown}, wrote {outdir}")
    return EXIT_OK


def cmd_compare(args, cfg: dict, rng: np.random.Generator, seed: int) -> int:
    dev = _device_from(cfg)
    schedule = _schedule_from(cfg, dev)
    body = cfg.get("compare", {})
    full_level = args.level or "rotating"
    if full_level == "rabi":
        raise ConfigError("compare contrasts the effective model against a "
                          "full model; --level must be rotating or three-level")
    # the quench reaches nbar ~ 9; the closed runs lose norm below ~24 levels
    n_fock = int(body.get("n_fock", 24))
    dt_eff = float(body.get("dt_effective", 1e-3))
    dt_full = float(body.get("dt_full", 5e-5))
    m_max = int(body.get("m_max", 8))
    spec = HilbertSpec(n_fock)
    spec_full = HilbertSpec(n_fock, 3 if full_level == "three-level" else 2)
    t_f = schedule.t_f

    runs = {
        "effective_closed": run_quench(dev, schedule, None, level="rabi",
                                       spec=spec, dt=dt_eff, keep_times=[t_f]),
        "full_closed": run_quench(dev, schedule, None, level=full_level,
                                  spec=spec_full, dt=dt_full, m_max=m_max,
                                  keep_times=[t_f]),
        "full_decoherent": run_quench(dev, schedule, _lindblad_from(cfg, dev),
                                      level=full_level, spec=spec_full, dt=dt_full,
                                      m_max=m_max, keep_times=[t_f]),
    }
    dists = {}
    finals = {}
    b0 = effective_from_device(dev, delta=1.0).B0
    undress = drive_frame_rotation(spec_full, b0, t_f)
    for name, rec in runs.items():
        st = rec.state_at(t_f)
        rho = st.rho
        if rec.level != "rabi":
            # bring full-model states into the frame of the effective model
            # before any joint-state comparison (photon statistics are
            # unaffected, the qubit frame is)
            rho = undress @ rho @ undress.conj().T
        sigma = partial_trace_qubit(rho, rec.spec)
        dists[name] = np.clip(np.diag(sigma).real, 0.0, None)
        finals[name] = rho

    outdir = _outdir(args, cfg, "compare")

    def write_dists(path):
        with open(path, "w", newline="") as fh:
            fh.write("n,p_effective_closed,p_full_closed,p_full_decoherent\n")
            for n in range(n_fock):
                fh.write(f"{n},{dists['effective_closed'][n]:.10e},"
                         f"{dists['full_closed'][n]:.10e},"
                         f"{dists['full_decoherent'][n]:.10e}\n")

    _write_atomic(outdir / "distributions.csv", write_dists)

    def embed(rho):
        dim = spec_full.dim
        if rho.shape[0] == dim:
            return rho
        out = np.zeros((dim, dim), dtype=complex)
        out[: rho.shape[0], : rho.shape[1]] = rho
        return out

    pairs = [("effective_closed", "full_closed"),
             ("effective_closed", "full_decoherent"),
             ("full_closed", "full_decoherent")]
    rows = []
    for a, b in pairs:
        pa, pb = dists[a], dists[b]
        tv = 0.5 * float(np.abs(pa - pb).sum())
        classical = float(np.sqrt(pa * pb).sum()) ** 2
        joint = fidelity(embed(finals[a]), embed(finals[b]))
        rows.append((a, b, tv, classical, joint))

    def write_fid(path):
        with open(path, "w", newline="") as fh:
            fh.write("model_a,model_b,tv_distance,classical_fidelity,joint_fidelity\n")
            for a, b, tv, cf, jf in rows:
                fh.write(f"{a},{b},{tv:.8f},{cf:.8f},{jf:.8f}\n")

    _write_atomic(outdir / "fidelity.csv", write_fid)
    man = _manifest("compare", args, cfg, seed,
                    ["distributions.csv", "fidelity.csv"],
                    extra={"n_fock": n_fock, "t_f_us": t_f,
                           "vacuum_populations": {k: float(v[0]) for k, v in dists.items()},
                           "nbar_final": {k: float(rec.nbar[-1]) for k, rec in runs.items()}})
    _write_json(outdir / "manifest.json", man)
    print("compare: "
          + ", ".join(f"{a} vs {b}: TV={tv:.3f}" for a, b, tv, _, _ in rows)
          + f", wrote {outdir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--level", choices=["rabi", "rotating", "three-level"],
                        help="Hamiltonian level (overrides config)")

    state_source = argparse.ArgumentParser(add_help=False)
    state_source.add_argument("--state", help="snapshot .npz file or quench output directory")
    state_source.add_argument("--preset", choices=PRESET_STATES,
                              help="analytic preset state")

    parser = argparse.ArgumentParser(
        prog="rabi-spt",
        description="Quench, tomography, reconstruction and metrics pipelines "
                    "for a driven-qubit realization of the Rabi model.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("quench", parents=[common],
                   help="integrate a coupling ramp").set_defaults(func=cmd_quench)
    wig = sub.add_parser("wigner", parents=[common, state_source],
                         help="Wigner-matrix tomography of a state")
    mode = wig.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true",
                      help="exact forward map (no measurement emulation)")
    mode.add_argument("--measured", action="store_true",
                      help="emulated measurement chain")
    wig.set_defaults(func=cmd_wigner)
    rec = sub.add_parser("reconstruct", parents=[common],
                         help="density matrix from a Wigner-matrix CSV")
    rec.add_argument("wigner_csv", help="wigner.csv produced by the wigner verb")
    rec.set_defaults(func=cmd_reconstruct)
    met = sub.add_parser("metrics", parents=[common, state_source],
                         help="scalar metrics report for a state")
    met.set_defaults(func=cmd_metrics)
    sub.add_parser("compare", parents=[common],
                   help="effective vs full model photon distributions"
                   ).set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "exact"):
        args.exact = args.measured = False
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else int(
            cfg.get("run", {}).get("seed", 0))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.default_rng(seed)
    try:
        return args.func(args, cfg, rng, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
