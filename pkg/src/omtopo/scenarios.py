"""Named, reproducible scenario runs and parameter sweeps.

Each scenario bundles one figure-style parameter set (caption values are the
catalog defaults), its solver settings, and the list of CSV artifacts to
write.  Runs are deterministic: identical inputs produce byte-identical
CSVs, and every output is checksummed into a JSON manifest.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .meanfield import (CouplingEquality, calibrate_g, default_dt,
                        find_steady_state_fixed_point, find_steady_state_ode, integrate,
                        trajectory_to_csv)
from .model import (CELL_CHAIN, ODD_CHAIN, DriveProtocol, LatticeSpec, MeanFieldState, SpecError,
                    build_hamiltonian, classify_phase, effective_chain, spec_from_dict,
                    spec_to_dict)
from .spectral import distribution_to_csv, edge_weight, eigh, gauge_fix, ipr, spectrum_to_csv
from .dynamics import (instantaneous_spectrum_series, periodic_steady_state,
                       spectrum_series_to_csv, transfer_fidelity, transfer_to_csv,
                       zero_mode_to_csv, zero_mode_trajectory)

__all__ = [
    "ConfigError",
    "SolverSettings",
    "Scenario",
    "SweepSpec",
    "SCENARIOS",
    "scenario",
    "run_scenario",
    "run_sweep",
    "load_config",
    "save_config",
    "verify_manifest",
    "default_out_root",
]

W = 1e5  # drive amplitude of every figure, units omega_b


class ConfigError(ValueError):
    """Malformed or unknown configuration input."""


@dataclass(frozen=True)
class SolverSettings:
    """Per-scenario numerical settings (all overridable from configs)."""

    steady_method: str = "fixed_point"   # route used for the scenario's chain
    tol_ode: float = 1e-7
    max_time: float = 1500.0
    tol_fp: float = 1e-12
    damping: float = 0.5
    dt: float = 0.0                      # 0 -> default_dt(spec)
    t_end_trajectory: float = 1500.0
    trajectory_samples: int = 1001
    pss_tol: float = 1e-9
    max_periods: int = 64
    samples_per_period: int = 2001
    n_series_samples: int = 101
    n_zero_mode_samples: int = 201
    transfer_dt: float = 0.05
    nu: float = 0.006
    rel_tol_phase: float = 0.02

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Calibration:
    adjustable_index: int
    bond_a: int
    bond_b: int
    tol: float = 1e-5

    def to_dict(self):
        return {"adjustable_index": self.adjustable_index, "bond_a": self.bond_a,
                "bond_b": self.bond_b, "tol": self.tol}


@dataclass(frozen=True)
class Scenario:
    """A named figure-reproduction run."""

    name: str
    description: str
    spec: LatticeSpec
    settings: SolverSettings
    outputs: tuple          # of output kinds
    calibration: Calibration | None = None


def _cell2(g1, g2, k1, k2):
    return LatticeSpec(
        topology=CELL_CHAIN, n=2, delta_a=(1.0, 1.0), omega_b=(1.0, 1.0),
        g=(g1, g2), kappa=(k1, k2), gamma=(1e-5, 1e-5),
        drive=(DriveProtocol.constant(W), DriveProtocol.constant(W)))


def _cell3():
    return LatticeSpec(
        topology=CELL_CHAIN, n=3, delta_a=(1.0, 1.0, 1.0), omega_b=(1.0, 1.0, 1.0),
        g=(1.028e-6, 1.0e-6, 0.975e-6), kappa=(0.5, 0.2, 0.1), gamma=(1e-5, 1e-5, 1e-5),
        drive=(DriveProtocol.constant(W),) * 3)


def _odd2(nu=0.006):
    return LatticeSpec(
        topology=ODD_CHAIN, n=2, delta_a=(1.0, 1.0), omega_b=(1.0,),
        g=(1e-6,), kappa=(0.1, 0.1), gamma=(1e-5,),
        drive=(DriveProtocol.cosine(W, -1, nu), DriveProtocol.cosine(W, +1, nu)))


def _catalog():
    ssh_cal = Calibration(adjustable_index=0, bond_a=0, bond_b=2)
    items = [
        Scenario("fig2a", "symmetric two-cell chain, uncalibrated couplings",
                 _cell2(1e-6, 1e-6, 0.1, 0.1),
                 SolverSettings(), ("trajectory",)),
        Scenario("fig2d", "two-cell chain with g1 balancing |G1|=|G3|",
                 _cell2(1.023e-6, 1e-6, 0.1, 0.1),
                 SolverSettings(), ("trajectory", "couplings"), ssh_cal),
        Scenario("fig3", "spectrum and gap-state distribution of the balanced chain",
                 _cell2(1.023e-6, 1e-6, 0.1, 0.1),
                 SolverSettings(), ("spectrum", "distribution", "couplings"), ssh_cal),
        Scenario("fig4", "strong first-cavity decay (kappa1 = 3.5)",
                 _cell2(2.015e-6, 1e-6, 3.5, 0.1),
                 SolverSettings(damping=0.1, max_time=3000.0),
                 ("trajectory", "spectrum", "distribution", "couplings"), ssh_cal),
        Scenario("fig5", "first-cavity decay pushed to kappa1 = 10",
                 _cell2(5.12e-6, 1e-6, 10.0, 0.1),
                 SolverSettings(damping=0.1, max_time=3000.0),
                 ("trajectory", "spectrum", "distribution", "couplings"), ssh_cal),
        Scenario("fig6", "three unit cells with staggered decays",
                 _cell3(),
                 SolverSettings(damping=0.2, max_time=2500.0), ("trajectory", "couplings")),
        Scenario("fig7", "second-cavity decay at the critical value 0.412",
                 _cell2(1e-6, 1e-6, 0.1, 0.412),
                 SolverSettings(damping=0.2, max_time=1200.0),
                 ("trajectory", "spectrum", "distribution", "couplings")),
        Scenario("fig8", "second-cavity decay 5.0: trivial-phase chain",
                 _cell2(1e-6, 2.7375e-6, 0.1, 5.0),
                 SolverSettings(damping=0.1, max_time=12000.0),
                 ("trajectory", "spectrum", "distribution", "couplings"),
                 Calibration(adjustable_index=1, bond_a=0, bond_b=2)),
        Scenario("fig10a", "periodically driven three-site chain: one response period",
                 _odd2(),
                 SolverSettings(steady_method="floquet", t_end_trajectory=0.0),
                 ("trajectory",)),
        Scenario("fig10b", "instantaneous spectra across one drive period",
                 _odd2(),
                 SolverSettings(steady_method="floquet"), ("spectrum_series",)),
        Scenario("fig10c", "zero-mode site distribution across one drive period",
                 _odd2(),
                 SolverSettings(steady_method="floquet"), ("zero_mode",)),
        Scenario("transfer", "single-excitation transfer through the pumped zero mode",
                 _odd2(),
                 SolverSettings(steady_method="floquet"), ("transfer",)),
    ]
    return {s.name: s for s in items}


SCENARIOS = _catalog()


def scenario(name):
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario '{name}'; known: {', '.join(sorted(SCENARIOS))}") from None


def default_out_root():
    return os.environ.get("OMTOPO_OUT", "out")


# --- parameter override paths ----------------------------------------------

_INDEXED_FIELDS = {"delta_a", "omega_b", "g", "kappa", "gamma"}
_DRIVE_FIELDS = {"base", "nu", "sign", "phase"}


def set_spec_param(spec, path, value):
    """Return a copy of ``spec`` with one numeric leaf replaced; the path
    grammar is ``field[index]`` or ``drive[index].field``."""
    path = path.strip()
    name, _, rest = path.partition("[")
    if not rest or "]" not in rest:
        raise ConfigError(f"override path '{path}' must index a sequence, e.g. kappa[1]")
    idx_str, _, tail = rest.partition("]")
    try:
        idx = int(idx_str)
    except ValueError:
        raise ConfigError(f"override path '{path}' has a non-integer index '{idx_str}'") from None
    if name in _INDEXED_FIELDS:
        if tail:
            raise ConfigError(f"override path '{path}': trailing '{tail}' not allowed")
        seq = list(getattr(spec, name))
        if not (0 <= idx < len(seq)):
            raise ConfigError(f"override path '{path}': index out of range (length {len(seq)})")
        seq[idx] = float(value)
        return replace(spec, **{name: tuple(seq)})
    if name == "drive":
        if not tail.startswith(".") or tail[1:] not in _DRIVE_FIELDS:
            raise ConfigError(f"override path '{path}' must end in one of "
                              f"{sorted(_DRIVE_FIELDS)} for drives")
        fieldname = tail[1:]
        drives = list(spec.drive)
        if not (0 <= idx < len(drives)):
            raise ConfigError(f"override path '{path}': index out of range (length {len(drives)})")
        kwargs = {"kind": drives[idx].kind, "base": drives[idx].base, "sign": drives[idx].sign,
                  "nu": drives[idx].nu, "phase": drives[idx].phase}
        kwargs[fieldname] = int(value) if fieldname == "sign" else float(value)
        drives[idx] = DriveProtocol(**kwargs)
        return replace(spec, drive=tuple(drives))
    raise ConfigError(f"override path '{path}': unknown field '{name}'")


def apply_overrides(spec, settings, overrides):
    """Split override keys between the spec (field[index] paths) and solver
    settings (solver.<name>)."""
    for key, value in overrides.items():
        if key.startswith("solver."):
            name = key[len("solver."):]
            if name not in SolverSettings.__dataclass_fields__:
                raise ConfigError(f"unknown solver setting '{key}'")
            cur = getattr(settings, name)
            cast = type(cur) if not isinstance(cur, float) else float
            settings = replace(settings, **{name: cast(value)})
        else:
            spec = set_spec_param(spec, key, value)
    return spec, settings


# --- scenario runner ---------------------------------------------------------

def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _steady_state(spec, settings):
    dt = settings.dt or None
    if settings.steady_method == "ode":
        return find_steady_state_ode(spec, tol=settings.tol_ode, dt=dt,
                                     max_time=settings.max_time)
    if settings.steady_method == "fixed_point":
        return find_steady_state_fixed_point(spec, tol=settings.tol_fp,
                                             damping=settings.damping)
    raise ConfigError(f"unknown steady method '{settings.steady_method}'")


def _chain_extras(spec, chain):
    extras = {"couplings_abs": [float(x) for x in np.abs(chain.couplings)]}
    fixed = gauge_fix(chain)
    res = eigh(build_hamiltonian(fixed))
    gap = res.gap_state_indices
    extras["eigenvalues"] = [float(x) for x in res.eigenvalues]
    extras["gap_state_eigenvalues"] = [float(res.eigenvalues[i]) for i in gap]
    vec = res.eigenvectors[:, gap[-1]]
    extras["gap_state_edge_weight"] = edge_weight(vec)
    extras["gap_state_ipr"] = ipr(vec)
    if spec.topology == CELL_CHAIN and spec.n >= 2:
        extras["phase_class"] = classify_phase(chain).value
        intra = np.abs(chain.intra_couplings()).mean()
        inter = np.abs(chain.inter_couplings()).mean()
        extras["coupling_ratio"] = float(intra / inter)
    return extras, res, vec


def run_scenario(name, overrides=None, out_dir=None, skip_calibration=False):
    """Execute one catalog scenario and write its CSV artifacts plus a
    checksummed manifest.json; returns the manifest dict."""
    sc = scenario(name)
    spec, settings = apply_overrides(sc.spec, sc.settings, overrides or {})
    if out_dir is None:
        out_dir = os.path.join(default_out_root(), name)
    os.makedirs(out_dir, exist_ok=True)
    started = time.time()
    extras = {}
    run_spec = spec
    if sc.calibration and not skip_calibration:
        cal = sc.calibration
        run_spec = calibrate_g(spec, cal.adjustable_index,
                               CouplingEquality(cal.bond_a, cal.bond_b), tol=cal.tol,
                               damping=min(settings.damping, 0.2))
        extras["calibrated_g"] = [float(x) for x in run_spec.g]
    outputs = []

    def emit(kind, filename, writer):
        path = os.path.join(out_dir, filename)
        writer(path)
        outputs.append({"kind": kind, "path": filename, "sha256": _sha256(path)})

    if settings.steady_method == "floquet":
        pss = periodic_steady_state(run_spec, tol=settings.pss_tol,
                                    max_periods=settings.max_periods,
                                    dt=settings.dt or None,
                                    samples_per_period=settings.samples_per_period)
        extras["period"] = pss.period
        extras["pss_convergence_error"] = pss.convergence_error
        if "trajectory" in sc.outputs:
            emit("trajectory", "trajectory.csv", lambda p: trajectory_to_csv(pss.samples, p))
        if "spectrum_series" in sc.outputs:
            series = instantaneous_spectrum_series(run_spec, pss, settings.n_series_samples)
            zero = max(min(abs(x) for x in res.eigenvalues) for _, res in series)
            extras["max_abs_zero_eigenvalue"] = float(zero)
            nonzero = min(sorted(abs(x) for x in res.eigenvalues)[1] for _, res in series)
            extras["min_nonzero_eigenvalue"] = float(nonzero)
            emit("spectrum_series", "spectrum_series.csv",
                 lambda p: spectrum_series_to_csv(series, p))
        if "zero_mode" in sc.outputs:
            samples = zero_mode_trajectory(run_spec, pss, settings.n_zero_mode_samples)
            emit("zero_mode", "zero_mode.csv", lambda p: zero_mode_to_csv(samples, p))
        if "transfer" in sc.outputs:
            nu_run = run_spec.drive[0].nu if run_spec.drive[0].kind == "cosine" else settings.nu
            result = transfer_fidelity(run_spec, nu_run, dt=settings.transfer_dt)
            extras["fidelity"] = result.fidelity
            extras["norm_drift"] = result.norm_drift
            emit("transfer", "transfer.csv", lambda p: transfer_to_csv(result, p))
    else:
        if "trajectory" in sc.outputs:
            dt = settings.dt or default_dt(run_spec)
            n_steps = max(1, math.ceil(settings.t_end_trajectory / dt))
            every = max(1, n_steps // (settings.trajectory_samples - 1))
            traj = integrate(run_spec, MeanFieldState.vacuum(run_spec),
                             settings.t_end_trajectory, dt=dt, sample_every=every)
            emit("trajectory", "trajectory.csv", lambda p: trajectory_to_csv(traj, p))
        report = _steady_state(run_spec, settings)
        extras["steady_method"] = report.method.value
        extras["steady_residual"] = report.residual
        extras["steady_alpha_abs"] = [float(x) for x in np.abs(report.state.alpha)]
        extras["steady_beta_abs"] = [float(x) for x in np.abs(report.state.beta)]
        chain = effective_chain(run_spec, report.state)
        chain_extras, res, vec = _chain_extras(run_spec, chain)
        extras.update(chain_extras)
        if "couplings" in sc.outputs:
            emit("couplings", "couplings.csv", lambda p: _couplings_to_csv(chain, p))
        if "spectrum" in sc.outputs:
            emit("spectrum", "spectrum.csv", lambda p: spectrum_to_csv(res, p))
        if "distribution" in sc.outputs:
            emit("distribution", "distribution.csv", lambda p: distribution_to_csv(vec, p))

    manifest = {
        "scenario": name,
        "resolved_spec": spec_to_dict(spec),
        "settings": settings.to_dict(),
        "outputs": outputs,
        "extras": extras,
        "wall_time": time.time() - started,
        "versions": _versions(),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _couplings_to_csv(chain, path):
    with open(path, "w", newline="") as fh:
        fh.write("bond,re,im,abs\n")
        for i, j in enumerate(chain.couplings):
            fh.write(",".join([str(i + 1), format(j.real, ".17g"), format(j.imag, ".17g"),
                               format(abs(j), ".17g")]) + "\n")


def _versions():
    import numpy
    versions = {"omtopo": __version__, "numpy": numpy.__version__}
    try:
        import numba
        versions["numba"] = numba.__version__
    except ImportError:
        versions["numba"] = None
    return versions


def verify_manifest(out_dir):
    """Recompute the checksums of a manifest's outputs; returns the list of
    mismatched paths (empty when intact)."""
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    bad = []
    for entry in manifest["outputs"]:
        path = os.path.join(out_dir, entry["path"])
        if not os.path.exists(path) or _sha256(path) != entry["sha256"]:
            bad.append(entry["path"])
    return bad


# --- sweeps ------------------------------------------------------------------

_OBSERVABLES = ("edge_weight_of_gap_state", "gap_state_splitting", "coupling_ratio",
                "steady_alpha_abs", "phase_class")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep with an optional per-point coupling calibration."""

    parameter: str
    values: tuple
    observable: str
    base: str = "fig2a"                  # catalog scenario providing spec+settings
    calibration: Calibration | None = None
    rel_tol: float = 0.02
    jobs: int = 1

    def __post_init__(self):
        if self.observable not in _OBSERVABLES:
            raise ConfigError(f"unknown observable '{self.observable}'; "
                              f"known: {', '.join(_OBSERVABLES)}")
        vals = tuple(float(v) for v in self.values)
        if any(not math.isfinite(v) for v in vals):
            raise ConfigError("sweep values must be finite")
        ascending = all(a <= b for a, b in zip(vals, vals[1:]))
        descending = all(a >= b for a, b in zip(vals, vals[1:]))
        if not (ascending or descending):
            raise ConfigError("sweep values must be monotonically ordered")
        object.__setattr__(self, "values", vals)


def _observable_columns(sweep, spec):
    if sweep.observable == "steady_alpha_abs":
        return [f"abs_alpha_{j + 1}" for j in range(spec.n_cavities)]
    return [sweep.observable]


def _sweep_point(args):
    sweep_dict, spec_dict, settings_dict, value = args
    sweep = SweepSpec(**{**sweep_dict, "calibration": (Calibration(**sweep_dict["calibration"])
                                                       if sweep_dict["calibration"] else None)})
    spec = spec_from_dict(spec_dict)
    settings = SolverSettings(**settings_dict)
    spec = set_spec_param(spec, sweep.parameter, value)
    if sweep.calibration:
        cal = sweep.calibration
        spec = calibrate_g(spec, cal.adjustable_index, CouplingEquality(cal.bond_a, cal.bond_b),
                           tol=cal.tol, damping=min(settings.damping, 0.2))
    report = find_steady_state_fixed_point(spec, tol=settings.tol_fp, damping=settings.damping)
    chain = effective_chain(spec, report.state)
    if sweep.observable == "steady_alpha_abs":
        return [float(x) for x in np.abs(report.state.alpha)]
    if sweep.observable == "coupling_ratio":
        return [float(np.abs(chain.intra_couplings()).mean() / np.abs(chain.inter_couplings()).mean())]
    if sweep.observable == "phase_class":
        return [classify_phase(chain, rel_tol=sweep.rel_tol).value]
    res = eigh(build_hamiltonian(gauge_fix(chain)))
    gap = res.gap_state_indices
    if sweep.observable == "gap_state_splitting":
        if len(gap) < 2:
            raise SpecError("gap_state_splitting needs an even chain")
        return [float(abs(res.eigenvalues[gap[1]] - res.eigenvalues[gap[0]]))]
    return [edge_weight(res.eigenvectors[:, gap[-1]])]


def run_sweep(sweep, base_spec=None, out_dir=None):
    """Evaluate the sweep observable at every parameter value (optionally
    recalibrating per point) and write sweep.csv plus a manifest.

    Points run independently (``sweep.jobs`` processes when > 1); rows are
    emitted in input order regardless of completion order, and per-point
    failures are recorded in the manifest while the run continues.
    """
    base = scenario(sweep.base)
    spec = base_spec if base_spec is not None else base.spec
    settings = base.settings
    if out_dir is None:
        out_dir = os.path.join(default_out_root(), f"sweep_{sweep.parameter.replace('[', '_').rstrip(']')}")
    os.makedirs(out_dir, exist_ok=True)
    started = time.time()
    sweep_dict = {"parameter": sweep.parameter, "values": sweep.values,
                  "observable": sweep.observable, "base": sweep.base,
                  "calibration": sweep.calibration.to_dict() if sweep.calibration else None,
                  "rel_tol": sweep.rel_tol, "jobs": sweep.jobs}
    tasks = [(sweep_dict, spec_to_dict(spec), settings.to_dict(), v) for v in sweep.values]
    results = [None] * len(tasks)
    errors = {}
    if sweep.jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=sweep.jobs) as pool:
            futures = {pool.submit(_sweep_point, t): i for i, t in enumerate(tasks)}
            for fut in concurrent.futures.as_completed(futures):
                i = futures[fut]
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    errors[i] = f"{type(exc).__name__}: {exc}"
    else:
        for i, t in enumerate(tasks):
            try:
                results[i] = _sweep_point(t)
            except Exception as exc:
                errors[i] = f"{type(exc).__name__}: {exc}"

    csv_path = os.path.join(out_dir, "sweep.csv")
    cols = ["value"] + _observable_columns(sweep, spec)
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for v, row in zip(sweep.values, results):
            if row is None:
                continue
            cells = [format(v, ".17g")]
            cells += [x if isinstance(x, str) else format(float(x), ".17g") for x in row]
            fh.write(",".join(cells) + "\n")
    manifest = {
        "sweep": sweep_dict,
        "resolved_spec": spec_to_dict(spec),
        "settings": settings.to_dict(),
        "outputs": [{"kind": "sweep", "path": "sweep.csv", "sha256": _sha256(csv_path)}],
        "errors": {str(sweep.values[i]): msg for i, msg in sorted(errors.items())},
        "wall_time": time.time() - started,
        "versions": _versions(),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# --- config files --------------------------------------------------------------

_SCENARIO_CFG_KEYS = {"type", "name", "spec", "overrides", "out_dir"}
_SWEEP_CFG_KEYS = {"type", "base", "spec", "parameter", "values", "observable",
                   "calibration", "rel_tol", "jobs", "out_dir"}
_CAL_CFG_KEYS = {"adjustable_index", "bond_a", "bond_b", "tol"}


def load_config(path):
    """Parse a JSON config into a (kind, payload) pair where kind is
    "scenario" or "sweep".

    Scenario payload: {"name", "spec", "overrides", "out_dir"}.
    Sweep payload: {"sweep": SweepSpec, "spec", "out_dir"}.
    Unknown keys are rejected with their full path.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error in '{path}' at line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")
    kind = obj.get("type")
    if kind == "scenario":
        unknown = set(obj) - _SCENARIO_CFG_KEYS
        if unknown:
            raise ConfigError(f"unknown key '{sorted(unknown)[0]}'")
        name = obj.get("name")
        if name is None and "spec" not in obj:
            raise ConfigError("scenario config needs 'name' or a full 'spec'")
        if name is not None and name not in SCENARIOS:
            raise ConfigError(f"unknown scenario '{name}'")
        spec = spec_from_dict(obj["spec"]) if "spec" in obj else None
        overrides = obj.get("overrides", {})
        if not isinstance(overrides, dict):
            raise ConfigError("'overrides' must be an object")
        base = scenario(name).spec if name else spec
        for key, val in overrides.items():   # validate paths eagerly
            if not key.startswith("solver."):
                set_spec_param(base, key, val)
            elif key[len("solver."):] not in SolverSettings.__dataclass_fields__:
                raise ConfigError(f"unknown solver setting '{key}'")
        return "scenario", {"name": name, "spec": spec, "overrides": overrides,
                            "out_dir": obj.get("out_dir")}
    if kind == "sweep":
        unknown = set(obj) - _SWEEP_CFG_KEYS
        if unknown:
            raise ConfigError(f"unknown key '{sorted(unknown)[0]}'")
        for req in ("parameter", "values", "observable"):
            if req not in obj:
                raise ConfigError(f"sweep config is missing '{req}'")
        cal = None
        if obj.get("calibration") is not None:
            cal_obj = obj["calibration"]
            unknown = set(cal_obj) - _CAL_CFG_KEYS
            if unknown:
                raise ConfigError(f"unknown key 'calibration.{sorted(unknown)[0]}'")
            cal = Calibration(**cal_obj)
        sweep = SweepSpec(parameter=obj["parameter"], values=obj["values"],
                          observable=obj["observable"], base=obj.get("base", "fig2a"),
                          calibration=cal, rel_tol=obj.get("rel_tol", 0.02),
                          jobs=obj.get("jobs", 1))
        spec = spec_from_dict(obj["spec"]) if "spec" in obj else None
        return "sweep", {"sweep": sweep, "spec": spec, "out_dir": obj.get("out_dir")}
    raise ConfigError(f"config 'type' must be 'scenario' or 'sweep', got {kind!r}")


def save_config(kind, payload, path):
    """Serialize a (kind, payload) pair back to a canonical JSON config; a
    save/load cycle is bit-identical."""
    if kind == "scenario":
        obj = {"type": "scenario"}
        if payload.get("name"):
            obj["name"] = payload["name"]
        if payload.get("spec") is not None:
            obj["spec"] = spec_to_dict(payload["spec"])
        if payload.get("overrides"):
            obj["overrides"] = payload["overrides"]
        if payload.get("out_dir"):
            obj["out_dir"] = payload["out_dir"]
    elif kind == "sweep":
        sweep = payload["sweep"]
        obj = {"type": "sweep", "base": sweep.base, "parameter": sweep.parameter,
               "values": list(sweep.values), "observable": sweep.observable,
               "rel_tol": sweep.rel_tol, "jobs": sweep.jobs}
        if sweep.calibration:
            obj["calibration"] = sweep.calibration.to_dict()
        if payload.get("spec") is not None:
            obj["spec"] = spec_to_dict(payload["spec"])
        if payload.get("out_dir"):
            obj["out_dir"] = payload["out_dir"]
    else:
        raise ConfigError(f"unknown config kind '{kind}'")
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
