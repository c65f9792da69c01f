"""Nonlinear mean-field dynamics and steady-state solvers.

The equations of motion per cavity j and resonator j (units omega_b = 1):

    d(alpha_j)/dt = -i * Delta'_j * alpha_j - i * Omega_j(t) - kappa_j/2 * alpha_j
    d(beta_j)/dt  = -i * (omega_j * beta_j - g_j |alpha_j|^2 + g_j |alpha_{j+1}|^2)
                    - gamma_j/2 * beta_j

with the resonator-dressed detuning

    Delta'_j = delta_j + g_{j-1} * 2 Re(beta_{j-1}) - g_j * 2 Re(beta_j),

where terms referencing an absent resonator (or, for a terminal resonator,
the absent right cavity) are dropped.  Steady states are found either by
relaxing the ODE from the vacuum or by damped self-consistent iteration of
the algebraic fixed-point equations; the two routes are kept independent so
they can cross-validate each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .model import CELL_CHAIN, LatticeSpec, MeanFieldState, SpecError

__all__ = [
    "Trajectory",
    "SteadyStateReport",
    "SteadyStateMethod",
    "SteadyStateError",
    "DivergenceError",
    "CouplingEquality",
    "CalibrationError",
    "rhs",
    "default_dt",
    "integrate",
    "find_steady_state_ode",
    "find_steady_state_fixed_point",
    "calibrate_g",
    "trajectory_to_csv",
]


class DivergenceError(RuntimeError):
    """An amplitude exceeded the divergence guard during integration."""


class SteadyStateError(RuntimeError):
    """A steady-state solver failed to converge; carries the best residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CalibrationError(RuntimeError):
    """calibrate_g could not bracket or refine the coupling-balance root."""


class SteadyStateMethod(enum.Enum):
    ODE_RELAXATION = "ode_relaxation"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True)
class Trajectory:
    """Sampled mean-field time evolution (times strictly increasing)."""

    times: np.ndarray
    alpha: np.ndarray  # (n_samples, n_cavities) complex
    beta: np.ndarray   # (n_samples, n_resonators) complex

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i):
        return MeanFieldState(t=float(self.times[i]), alpha=self.alpha[i], beta=self.beta[i])

    @property
    def final_state(self):
        return self.state(len(self.times) - 1)


@dataclass(frozen=True)
class SteadyStateReport:
    state: MeanFieldState
    method: SteadyStateMethod
    residual: float          # max_j |dX_j/dt| / (1 + |X_j|) at the reported state
    iterations_or_time: float


def rhs(spec, state, t=None):
    """Time derivative (dalpha, dbeta) of the mean field at time t.

    ``t`` defaults to ``state.t``; it matters only for time-dependent drives.
    """
    state.check_dims(spec)
    if t is None:
        t = state.t
    alpha, beta = state.alpha, state.beta
    ncav, nres = spec.n_cavities, spec.n_resonators
    dalpha = np.zeros(ncav, complex)
    dbeta = np.zeros(nres, complex)
    two_re_beta = 2.0 * beta.real
    for j in range(ncav):
        dp = spec.delta_a[j]
        if j >= 1 and j - 1 < nres:
            dp += spec.g[j - 1] * two_re_beta[j - 1]
        if j < nres:
            dp -= spec.g[j] * two_re_beta[j]
        dalpha[j] = -1j * dp * alpha[j] - 1j * spec.drive[j].amplitude(t) - 0.5 * spec.kappa[j] * alpha[j]
    for j in range(nres):
        force = -spec.g[j] * abs(alpha[j]) ** 2
        if j + 1 < ncav:
            force += spec.g[j] * abs(alpha[j + 1]) ** 2
        dbeta[j] = -1j * (spec.omega_b[j] * beta[j] + force) - 0.5 * spec.gamma[j] * beta[j]
    return dalpha, dbeta


def normalized_residual(spec, state, t=None):
    """max over amplitudes of |dX/dt| / (1 + |X|); zero exactly at a fixed point."""
    dalpha, dbeta = rhs(spec, state, t)
    ra = np.abs(dalpha) / (1.0 + np.abs(state.alpha))
    rb = np.abs(dbeta) / (1.0 + np.abs(state.beta)) if len(dbeta) else np.zeros(0)
    return float(max(ra.max(), rb.max() if len(rb) else 0.0))


def default_dt(spec):
    """Step size heuristic: 0.005 for kappa <= 1 runs, 0.001 once any kappa
    reaches 5, otherwise shrunk so max(Delta, kappa, omega_b) * dt <= 0.01."""
    if max(spec.kappa) >= 5.0:
        return 0.001
    fastest = max(max(abs(d) for d in spec.delta_a), max(spec.kappa), max(spec.omega_b), 1.0)
    return min(0.005, 0.01 / fastest)


def _pack(state):
    return np.concatenate([state.alpha, state.beta]).astype(np.complex128)


def _run_kernel(spec, y0, t0, t_end, dt, sample_every):
    span = t_end - t0
    n_steps = max(1, int(math.ceil(span / dt - 1e-12)))
    h = span / n_steps
    delta, omegab, g, kappa, gamma = _kernel.spec_arrays(spec)
    dkind, dbase, dsign, dnu, dphase = _kernel.drive_arrays(spec)
    out, out_t, status, m = _kernel.rk4_run(
        y0, t0, h, n_steps, sample_every, spec.n_cavities, spec.n_resonators,
        delta, omegab, g, kappa, gamma, dkind, dbase, dsign, dnu, dphase)
    return out[:m], out_t[:m], status


def integrate(spec, state0, t_end, dt=None, sample_every=1):
    """Fixed-step classical RK4 from ``state0`` to ``t_end``.

    The span is divided into uniform steps of size <= dt so that the last
    sample lands exactly on ``t_end``.  Sampling keeps every
    ``sample_every``-th step plus the initial and final states.

    Raises
    ------
    DivergenceError
        If any amplitude magnitude exceeds 1e12.
    """
    state0.check_dims(spec)
    if t_end <= state0.t:
        raise ValueError(f"t_end={t_end} must exceed the initial time {state0.t}")
    if dt is None:
        dt = default_dt(spec)
    if dt <= 0:
        raise ValueError("dt must be positive")
    out, out_t, status = _run_kernel(spec, _pack(state0), state0.t, t_end, dt, sample_every)
    ncav = spec.n_cavities
    if status == _kernel.STATUS_DIVERGED:
        raise DivergenceError(
            f"amplitude exceeded {_kernel.DIVERGENCE_LIMIT:.0e} at t={out_t[-1]:.6g} "
            f"(max |X| = {np.abs(out[-1]).max():.3e}); the drive/decay balance is unstable "
            f"or dt={dt} is too large")
    return Trajectory(times=out_t, alpha=out[:, :ncav], beta=out[:, ncav:])


def find_steady_state_ode(spec, tol=1e-7, dt=None, max_time=None, check_interval=None):
    """Relax the mean field from vacuum until the normalized residual
    max |dX/dt|/(1+|X|) drops below ``tol``.

    Only constant drives qualify (periodic drives never reach a fixed point;
    use dynamics.periodic_steady_state).  ``max_time`` defaults to
    50/min(kappa).

    Raises
    ------
    SteadyStateError
        If the residual has not reached ``tol`` by ``max_time``.  Parameter
        sets whose fixed point is dynamically unstable (self-oscillation)
        end up here by design.
    """
    if any(d.kind != "constant" for d in spec.drive):
        raise SpecError("find_steady_state_ode requires constant drives; "
                        "use dynamics.periodic_steady_state for periodic ones")
    if min(spec.kappa) <= 0:
        raise SpecError("find_steady_state_ode requires all kappa > 0")
    if dt is None:
        dt = default_dt(spec)
    if max_time is None:
        max_time = 50.0 / min(spec.kappa)
    if check_interval is None:
        check_interval = max(5.0, 200 * dt)
    t = 0.0
    state = MeanFieldState.vacuum(spec)
    best = math.inf
    while t < max_time:
        t_next = min(t + check_interval, max_time)
        traj = integrate(spec, state, t_next, dt=dt, sample_every=10 ** 9)
        state = traj.final_state
        t = state.t
        res = normalized_residual(spec, state)
        best = min(best, res)
        if res < tol:
            return SteadyStateReport(state=state, method=SteadyStateMethod.ODE_RELAXATION,
                                     residual=res, iterations_or_time=t)
    raise SteadyStateError(
        f"no steady state within t={max_time:.6g}: best normalized residual {best:.3e} "
        f"(tol {tol:.1e}); the trajectory may be a limit cycle", residual=best)


def find_steady_state_fixed_point(spec, tol=1e-12, damping=0.5, max_iter=100000):
    """Damped self-consistent iteration of the algebraic steady-state map

        beta_j  <- g_j (|alpha_j|^2 - |alpha_{j+1}|^2) / (omega_j - i gamma_j/2)
        alpha_j <- -i Omega_j / (i Delta'_j(beta) + kappa_j/2)

    with under-relaxation X <- (1-damping) X_old + damping X_new, until the
    successive relative change per amplitude falls below ``tol``.  Converges
    to the algebraic root even where ODE relaxation self-oscillates.
    """
    if any(d.kind != "constant" for d in spec.drive):
        raise SpecError("find_steady_state_fixed_point requires constant drives")
    if not (0 < damping <= 1):
        raise ValueError("damping must be in (0, 1]")
    ncav, nres = spec.n_cavities, spec.n_resonators
    omegas = np.array([d.amplitude(0.0) for d in spec.drive])
    alpha = np.zeros(ncav, complex)
    beta = np.zeros(nres, complex)
    # floor keeps the change metric meaningful at double precision for |X|~1e5
    tol = max(tol, 5e-15)
    for it in range(1, max_iter + 1):
        beta_new = np.zeros(nres, complex)
        for j in range(nres):
            f = spec.g[j] * abs(alpha[j]) ** 2
            if j + 1 < ncav:
                f -= spec.g[j] * abs(alpha[j + 1]) ** 2
            beta_new[j] = f / (spec.omega_b[j] - 0.5j * spec.gamma[j])
        alpha_new = np.zeros(ncav, complex)
        two_re_beta = 2.0 * beta_new.real
        for j in range(ncav):
            dp = spec.delta_a[j]
            if j >= 1 and j - 1 < nres:
                dp += spec.g[j - 1] * two_re_beta[j - 1]
            if j < nres:
                dp -= spec.g[j] * two_re_beta[j]
            alpha_new[j] = -1j * omegas[j] / (1j * dp + 0.5 * spec.kappa[j])
        change = np.max(np.abs(alpha_new - alpha) / (1.0 + np.abs(alpha_new)))
        if nres:
            change = max(change, np.max(np.abs(beta_new - beta) / (1.0 + np.abs(beta_new))))
        alpha = (1.0 - damping) * alpha + damping * alpha_new
        beta = (1.0 - damping) * beta + damping * beta_new
        if change < tol:
            state = MeanFieldState(t=0.0, alpha=alpha, beta=beta)
            res = normalized_residual(spec, state)
            return SteadyStateReport(state=state, method=SteadyStateMethod.FIXED_POINT,
                                     residual=res, iterations_or_time=float(it))
    raise SteadyStateError(
        f"fixed-point iteration still changing by {change:.3e} after {max_iter} iterations; "
        f"try a smaller damping than {damping}", residual=float(change))


@dataclass(frozen=True)
class CouplingEquality:
    """Calibration target |J_bond_a| = |J_bond_b| (0-based bond indices into
    EffectiveChain.couplings)."""

    bond_a: int
    bond_b: int


def _bond_magnitudes(spec, solver_kwargs):
    from .model import effective_chain  # local import to keep module load light
    report = find_steady_state_fixed_point(spec, **solver_kwargs)
    chain = effective_chain(spec, report.state)
    return np.abs(chain.couplings)


def calibrate_g(spec, adjustable_index, target, tol=1e-5, scan_range=(0.5, 3.0),
                n_scan=13, max_iter=60, damping=0.2, solver_tol=1e-12):
    """Adjust g[adjustable_index] until the steady state satisfies the
    coupling-magnitude equality ``target``.

    Secant root-finding on f(g) = |J_a| - |J_b|, evaluated at the
    self-consistent (fixed-point) steady state; the root is first bracketed
    by scanning ``scan_range`` (relative to the starting g).  Succeeds when
    |f| < tol * |J_b|.

    Returns a new LatticeSpec with the calibrated coupling.
    """
    if spec.topology != CELL_CHAIN:
        raise SpecError("calibrate_g is defined for cell-chain topologies")
    if not (0 <= adjustable_index < len(spec.g)):
        raise CalibrationError(f"adjustable_index {adjustable_index} out of range for g of "
                               f"length {len(spec.g)}")
    n_bonds = 2 * spec.n - 1
    for b in (target.bond_a, target.bond_b):
        if not (0 <= b < n_bonds):
            raise CalibrationError(f"target bond index {b} out of range for {n_bonds} bonds")
    solver_kwargs = {"tol": solver_tol, "damping": damping}
    g_ref = spec.g[adjustable_index]

    def f(g_val):
        mags = _bond_magnitudes(spec.with_g(adjustable_index, g_val), solver_kwargs)
        return mags[target.bond_a] - mags[target.bond_b], mags[target.bond_b]

    f0, scale0 = f(g_ref)
    if abs(f0) < tol * scale0:
        return spec  # already calibrated at the starting coupling

    grid = np.geomspace(scan_range[0] * g_ref, scan_range[1] * g_ref, n_scan)
    vals = []
    lo = hi = None
    prev_g, (prev_f, _) = grid[0], f(grid[0])
    vals.append((grid[0], prev_f))
    for g_val in grid[1:]:
        cur_f, _ = f(g_val)
        vals.append((g_val, cur_f))
        if prev_f == 0.0 or prev_f * cur_f < 0:
            lo, hi = prev_g, g_val
            f_lo, f_hi = prev_f, cur_f
            break
        prev_g, prev_f = g_val, cur_f
    if lo is None:
        table = ", ".join(f"g={gv:.4e}: f={fv:+.4e}" for gv, fv in vals)
        raise CalibrationError(
            f"no sign change of |J_{target.bond_a}|-|J_{target.bond_b}| while scanning "
            f"g[{adjustable_index}] over [{grid[0]:.3e}, {grid[-1]:.3e}]: {table}")

    x0, x1, fx0, fx1 = lo, hi, f_lo, f_hi
    for _ in range(max_iter):
        if fx1 == fx0:
            x2 = 0.5 * (lo + hi)
        else:
            x2 = x1 - fx1 * (x1 - x0) / (fx1 - fx0)
            if not (lo < x2 < hi):
                x2 = 0.5 * (lo + hi)  # secant left the bracket; bisect instead
        fx2, scale = f(x2)
        if abs(fx2) < tol * scale:
            return spec.with_g(adjustable_index, x2)
        if f_lo * fx2 < 0:
            hi = x2
        else:
            lo, f_lo = x2, fx2
        x0, fx0, x1, fx1 = x1, fx1, x2, fx2
    raise CalibrationError(
        f"secant refinement did not reach |f| < {tol:.1e}*|J_b| within {max_iter} iterations "
        f"(bracket [{lo:.6e}, {hi:.6e}], last |f|={abs(fx2):.3e})")


def trajectory_to_csv(traj, path):
    """Write `t, re_alpha_j, im_alpha_j, ..., re_beta_j, im_beta_j, ...` with
    the absolute values appended, 17 significant digits."""
    ncav = traj.alpha.shape[1]
    nres = traj.beta.shape[1]
    cols = ["t"]
    cols += [f"{p}_alpha_{j + 1}" for j in range(ncav) for p in ("re", "im")]
    cols += [f"{p}_beta_{j + 1}" for j in range(nres) for p in ("re", "im")]
    cols += [f"abs_alpha_{j + 1}" for j in range(ncav)]
    cols += [f"abs_beta_{j + 1}" for j in range(nres)]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(traj)):
            row = [traj.times[i]]
            for j in range(ncav):
                row += [traj.alpha[i, j].real, traj.alpha[i, j].imag]
            for j in range(nres):
                row += [traj.beta[i, j].real, traj.beta[i, j].imag]
            row += [abs(traj.alpha[i, j]) for j in range(ncav)]
            row += [abs(traj.beta[i, j]) for j in range(nres)]
            fh.write(",".join(format(x, ".17g") for x in row) + "\n")
