"""Compiled fixed-step RK4 core for the mean-field equations.

The state vector is complex128 with the cavity amplitudes first and the
resonator amplitudes appended.  Drives are encoded per cavity as
(kind, base, sign, nu, phase) with kind 0 = constant, 1 = cosine.
Falls back to plain Python when numba is unavailable (slow but identical).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

DIVERGENCE_LIMIT = 1e12

STATUS_OK = 0
STATUS_DIVERGED = 1


@njit(cache=True)
def _drive_re_im(kind, base, sign, nu, phase, t):
    if kind == 0:
        mag = base
    else:
        mag = base * (1.0 + sign * np.cos(nu * t))
    return mag * np.cos(phase), mag * np.sin(phase)


@njit(cache=True)
def _rhs(y, t, ncav, nres, delta, omegab, g, kappa, gamma,
         dkind, dbase, dsign, dnu, dphase, out):
    for j in range(ncav):
        dp = delta[j]
        if j >= 1 and j - 1 < nres:
            dp += g[j - 1] * 2.0 * y[ncav + j - 1].real
        if j < nres:
            dp -= g[j] * 2.0 * y[ncav + j].real
        om_re, om_im = _drive_re_im(dkind[j], dbase[j], dsign[j], dnu[j], dphase[j], t)
        out[j] = -1j * dp * y[j] - 1j * complex(om_re, om_im) - 0.5 * kappa[j] * y[j]
    for j in range(nres):
        f = -g[j] * (y[j].real ** 2 + y[j].imag ** 2)
        if j + 1 < ncav:
            f += g[j] * (y[j + 1].real ** 2 + y[j + 1].imag ** 2)
        out[ncav + j] = -1j * (omegab[j] * y[ncav + j] + f) - 0.5 * gamma[j] * y[ncav + j]


@njit(cache=True)
def rk4_run(y0, t0, h, n_steps, sample_every, ncav, nres, delta, omegab, g,
            kappa, gamma, dkind, dbase, dsign, dnu, dphase):
    """Integrate n_steps of classical RK4, sampling every ``sample_every``
    steps (the initial state and the final step are always stored).

    Returns (samples, sample_times, status, n_stored)."""
    n = ncav + nres
    n_samp = n_steps // sample_every + 2
    out = np.empty((n_samp, n), np.complex128)
    out_t = np.empty(n_samp, np.float64)
    y = y0.copy()
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    yt = np.empty(n, np.complex128)
    out[0] = y
    out_t[0] = t0
    m = 1
    t = t0
    for i in range(n_steps):
        _rhs(y, t, ncav, nres, delta, omegab, g, kappa, gamma,
             dkind, dbase, dsign, dnu, dphase, k1)
        for q in range(n):
            yt[q] = y[q] + 0.5 * h * k1[q]
        _rhs(yt, t + 0.5 * h, ncav, nres, delta, omegab, g, kappa, gamma,
             dkind, dbase, dsign, dnu, dphase, k2)
        for q in range(n):
            yt[q] = y[q] + 0.5 * h * k2[q]
        _rhs(yt, t + 0.5 * h, ncav, nres, delta, omegab, g, kappa, gamma,
             dkind, dbase, dsign, dnu, dphase, k3)
        for q in range(n):
            yt[q] = y[q] + h * k3[q]
        _rhs(yt, t + h, ncav, nres, delta, omegab, g, kappa, gamma,
             dkind, dbase, dsign, dnu, dphase, k4)
        big = 0.0
        for q in range(n):
            y[q] = y[q] + (h / 6.0) * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
            aq = abs(y[q])
            if aq > big:
                big = aq
        t = t0 + (i + 1) * h
        if big > DIVERGENCE_LIMIT or big != big:
            out[m] = y
            out_t[m] = t
            return out, out_t, STATUS_DIVERGED, m + 1
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            out[m] = y
            out_t[m] = t
            m += 1
    return out, out_t, STATUS_OK, m


def drive_arrays(spec):
    """Flatten the spec's drive protocols into kernel parameter arrays."""
    ncav = spec.n_cavities
    dkind = np.zeros(ncav, np.int64)
    dbase = np.zeros(ncav, np.float64)
    dsign = np.zeros(ncav, np.float64)
    dnu = np.zeros(ncav, np.float64)
    dphase = np.zeros(ncav, np.float64)
    for j, d in enumerate(spec.drive):
        dkind[j] = 0 if d.kind == "constant" else 1
        dbase[j] = d.base
        dsign[j] = float(d.sign)
        dnu[j] = d.nu
        dphase[j] = d.phase
    return dkind, dbase, dsign, dnu, dphase


def spec_arrays(spec):
    return (np.asarray(spec.delta_a, float), np.asarray(spec.omega_b, float),
            np.asarray(spec.g, float), np.asarray(spec.kappa, float),
            np.asarray(spec.gamma, float))
