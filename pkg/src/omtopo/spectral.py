"""Diagonalization and localization diagnostics for effective chains.

The eigensolver is a cyclic Jacobi iteration with complex rotations,
adequate and robust for the small (<= ~64 site) Hermitian matrices this
package produces, and bit-deterministic for identical input.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SpectrumResult",
    "eigh",
    "gap_states",
    "edge_weight",
    "ipr",
    "gauge_fix",
    "spectrum_to_csv",
    "distribution_to_csv",
]


@dataclass(frozen=True)
class SpectrumResult:
    """Real eigenvalues sorted ascending with matching orthonormal
    eigenvector columns; gap_state_indices marks the eigenvalues nearest
    zero (two for even dimension, one for odd)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap_state_indices: tuple

    @property
    def dim(self):
        return len(self.eigenvalues)

    def residuals(self, h):
        """Per-eigenpair 2-norm residual ||H v - lambda v||."""
        r = h @ self.eigenvectors - self.eigenvectors * self.eigenvalues[None, :]
        return np.linalg.norm(r, axis=0)


def _jacobi_rotate(a, v, p, q):
    """Zero a[p, q] (and a[q, p]) with a complex plane rotation, accumulating
    the transform into v."""
    b = a[p, q]
    absb = abs(b)
    eiphi = b / absb
    tau = (a[q, q].real - a[p, p].real) / (2.0 * absb)
    if tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    se = s * eiphi
    # columns: (AU)[:,p] = c A[:,p] - conj(se) A[:,q];  (AU)[:,q] = se A[:,p] + c A[:,q]
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - np.conj(se) * col_q
    a[:, q] = se * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - se * row_q
    a[q, :] = np.conj(se) * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    vcol_p = v[:, p].copy()
    vcol_q = v[:, q].copy()
    v[:, p] = c * vcol_p - np.conj(se) * vcol_q
    v[:, q] = se * vcol_p + c * vcol_q


def eigh(h, hermiticity_tol=1e-12, max_sweeps=100):
    """Full spectrum of a Hermitian matrix via cyclic Jacobi.

    Parameters
    ----------
    h : (M, M) array_like
        Hermitian within ``hermiticity_tol * (1 + max|H|)``.

    Returns
    -------
    SpectrumResult
        Eigenvalues ascending; eigenvector columns orthonormal, each with
        its largest-magnitude component made real positive.
    """
    a = np.array(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    m = a.shape[0]
    scale = max(1.0, np.abs(a).max())
    herm_dev = np.abs(a - a.conj().T).max()
    if herm_dev > hermiticity_tol * scale:
        raise ValueError(f"matrix is not Hermitian: max |H - H^dag| = {herm_dev:.3e}")
    a = 0.5 * (a + a.conj().T)  # symmetrize roundoff-level asymmetry
    v = np.eye(m, dtype=complex)
    stop = 1e-15 * scale
    if m > 1:
        for _ in range(max_sweeps):
            off = 0.0
            for p in range(m - 1):
                for q in range(p + 1, m):
                    apq = abs(a[p, q])
                    if apq > off:
                        off = apq
                    if apq > stop:
                        _jacobi_rotate(a, v, p, q)
            if off <= stop:
                break
        else:
            raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    eigenvalues = a.diagonal().real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    for k in range(m):
        i = int(np.argmax(np.abs(vectors[:, k])))
        piv = vectors[i, k]
        if abs(piv) > 0:
            vectors[:, k] = vectors[:, k] * (np.conj(piv) / abs(piv))
        vectors[i, k] = abs(vectors[i, k]) + 0.0j  # force exact real pivot
    return SpectrumResult(eigenvalues=eigenvalues, eigenvectors=vectors,
                          gap_state_indices=_nearest_zero_indices(eigenvalues))


def _nearest_zero_indices(eigenvalues):
    m = len(eigenvalues)
    want = 1 if m % 2 else 2
    by_mag = np.argsort(np.abs(eigenvalues), kind="stable")
    return tuple(sorted(int(i) for i in by_mag[:want]))


def gap_states(result, chain):
    """Indices of the gap states: the two eigenvalues nearest zero for an
    even-length chain, the single zero mode for an odd one."""
    if chain.n_sites != result.dim:
        raise ValueError(f"chain has {chain.n_sites} sites but spectrum dimension is {result.dim}")
    return _nearest_zero_indices(result.eigenvalues)


def edge_weight(v, norm_tol=1e-8):
    """Probability weight on the two end sites, |v_1|^2 + |v_M|^2."""
    v = np.asarray(v)
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > norm_tol:
        raise ValueError(f"edge_weight expects a unit vector, got norm {nrm:.12g}")
    return float(abs(v[0]) ** 2 + abs(v[-1]) ** 2)


def ipr(v):
    """Inverse participation ratio sum_i |v_i|^4 (1 = one site, 1/M = uniform)."""
    v = np.asarray(v)
    return float(np.sum(np.abs(v) ** 4))


def gauge_fix(chain):
    """Replace couplings by their magnitudes with the canonical alternating
    sign pattern (-, +, -, ...); the spectrum is unchanged because bond
    phases and signs are removable by per-site gauge transformations."""
    mags = np.abs(chain.couplings)
    signs = np.array([-1.0 if k % 2 == 0 else 1.0 for k in range(len(mags))])
    return replace(chain, couplings=(signs * mags).astype(complex), gauge_fixed=True)


def spectrum_to_csv(result, path):
    with open(path, "w", newline="") as fh:
        fh.write("index,eigenvalue\n")
        for i, lam in enumerate(result.eigenvalues):
            fh.write(f"{i},{format(lam, '.17g')}\n")


def distribution_to_csv(v, path):
    """Site-resolved weights |v_i|^2 of one state (sites 1-based)."""
    v = np.asarray(v)
    with open(path, "w", newline="") as fh:
        fh.write("site,weight\n")
        for i, w in enumerate(np.abs(v) ** 2):
            fh.write(f"{i + 1},{format(float(w), '.17g')}\n")
