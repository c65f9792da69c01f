"""Lattice definition and the effective tight-binding chain.

A chain of laser-driven optical cavities, each coupled by radiation pressure
to one or two mechanical resonators.  Two layouts are supported:

* ``cell`` -- N unit cells, sites ordered a1, b1, a2, b2, ..., aN, bN
  (2N sites; every cavity owns a resonator).
* ``odd``  -- N cavities and N-1 resonators, a1, b1, ..., b_{N-1}, aN
  (2N-1 sites; the chain starts and ends on a cavity).

Resonator j sits between cavity j and cavity j+1: it couples to its left
cavity with strength -g_j and to its right cavity (when present) with +g_j.
All frequencies are expressed in units of the resonator frequency
(omega_b = 1).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "CELL_CHAIN",
    "ODD_CHAIN",
    "DriveProtocol",
    "LatticeSpec",
    "MeanFieldState",
    "EffectiveChain",
    "PhaseClass",
    "SpecError",
    "validate_spec",
    "effective_chain",
    "build_hamiltonian",
    "classify_phase",
    "spec_to_json",
    "spec_from_json",
]

CELL_CHAIN = "cell"
ODD_CHAIN = "odd"


class SpecError(ValueError):
    """Raised when a lattice specification violates its invariants."""


class PhaseClass(enum.Enum):
    NONTRIVIAL = "nontrivial"
    CRITICAL = "critical"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class DriveProtocol:
    """Laser drive amplitude law for one cavity.

    ``constant``: Omega(t) = base.
    ``cosine``:   Omega(t) = base * (1 + sign * cos(nu * t)).

    ``phase`` multiplies the amplitude by exp(i*phase); it exists so a
    common laser phase can be rotated without touching the real base
    amplitude.
    """

    kind: str
    base: float
    sign: int = 1
    nu: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "cosine"):
            raise SpecError(f"drive kind must be 'constant' or 'cosine', got {self.kind!r}")
        if not (self.base > 0) or not math.isfinite(self.base):
            raise SpecError(f"drive base amplitude must be positive and finite, got {self.base}")
        if self.kind == "cosine":
            if self.sign not in (-1, 1):
                raise SpecError(f"cosine drive sign must be +1 or -1, got {self.sign}")
            if not (self.nu > 0):
                raise SpecError(f"cosine drive modulation frequency must be positive, got {self.nu}")

    @classmethod
    def constant(cls, amplitude, phase=0.0):
        return cls(kind="constant", base=float(amplitude), phase=float(phase))

    @classmethod
    def cosine(cls, base, sign, nu, phase=0.0):
        return cls(kind="cosine", base=float(base), sign=int(sign), nu=float(nu), phase=float(phase))

    def amplitude(self, t):
        """Complex drive amplitude Omega(t)."""
        if self.kind == "constant":
            val = self.base
        else:
            val = self.base * (1.0 + self.sign * math.cos(self.nu * t))
        if self.phase:
            return val * complex(math.cos(self.phase), math.sin(self.phase))
        return complex(val)


@dataclass(frozen=True)
class LatticeSpec:
    """Static physical parameters of the optomechanical chain.

    Parameters
    ----------
    topology : str
        ``"cell"`` or ``"odd"`` (see module docstring).
    n : int
        Number of unit cells (``cell``) or number of cavities (``odd``).
    delta_a : tuple of float
        Bare cavity detunings, one per cavity (units omega_b).
    omega_b : tuple of float
        Resonator frequencies, one per resonator (units omega_b).
    g : tuple of float
        Single-photon optomechanical couplings, one per resonator.
    kappa : tuple of float
        Cavity decay rates, one per cavity.
    gamma : tuple of float
        Resonator damping rates, one per resonator.
    drive : tuple of DriveProtocol
        Laser drive for each cavity.
    """

    topology: str
    n: int
    delta_a: tuple
    omega_b: tuple
    g: tuple
    kappa: tuple
    gamma: tuple
    drive: tuple

    def __post_init__(self):
        if self.topology not in (CELL_CHAIN, ODD_CHAIN):
            raise SpecError(f"topology must be 'cell' or 'odd', got {self.topology!r}")
        if self.n < 1 or (self.topology == ODD_CHAIN and self.n < 2):
            raise SpecError(f"chain too short for topology {self.topology!r}: n={self.n}")
        object.__setattr__(self, "delta_a", tuple(float(x) for x in self.delta_a))
        object.__setattr__(self, "omega_b", tuple(float(x) for x in self.omega_b))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        object.__setattr__(self, "kappa", tuple(float(x) for x in self.kappa))
        object.__setattr__(self, "gamma", tuple(float(x) for x in self.gamma))
        object.__setattr__(self, "drive", tuple(self.drive))
        ncav, nres = self.n_cavities, self.n_resonators
        for name, seq, want in (
            ("delta_a", self.delta_a, ncav),
            ("omega_b", self.omega_b, nres),
            ("g", self.g, nres),
            ("kappa", self.kappa, ncav),
            ("gamma", self.gamma, nres),
            ("drive", self.drive, ncav),
        ):
            if len(seq) != want:
                raise SpecError(
                    f"field '{name}' has length {len(seq)}, expected {want} for "
                    f"{self.topology} chain with n={self.n}"
                )
        for name, seq in (("delta_a", self.delta_a), ("omega_b", self.omega_b),
                          ("g", self.g), ("kappa", self.kappa), ("gamma", self.gamma)):
            if not all(math.isfinite(x) for x in seq):
                raise SpecError(f"field '{name}' contains a non-finite entry: {seq}")
        if any(x <= 0 for x in self.g):
            raise SpecError(f"field 'g' must be strictly positive, got {self.g}")
        if any(x <= 0 for x in self.omega_b):
            raise SpecError(f"field 'omega_b' must be strictly positive, got {self.omega_b}")
        if any(x < 0 for x in self.kappa):
            raise SpecError(f"field 'kappa' must be non-negative, got {self.kappa}")
        if any(x < 0 for x in self.gamma):
            raise SpecError(f"field 'gamma' must be non-negative, got {self.gamma}")
        for d in self.drive:
            if not isinstance(d, DriveProtocol):
                raise SpecError(f"field 'drive' must contain DriveProtocol entries, got {type(d)}")

    @property
    def n_cavities(self):
        return self.n

    @property
    def n_resonators(self):
        return self.n if self.topology == CELL_CHAIN else self.n - 1

    @property
    def n_sites(self):
        return self.n_cavities + self.n_resonators

    @property
    def site_labels(self):
        """Chain-ordered site names, e.g. ('a1', 'b1', 'a2', ...)."""
        labels = []
        for j in range(self.n_cavities):
            labels.append(f"a{j + 1}")
            if j < self.n_resonators:
                labels.append(f"b{j + 1}")
        return tuple(labels)

    def with_g(self, index, value):
        """Copy of the spec with g[index] replaced."""
        g = list(self.g)
        g[index] = float(value)
        return replace(self, g=tuple(g))


def validate_spec(spec):
    """Return ``spec`` unchanged if all invariants hold (they are enforced at
    construction; this re-runs the checks, e.g. after deserialization)."""
    if not isinstance(spec, LatticeSpec):
        raise SpecError(f"expected LatticeSpec, got {type(spec)}")
    LatticeSpec(**{k: getattr(spec, k) for k in
                   ("topology", "n", "delta_a", "omega_b", "g", "kappa", "gamma", "drive")})
    return spec


@dataclass(frozen=True)
class MeanFieldState:
    """Complex cavity amplitudes alpha and resonator amplitudes beta at time t."""

    t: float
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=complex))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=complex))
        if not (np.all(np.isfinite(self.alpha.view(float))) and np.all(np.isfinite(self.beta.view(float)))):
            raise ValueError("mean-field amplitudes must be finite (divergence is an error, not a state)")

    @classmethod
    def vacuum(cls, spec, t=0.0):
        return cls(t=t, alpha=np.zeros(spec.n_cavities, complex), beta=np.zeros(spec.n_resonators, complex))

    def check_dims(self, spec):
        if len(self.alpha) != spec.n_cavities or len(self.beta) != spec.n_resonators:
            raise SpecError(
                f"state dims ({len(self.alpha)} cavities, {len(self.beta)} resonators) do not "
                f"match spec ({spec.n_cavities}, {spec.n_resonators})"
            )
        return self


@dataclass(frozen=True)
class EffectiveChain:
    """Nearest-neighbour bond couplings of the effective tight-binding chain.

    ``couplings[k]`` is the bond between chain sites k and k+1.  Bonds
    alternate cavity-resonator (intra-cell, -g_j * alpha_j) and
    resonator-cavity (inter-cell, +g_j * alpha_{j+1}).
    """

    couplings: np.ndarray
    site_labels: tuple
    gauge_fixed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "couplings", np.asarray(self.couplings, dtype=complex))
        object.__setattr__(self, "site_labels", tuple(self.site_labels))
        if len(self.couplings) != len(self.site_labels) - 1:
            raise SpecError(
                f"{len(self.site_labels)} sites require {len(self.site_labels) - 1} bonds, "
                f"got {len(self.couplings)}"
            )

    @property
    def n_sites(self):
        return len(self.site_labels)

    def intra_couplings(self):
        """Cavity-resonator bonds (1st, 3rd, ... bond)."""
        return self.couplings[0::2]

    def inter_couplings(self):
        """Resonator-cavity bonds (2nd, 4th, ... bond)."""
        return self.couplings[1::2]


def effective_chain(spec, state):
    """Extract the effective chain couplings from a mean-field state.

    Resonator j gives an intra bond -g_j*alpha_j to its left cavity and, if a
    right cavity exists, an inter bond +g_j*alpha_{j+1}.
    """
    state.check_dims(spec)
    bonds = []
    for j in range(spec.n_resonators):
        bonds.append(-spec.g[j] * state.alpha[j])
        if j + 1 < spec.n_cavities:
            bonds.append(+spec.g[j] * state.alpha[j + 1])
    return EffectiveChain(couplings=np.array(bonds, complex), site_labels=spec.site_labels)


def build_hamiltonian(chain):
    """Tridiagonal Hermitian matrix of the chain: H[i, i+1] = J_{i+1},
    H[i+1, i] = conj(J_{i+1}), zero diagonal."""
    if chain.n_sites < 2:
        raise SpecError("chain must have at least one bond")
    m = chain.n_sites
    h = np.zeros((m, m), complex)
    for i, j in enumerate(chain.couplings):
        h[i, i + 1] = j
        h[i + 1, i] = np.conj(j)
    return h


def classify_phase(chain, rel_tol=0.02):
    """SSH phase from the ratio r = mean|J_intra| / mean|J_inter|.

    Nontrivial for r < 1 - rel_tol, Trivial for r > 1 + rel_tol, Critical in
    between.  Defined only for even site count (full unit cells) with at
    least one inter-cell bond; signs and phases of the couplings are gauge
    data and ignored.
    """
    if chain.n_sites % 2 != 0:
        raise SpecError("phase classification is defined only for even site count (full unit cells)")
    intra = np.abs(chain.intra_couplings())
    inter = np.abs(chain.inter_couplings())
    if len(inter) == 0:
        raise SpecError("phase classification needs at least one inter-cell bond (n >= 2 cells)")
    r = np.mean(intra) / np.mean(inter)
    if r < 1.0 - rel_tol:
        return PhaseClass.NONTRIVIAL
    if r > 1.0 + rel_tol:
        return PhaseClass.TRIVIAL
    return PhaseClass.CRITICAL


# --- JSON serialization ----------------------------------------------------

_SPEC_KEYS = {"topology", "n", "delta_a", "omega_b", "g", "kappa", "gamma", "drive"}
_DRIVE_KEYS = {"kind", "base", "sign", "nu", "phase"}


def _drive_to_dict(d):
    out = {"kind": d.kind, "base": d.base}
    if d.kind == "cosine":
        out["sign"] = d.sign
        out["nu"] = d.nu
    if d.phase:
        out["phase"] = d.phase
    return out


def _drive_from_dict(obj, where):
    unknown = set(obj) - _DRIVE_KEYS
    if unknown:
        raise SpecError(f"unknown key '{where}.{sorted(unknown)[0]}' in drive protocol")
    if "kind" not in obj or "base" not in obj:
        raise SpecError(f"drive protocol at '{where}' needs 'kind' and 'base'")
    return DriveProtocol(kind=obj["kind"], base=obj["base"], sign=obj.get("sign", 1),
                         nu=obj.get("nu", 0.0), phase=obj.get("phase", 0.0))


def spec_to_dict(spec):
    return {
        "topology": spec.topology,
        "n": spec.n,
        "delta_a": list(spec.delta_a),
        "omega_b": list(spec.omega_b),
        "g": list(spec.g),
        "kappa": list(spec.kappa),
        "gamma": list(spec.gamma),
        "drive": [_drive_to_dict(d) for d in spec.drive],
    }


def spec_from_dict(obj, where="spec"):
    if not isinstance(obj, dict):
        raise SpecError(f"'{where}' must be a JSON object")
    unknown = set(obj) - _SPEC_KEYS
    if unknown:
        raise SpecError(f"unknown key '{where}.{sorted(unknown)[0]}'")
    missing = _SPEC_KEYS - set(obj)
    if missing:
        raise SpecError(f"'{where}' is missing key '{sorted(missing)[0]}'")
    drives = tuple(_drive_from_dict(d, f"{where}.drive[{i}]") for i, d in enumerate(obj["drive"]))
    return LatticeSpec(topology=obj["topology"], n=obj["n"], delta_a=obj["delta_a"],
                       omega_b=obj["omega_b"], g=obj["g"], kappa=obj["kappa"],
                       gamma=obj["gamma"], drive=drives)


def spec_to_json(spec, indent=2):
    return json.dumps(spec_to_dict(spec), indent=indent, sort_keys=True)


def spec_from_json(text):
    return spec_from_dict(json.loads(text))
