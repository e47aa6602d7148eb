"""Lattice model: Hamiltonian construction and initial-state preparation.

The dynamical model is the nearest-neighbor coupled-mode / tight-binding
equation

    i dpsi_j/dz = beta_j psi_j + C_{j,j+1} psi_{j+1} + C_{j,j-1} psi_{j-1}

so the Hamiltonian is real symmetric tridiagonal (plus two corner entries
on a ring). Everything here is immutable and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from . import kernels


class Boundary(Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class DiagConvention(Enum):
    """How the diagonal of H is filled.

    BETA_AS_GIVEN uses the per-site propagation constants beta_j directly.
    MINUS_DEGREE_GAMMA uses -d_j * gamma_bar where d_j is the site degree
    (1 at open-chain edges, 2 in the bulk and everywhere on a ring) and
    gamma_bar is the mean coupling; betas are ignored in that convention.
    A uniform diagonal is a pure gauge phase, so intensity observables do
    not distinguish the two on a ring or deep in the bulk.
    """

    BETA_AS_GIVEN = "beta_as_given"
    MINUS_DEGREE_GAMMA = "minus_degree_gamma"


def _as_float_vector(x, n: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class LatticeSpec:
    """Waveguide lattice: couplings C_{j,j+1}, on-site betas, boundary type.

    ``coupling`` has length n_sites-1 for an open chain; a periodic lattice
    carries one extra entry, C_{n-1,0}, stored at index n_sites-1.
    """

    n_sites: int
    coupling: np.ndarray
    beta: np.ndarray
    boundary: Boundary = Boundary.OPEN
    diag_convention: DiagConvention = DiagConvention.BETA_AS_GIVEN

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("n_sites must be >= 2")
        n = self.n_sites
        if self.boundary is Boundary.PERIODIC:
            if n < 3:
                raise ValueError("periodic boundary needs n_sites >= 3")
            n_bonds = n
        else:
            n_bonds = n - 1
        coupling = _as_float_vector(self.coupling, n_bonds, "coupling")
        if np.any(coupling <= 0.0):
            raise ValueError("all couplings must be > 0")
        beta = _as_float_vector(self.beta, n, "beta")
        coupling.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "beta", beta)

    @property
    def mean_coupling(self) -> float:
        return float(np.mean(self.coupling))


def uniform_lattice(
    n_sites: int,
    coupling: float = 1.0,
    boundary: Boundary = Boundary.OPEN,
    diag_convention: DiagConvention = DiagConvention.BETA_AS_GIVEN,
) -> LatticeSpec:
    """Clean lattice: identical couplings, beta = 0 everywhere."""
    n_bonds = n_sites if boundary is Boundary.PERIODIC else n_sites - 1
    return LatticeSpec(
        n_sites=n_sites,
        coupling=np.full(n_bonds, float(coupling)),
        beta=np.zeros(n_sites),
        boundary=boundary,
        diag_convention=diag_convention,
    )


@dataclass(frozen=True)
class Hamiltonian:
    """Real symmetric tridiagonal operator; ``corner`` is H_{0,n-1} (0 if open)."""

    diag: np.ndarray
    offdiag: np.ndarray
    corner: float = 0.0

    def __post_init__(self):
        n = self.diag.shape[0]
        if self.offdiag.shape != (n - 1,):
            raise ValueError("offdiag must have length n_sites - 1")
        for name in ("diag", "offdiag"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_sites(self) -> int:
        return self.diag.shape[0]

    @property
    def is_periodic(self) -> bool:
        return self.corner != 0.0

    def dense(self) -> np.ndarray:
        h = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        if self.corner != 0.0:
            h[0, -1] = h[-1, 0] = self.corner
        return h


def build_hamiltonian(spec: LatticeSpec) -> Hamiltonian:
    """H realizing the coupled-mode equation for this lattice."""
    n = spec.n_sites
    if spec.diag_convention is DiagConvention.MINUS_DEGREE_GAMMA:
        gamma_bar = spec.mean_coupling
        degree = np.full(n, 2.0)
        if spec.boundary is Boundary.OPEN:
            degree[0] = degree[-1] = 1.0
        diag = -degree * gamma_bar
    else:
        diag = spec.beta.copy()
    offdiag = spec.coupling[: n - 1].copy()
    corner = float(spec.coupling[n - 1]) if spec.boundary is Boundary.PERIODIC else 0.0
    return Hamiltonian(diag=diag, offdiag=offdiag, corner=corner)


@dataclass(frozen=True)
class WaveFunction:
    """Complex site amplitudes, unit norm within ``norm_tol`` at construction."""

    amps: np.ndarray
    norm_tol: float = field(default=1e-12, repr=False, compare=False)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        nrm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
        if abs(nrm - 1.0) > self.norm_tol:
            raise ValueError(f"state norm {nrm!r} deviates from 1 beyond {self.norm_tol}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n_sites(self) -> int:
        return self.amps.shape[0]

    def norm_error(self) -> float:
        return abs(float(np.sum(np.abs(self.amps) ** 2)) - 1.0)


# --- initial-state descriptions ---------------------------------------------


@dataclass(frozen=True)
class SingleSite:
    j0: int


@dataclass(frozen=True)
class TwoSite:
    j0: int
    j1: int
    relative_phase: float = 0.0


@dataclass(frozen=True)
class GaussianBeam:
    center: float
    width_sites: float
    tilt_phase_per_site: float = 0.0


InitialState = Union[SingleSite, TwoSite, GaussianBeam]


def _check_site(j, n_sites: int, name: str) -> None:
    if not 0 <= j < n_sites:
        raise ValueError(f"{name}={j} outside lattice [0, {n_sites})")


def make_initial_state(spec: InitialState, n_sites: int) -> WaveFunction:
    """Normalized launch state: single waveguide, adjacent pair, or a Gaussian beam."""
    amps = np.zeros(n_sites, dtype=np.complex128)
    if isinstance(spec, SingleSite):
        _check_site(spec.j0, n_sites, "j0")
        amps[spec.j0] = 1.0
    elif isinstance(spec, TwoSite):
        _check_site(spec.j0, n_sites, "j0")
        _check_site(spec.j1, n_sites, "j1")
        if spec.j0 == spec.j1:
            raise ValueError("TwoSite needs two distinct sites")
        amps[spec.j0] = 1.0 / math.sqrt(2.0)
        amps[spec.j1] = np.exp(1j * spec.relative_phase) / math.sqrt(2.0)
    elif isinstance(spec, GaussianBeam):
        if spec.width_sites <= 0.0:
            raise ValueError("width_sites must be > 0")
        _check_site(int(round(spec.center)), n_sites, "center")
        j = np.arange(n_sites)
        envelope = np.exp(-((j - spec.center) ** 2) / (2.0 * spec.width_sites**2))
        amps = envelope * np.exp(1j * spec.tilt_phase_per_site * j)
        amps /= math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    else:
        raise TypeError(f"unknown initial-state spec: {spec!r}")
    return WaveFunction(amps)


def apply_hamiltonian(h: Hamiltonian, psi) -> np.ndarray:
    """H @ psi for a WaveFunction or bare complex vector."""
    x = psi.amps if isinstance(psi, WaveFunction) else np.asarray(psi, dtype=np.complex128)
    if x.shape != (h.n_sites,):
        raise ValueError(f"state length {x.shape} does not match lattice size {h.n_sites}")
    return kernels.tridiag_matvec(h.diag, h.offdiag, h.corner, np.ascontiguousarray(x))
