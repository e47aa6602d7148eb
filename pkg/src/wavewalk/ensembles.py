"""Disorder ensembles and temporal-disorder (dephasing) evolution.

Seeding contract: realization k draws from a generator seeded by
(master_seed, spawn_key=(k,)) — a pure function of the pair, so any subset
of realizations can be reproduced in isolation and results never depend on
scheduling. Accumulation runs over fixed blocks of realizations reduced in
index order, which makes ensemble statistics bit-identical across runs and
across worker counts (workers come from the WAVEWALK_WORKERS environment
variable, defaulting to all cores).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    Boundary,
    Hamiltonian,
    InitialState,
    LatticeSpec,
    WaveFunction,
    build_hamiltonian,
    make_initial_state,
)
from .observables import participation_ratio, spread_variance
from .propagators import Snapshots, ZGrid, decompose, evolve_chebyshev, evolve_eigen

_BLOCK = 64  # realizations per reduction block; fixed so results never depend on workers


def worker_count() -> int:
    """Worker threads for ensemble blocks (WAVEWALK_WORKERS, default all cores)."""
    env = os.environ.get("WAVEWALK_WORKERS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DisorderSpec:
    """Static disorder: couplings C_j = C_j * (1 + w u_j) with u ~ U[-1,1]
    (w < 1 keeps them positive), on-site betas shifted by U[-W/2, W/2]."""

    offdiag_strength: float = 0.0
    diag_strength: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.offdiag_strength < 1.0:
            raise ValueError("offdiag_strength must satisfy 0 <= w < 1")
        if self.diag_strength < 0.0:
            raise ValueError("diag_strength must be >= 0")

    @property
    def is_clean(self) -> bool:
        return self.offdiag_strength == 0.0 and self.diag_strength == 0.0


@dataclass(frozen=True)
class DephasingSpec:
    """Temporal disorder: fresh random site diagonals drawn per z-segment of
    length segment_length, uniform on [-phase_strength/2, +phase_strength/2]."""

    segment_length: float
    phase_strength: float

    def __post_init__(self):
        if self.segment_length <= 0.0:
            raise ValueError("segment_length must be > 0")
        if self.phase_strength < 0.0:
            raise ValueError("phase_strength must be >= 0")


@dataclass(frozen=True)
class SeedPolicy:
    """Deterministic per-realization random streams."""

    master_seed: int

    def stream(self, k: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.master_seed, spawn_key=(k,)))


@dataclass(frozen=True)
class EnsembleStats:
    """Ensemble-averaged intensities and observable traces on a z grid."""

    n_realizations: int
    zgrid: ZGrid
    mean_intensity: np.ndarray  # (nz, n_sites)
    sem_intensity: np.ndarray  # (nz, n_sites), unbiased SEM, 0 for n=1
    variance_trace: np.ndarray  # (nz,) mean over realizations of spread variance
    pr_trace: np.ndarray  # (nz,) mean over realizations of participation ratio

    def __post_init__(self):
        for name in ("mean_intensity", "sem_intensity", "variance_trace", "pr_trace"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        row_sums = np.sum(self.mean_intensity, axis=1)
        worst = float(np.max(np.abs(row_sums - 1.0)))
        if worst > 1e-8:
            raise ValueError(f"mean intensity rows sum off by {worst:.3e} (> 1e-8)")
        if np.any(self.sem_intensity < 0.0):
            raise ValueError("SEM must be nonnegative")


def sample_disordered_lattice(
    base: LatticeSpec, d: DisorderSpec, policy: SeedPolicy, k: int
) -> LatticeSpec:
    """Disorder realization k. Draw order is frozen (couplings, then betas)
    so a realization is a pure function of (master_seed, k)."""
    if d.is_clean:
        return base
    rng = policy.stream(k)
    u_coupling = rng.uniform(-1.0, 1.0, size=base.coupling.shape[0])
    u_beta = rng.uniform(-1.0, 1.0, size=base.n_sites)
    coupling = base.coupling * (1.0 + d.offdiag_strength * u_coupling)
    beta = base.beta + 0.5 * d.diag_strength * u_beta
    return LatticeSpec(
        n_sites=base.n_sites,
        coupling=coupling,
        beta=beta,
        boundary=base.boundary,
        diag_convention=base.diag_convention,
    )


def _trace_rows(intensities: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nz = intensities.shape[0]
    var = np.empty(nz)
    pr = np.empty(nz)
    for i in range(nz):
        var[i] = spread_variance(intensities[i])
        pr[i] = participation_ratio(intensities[i])
    return var, pr


def _block_partials(intensity_fn, k_lo: int, k_hi: int, nz: int, n: int):
    """Sequential accumulation over one block of realizations."""
    s = np.zeros((nz, n))
    s2 = np.zeros((nz, n))
    var_sum = np.zeros(nz)
    pr_sum = np.zeros(nz)
    for k in range(k_lo, k_hi):
        inten = intensity_fn(k)
        s += inten
        s2 += inten * inten
        var_k, pr_k = _trace_rows(inten)
        var_sum += var_k
        pr_sum += pr_k
    return s, s2, var_sum, pr_sum


def _reduce_ensemble(intensity_fn, zgrid: ZGrid, n_realizations: int, n: int) -> EnsembleStats:
    nz = len(zgrid)
    blocks = [(lo, min(lo + _BLOCK, n_realizations)) for lo in range(0, n_realizations, _BLOCK)]
    workers = min(worker_count(), len(blocks))
    if workers <= 1:
        partials = [_block_partials(intensity_fn, lo, hi, nz, n) for lo, hi in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(
                pool.map(lambda b: _block_partials(intensity_fn, b[0], b[1], nz, n), blocks)
            )
    # fixed-order reduction over blocks: identical result for any worker count
    s = np.zeros((nz, n))
    s2 = np.zeros((nz, n))
    var_sum = np.zeros(nz)
    pr_sum = np.zeros(nz)
    for bs, bs2, bv, bp in partials:
        s += bs
        s2 += bs2
        var_sum += bv
        pr_sum += bp
    nr = float(n_realizations)
    mean = s / nr
    if n_realizations > 1:
        var_unbiased = np.maximum(s2 - nr * mean * mean, 0.0) / (nr - 1.0)
        sem = np.sqrt(var_unbiased / nr)
    else:
        sem = np.zeros((nz, n))
    return EnsembleStats(
        n_realizations=n_realizations,
        zgrid=zgrid,
        mean_intensity=mean,
        sem_intensity=sem,
        variance_trace=var_sum / nr,
        pr_trace=pr_sum / nr,
    )


def run_ensemble(
    base: LatticeSpec,
    d: DisorderSpec,
    init: InitialState,
    zgrid: ZGrid,
    n_realizations: int,
    master_seed: int,
    method: str = "eigen",
    tol: float = 1e-12,
) -> EnsembleStats:
    """Evolve n_realizations disorder samples and accumulate statistics."""
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    if method not in ("eigen", "chebyshev"):
        raise ValueError(f"unknown propagation method {method!r}")
    psi0 = make_initial_state(init, base.n_sites)
    policy = SeedPolicy(master_seed)

    def intensity_fn(k: int) -> np.ndarray:
        spec_k = sample_disordered_lattice(base, d, policy, k)
        h = build_hamiltonian(spec_k)
        if method == "eigen":
            snap = evolve_eigen(h, psi0, zgrid)
        else:
            snap = evolve_chebyshev(h, psi0, zgrid, tol=tol)
        return snap.intensities()

    return _reduce_ensemble(intensity_fn, zgrid, n_realizations, base.n_sites)


def _dephasing_realization(
    h0: Hamiltonian,
    psi0: WaveFunction,
    zgrid: ZGrid,
    deph: DephasingSpec,
    policy: SeedPolicy,
    k: int,
    n_segments: int,
) -> np.ndarray:
    """One noise history: piecewise-constant random diagonals, unitary per segment."""
    n = h0.n_sites
    rng = policy.stream(k)
    w = deph.phase_strength
    noise = rng.uniform(-0.5 * w, 0.5 * w, size=(n_segments, n))
    zvals = zgrid.values
    nz = zvals.size
    out = np.empty((nz, n))
    gi = 0
    if zvals[0] == 0.0:
        out[0] = np.abs(psi0.amps) ** 2
        gi = 1
    psi = psi0.amps.copy()
    dz = deph.segment_length
    for s in range(n_segments):
        z_start = s * dz
        z_end = (s + 1) * dz
        h_s = Hamiltonian(diag=h0.diag + noise[s], offdiag=h0.offdiag, corner=h0.corner)
        dec = decompose(h_s)
        v = dec.eigenvectors
        coeff = v.T @ psi
        while gi < nz and zvals[gi] <= z_end + 1e-9 * max(1.0, z_end):
            amp = v @ (np.exp(-1j * dec.eigenvalues * (zvals[gi] - z_start)) * coeff)
            out[gi] = np.abs(amp) ** 2
            gi += 1
        psi = v @ (np.exp(-1j * dec.eigenvalues * dz) * coeff)
    if gi < nz:
        raise ValueError("zgrid extends past the final noise segment")
    return out


def evolve_dephasing(
    base: LatticeSpec,
    deph: DephasingSpec,
    init: InitialState,
    zgrid: ZGrid,
    n_realizations: int,
    master_seed: int,
) -> EnsembleStats:
    """Ensemble of temporal-disorder histories (piecewise-constant diagonal noise).

    phase_strength = 0 short-circuits to a single clean unitary evolution, so
    the no-noise control matches the clean lattice exactly.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    zmax = float(zgrid.values[-1])
    n_segments = int(round(zmax / deph.segment_length))
    if n_segments < 1 or abs(n_segments * deph.segment_length - zmax) > 1e-9 * max(1.0, zmax):
        raise ValueError("zgrid max must be a whole number of noise segments")
    h0 = build_hamiltonian(base)
    psi0 = make_initial_state(init, base.n_sites)
    if deph.phase_strength == 0.0:
        snap = evolve_eigen(h0, psi0, zgrid)
        inten = snap.intensities()
        var, pr = _trace_rows(inten)
        return EnsembleStats(
            n_realizations=n_realizations,
            zgrid=zgrid,
            mean_intensity=inten,
            sem_intensity=np.zeros_like(inten),
            variance_trace=var,
            pr_trace=pr,
        )
    policy = SeedPolicy(master_seed)

    def intensity_fn(k: int) -> np.ndarray:
        return _dephasing_realization(h0, psi0, zgrid, deph, policy, k, n_segments)

    return _reduce_ensemble(intensity_fn, zgrid, n_realizations, base.n_sites)
