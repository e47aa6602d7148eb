"""Disorder sampling, deterministic ensembles, dephasing."""

import numpy as np
import pytest

from wavewalk import (
    DephasingSpec,
    DisorderSpec,
    SeedPolicy,
    SingleSite,
    ZGrid,
    build_hamiltonian,
    evolve_dephasing,
    evolve_eigen,
    make_initial_state,
    participation_ratio,
    run_ensemble,
    sample_disordered_lattice,
    uniform_lattice,
)
from wavewalk.ensembles import _dephasing_realization


BASE = uniform_lattice(99)
POLICY = SeedPolicy(424242)


def test_clean_disorder_is_identity():
    d = DisorderSpec(0.0, 0.0)
    assert sample_disordered_lattice(BASE, d, POLICY, 0) is BASE


def test_disorder_spec_validation():
    with pytest.raises(ValueError):
        DisorderSpec(offdiag_strength=1.0)
    with pytest.raises(ValueError):
        DisorderSpec(offdiag_strength=-0.1)
    with pytest.raises(ValueError):
        DisorderSpec(diag_strength=-1.0)


def test_realization_is_deterministic_and_order_free():
    d = DisorderSpec(0.5, 0.3)
    a = sample_disordered_lattice(BASE, d, POLICY, 17)
    b = sample_disordered_lattice(BASE, d, POLICY, 17)  # no state carried between calls
    sample_disordered_lattice(BASE, d, POLICY, 3)  # interleaved draw must not matter
    c = sample_disordered_lattice(BASE, d, POLICY, 17)
    assert np.array_equal(a.coupling, b.coupling) and np.array_equal(a.beta, b.beta)
    assert np.array_equal(a.coupling, c.coupling)


def test_coupling_moments_and_range():
    # 10^4 samples of one bond: mean near C_bar, range within [C/2, 3C/2] for w=0.5
    d = DisorderSpec(0.5, 0.0)
    samples = np.array(
        [sample_disordered_lattice(BASE, d, POLICY, k).coupling[40] for k in range(10_000)]
    )
    assert abs(samples.mean() - 1.0) < 0.01
    assert samples.min() >= 0.5 and samples.max() <= 1.5


def test_diag_disorder_range():
    d = DisorderSpec(0.0, 2.0)
    betas = sample_disordered_lattice(BASE, d, POLICY, 5).beta
    assert np.all(np.abs(betas) <= 1.0)
    assert np.any(betas != 0.0)


def test_single_clean_realization_equals_direct_evolution():
    grid = ZGrid(np.array([0.0, 5.0, 15.0]))
    stats = run_ensemble(BASE, DisorderSpec(0.0, 0.0), SingleSite(49), grid, 1, 7)
    snap = evolve_eigen(build_hamiltonian(BASE), make_initial_state(SingleSite(49), 99), grid)
    assert np.array_equal(stats.mean_intensity, snap.intensities())
    assert np.all(stats.sem_intensity == 0.0)


def test_ensemble_equals_sequential_left_fold():
    # the engine's block reduction must equal a plain in-order accumulation
    grid = ZGrid(np.array([4.0, 11.0]))
    d = DisorderSpec(0.4, 0.0)
    policy = SeedPolicy(99)

    def one(k):
        spec = sample_disordered_lattice(BASE, d, policy, k)
        return evolve_eigen(build_hamiltonian(spec),
                            make_initial_state(SingleSite(49), 99), grid).intensities()

    for n in (3, 6):
        acc = np.zeros((2, 99))
        for k in range(n):
            acc += one(k)
        stats = run_ensemble(BASE, d, SingleSite(49), grid, n, 99)
        assert np.array_equal(stats.mean_intensity, acc / n)


def test_ensemble_reproducible_across_worker_counts(monkeypatch):
    grid = ZGrid(np.array([10.0]))
    d = DisorderSpec(0.5, 0.0)
    results = []
    for workers in ("1", "3", "8"):
        monkeypatch.setenv("WAVEWALK_WORKERS", workers)
        results.append(run_ensemble(BASE, d, SingleSite(49), grid, 130, 5))
    assert np.array_equal(results[0].mean_intensity, results[1].mean_intensity)
    assert np.array_equal(results[0].mean_intensity, results[2].mean_intensity)
    assert np.array_equal(results[0].sem_intensity, results[2].sem_intensity)
    assert np.array_equal(results[0].pr_trace, results[2].pr_trace)


def test_ensemble_mean_pr_suppressed_by_disorder():
    grid = ZGrid(np.array([15.0]))
    clean = evolve_eigen(build_hamiltonian(BASE), make_initial_state(SingleSite(49), 99), grid)
    pr_clean = participation_ratio(clean.intensities()[0])
    stats = run_ensemble(BASE, DisorderSpec(0.3, 0.0), SingleSite(49), grid, 500, 11)
    assert stats.pr_trace[0] < pr_clean


def test_ensemble_stats_invariants():
    grid = ZGrid(np.array([3.0, 9.0]))
    stats = run_ensemble(BASE, DisorderSpec(0.5, 0.0), SingleSite(49), grid, 40, 2)
    assert np.max(np.abs(stats.mean_intensity.sum(axis=1) - 1.0)) < 1e-8
    assert np.all(stats.sem_intensity >= 0.0)
    assert stats.n_realizations == 40


def test_ensemble_rejects_bad_inputs():
    grid = ZGrid(np.array([1.0]))
    with pytest.raises(ValueError):
        run_ensemble(BASE, DisorderSpec(0.1, 0.0), SingleSite(49), grid, 0, 1)
    with pytest.raises(ValueError):
        run_ensemble(BASE, DisorderSpec(0.1, 0.0), SingleSite(49), grid, 2, 1, method="magic")


def test_ensemble_chebyshev_path_agrees_with_eigen():
    grid = ZGrid(np.array([8.0]))
    d = DisorderSpec(0.5, 0.0)
    a = run_ensemble(BASE, d, SingleSite(49), grid, 16, 3, method="eigen")
    b = run_ensemble(BASE, d, SingleSite(49), grid, 16, 3, method="chebyshev", tol=1e-12)
    assert np.max(np.abs(a.mean_intensity - b.mean_intensity)) < 1e-10


# --- dephasing --------------------------------------------------------------


def test_dephasing_spec_validation():
    with pytest.raises(ValueError):
        DephasingSpec(segment_length=0.0, phase_strength=1.0)
    with pytest.raises(ValueError):
        DephasingSpec(segment_length=0.5, phase_strength=-1.0)


def test_zero_dephasing_matches_clean_exactly():
    lat = uniform_lattice(61)
    grid = ZGrid(np.array([0.0, 2.0, 6.0]))
    stats = evolve_dephasing(lat, DephasingSpec(0.5, 0.0), SingleSite(30), grid, 25, 3)
    snap = evolve_eigen(build_hamiltonian(lat), make_initial_state(SingleSite(30), 61), grid)
    assert np.array_equal(stats.mean_intensity, snap.intensities())


def test_dephasing_requires_whole_segments():
    lat = uniform_lattice(31)
    grid = ZGrid(np.array([5.3]))
    with pytest.raises(ValueError):
        evolve_dephasing(lat, DephasingSpec(0.5, 4.0), SingleSite(15), grid, 2, 0)


def test_dephasing_realizations_stay_unit_norm():
    lat = uniform_lattice(61)
    h = build_hamiltonian(lat)
    psi0 = make_initial_state(SingleSite(30), 61)
    grid = ZGrid(np.array([0.0, 1.0, 4.0, 8.0]))
    for k in range(4):
        inten = _dephasing_realization(h, psi0, grid, DephasingSpec(0.25, 8.0), SeedPolicy(5), k, 32)
        assert np.max(np.abs(inten.sum(axis=1) - 1.0)) < 1e-9


def test_dephasing_grid_points_inside_segments():
    # grid values that do not align with segment ends must still be exact:
    # compare against an explicit piecewise reconstruction of the same noise
    lat = uniform_lattice(41)
    h = build_hamiltonian(lat)
    psi0 = make_initial_state(SingleSite(20), 41)
    deph = DephasingSpec(1.0, 6.0)
    grid = ZGrid(np.array([0.3, 1.7, 2.0]))
    k = 2
    inten = _dephasing_realization(h, psi0, grid, deph, SeedPolicy(21), k, 2)

    rng = SeedPolicy(21).stream(k)
    noise = rng.uniform(-3.0, 3.0, size=(2, 41))
    from wavewalk import Hamiltonian

    def seg_evolve(psi, seg, dz):
        hs = Hamiltonian(diag=h.diag + noise[seg], offdiag=h.offdiag, corner=h.corner)
        return evolve_eigen(hs, psi, ZGrid(np.array([dz]))).state(0)

    p1 = seg_evolve(psi0, 0, 0.3)
    p2 = seg_evolve(seg_evolve(psi0, 0, 1.0), 1, 0.7)
    p3 = seg_evolve(seg_evolve(psi0, 0, 1.0), 1, 1.0)
    for row, wf in zip(inten, (p1, p2, p3)):
        assert np.max(np.abs(row - np.abs(wf.amps) ** 2)) < 1e-12


def test_strong_dephasing_slows_spread():
    # sigma^2 under strong temporal noise must fall well below the ballistic clean value
    lat = uniform_lattice(101)
    grid = ZGrid(np.array([10.0]))
    noisy = evolve_dephasing(lat, DephasingSpec(0.25, 12.0), SingleSite(50), grid, 30, 9)
    clean = evolve_dephasing(lat, DephasingSpec(0.25, 0.0), SingleSite(50), grid, 1, 9)
    assert noisy.variance_trace[0] < 0.25 * clean.variance_trace[0]
