"""Propagator cross-checks: spectral reference, Chebyshev fast path, RK4 oracle."""

import numpy as np
import pytest

from wavewalk import (
    ChebyshevConvergenceError,
    LatticeSpec,
    SingleSite,
    WaveFunction,
    ZGrid,
    bessel_free_state,
    build_hamiltonian,
    decompose,
    evolve_chebyshev,
    evolve_eigen,
    evolve_ode_oracle,
    make_initial_state,
    spectral_bounds,
    uniform_lattice,
)


def _random_spec(n, seed, diag_w=1.0):
    r = np.random.default_rng(seed)
    return LatticeSpec(
        n_sites=n,
        coupling=r.uniform(0.5, 1.5, n - 1),
        beta=r.uniform(-0.5 * diag_w, 0.5 * diag_w, n),
    )


def _random_state(n, seed):
    r = np.random.default_rng(seed)
    v = r.normal(size=n) + 1j * r.normal(size=n)
    return WaveFunction(v / np.linalg.norm(v))


# --- decompose ---------------------------------------------------------------


def test_decompose_two_site():
    dec = decompose(build_hamiltonian(uniform_lattice(2)))
    assert np.allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-14)


def test_decompose_three_site_open():
    dec = decompose(build_hamiltonian(uniform_lattice(3)))
    assert np.allclose(dec.eigenvalues, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-14)


def test_decompose_uniform_chain_closed_form():
    # open-chain spectrum is 2C cos(k pi/(N+1)), k=1..N — computed first as oracle
    n, c = 100, 1.0
    k = np.arange(1, n + 1)
    expected = np.sort(2.0 * c * np.cos(k * np.pi / (n + 1)))
    dec = decompose(build_hamiltonian(uniform_lattice(n, c)))
    assert np.max(np.abs(dec.eigenvalues - expected)) < 1e-12
    assert np.all(np.abs(dec.eigenvalues) <= 2.0 * c + 1e-12)


def test_decompose_invariants():
    h = build_hamiltonian(_random_spec(60, 3))
    dec = decompose(h)
    v, lam = dec.eigenvectors, dec.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    assert np.max(np.abs(h.dense() @ v - v * lam)) < 1e-10 * np.max(np.abs(lam))
    assert np.max(np.abs(v.T @ v - np.eye(60))) < 1e-10


def test_decompose_periodic_uses_corner():
    from wavewalk import Boundary

    h = build_hamiltonian(uniform_lattice(6, boundary=Boundary.PERIODIC))
    dec = decompose(h)
    # ring spectrum: 2C cos(2 pi k / N)
    expected = np.sort(2.0 * np.cos(2.0 * np.pi * np.arange(6) / 6.0))
    assert np.max(np.abs(dec.eigenvalues - expected)) < 1e-12


# --- evolve_eigen ------------------------------------------------------------


def test_eigen_identity_at_z0():
    h = build_hamiltonian(uniform_lattice(11))
    psi0 = make_initial_state(SingleSite(5), 11)
    snap = evolve_eigen(h, psi0, ZGrid(np.array([0.0])))
    assert np.max(np.abs(snap.amps[0] - psi0.amps)) < 1e-14


def test_eigen_two_site_rabi():
    # closed form for the 2x2 swap: |psi_1(z)|^2 = sin^2(Cz), full transfer at z=pi/2
    h = build_hamiltonian(uniform_lattice(2))
    psi0 = make_initial_state(SingleSite(0), 2)
    snap = evolve_eigen(h, psi0, ZGrid(np.array([np.pi / 2.0])))
    assert abs(np.abs(snap.amps[0, 1]) ** 2 - 1.0) < 1e-10


def test_eigen_matches_bessel_oracle():
    n, z = 101, 5.0
    ref = bessel_free_state(50, 1.0, z, n)  # oracle first
    h = build_hamiltonian(uniform_lattice(n))
    snap = evolve_eigen(h, make_initial_state(SingleSite(50), n), ZGrid(np.array([z])))
    assert np.max(np.abs(snap.amps[0] - ref.amps)) < 1e-8


def test_eigen_dimension_mismatch():
    h = build_hamiltonian(uniform_lattice(5))
    with pytest.raises(ValueError):
        evolve_eigen(h, make_initial_state(SingleSite(0), 4), ZGrid(np.array([1.0])))


# --- spectral bounds ---------------------------------------------------------


def test_bounds_uniform_chain():
    emin, emax = spectral_bounds(build_hamiltonian(uniform_lattice(50)))
    assert emin <= -2.0 and emax >= 2.0


def test_bounds_with_diagonal_disorder():
    spec = _random_spec(80, 5, diag_w=4.0)
    h = build_hamiltonian(spec)
    emin, emax = spectral_bounds(h)
    lam = decompose(h).eigenvalues
    assert emin <= lam[0] and lam[-1] <= emax


def test_bounds_contain_exact_spectrum_n3():
    h = build_hamiltonian(uniform_lattice(3))
    lam = decompose(h).eigenvalues  # oracle: exact spectrum
    emin, emax = spectral_bounds(h)
    assert emin <= lam[0] and lam[-1] <= emax


# --- evolve_chebyshev --------------------------------------------------------


def test_chebyshev_identity_at_z0():
    h = build_hamiltonian(uniform_lattice(9))
    psi0 = make_initial_state(SingleSite(4), 9)
    snap = evolve_chebyshev(h, psi0, ZGrid(np.array([0.0])), tol=1e-12)
    assert np.array_equal(snap.amps[0], psi0.amps)


def test_chebyshev_matches_eigen_uniform():
    n = 101
    h = build_hamiltonian(uniform_lattice(n))
    psi0 = make_initial_state(SingleSite(50), n)
    grid = ZGrid(np.array([10.0]))
    ref = evolve_eigen(h, psi0, grid)
    got = evolve_chebyshev(h, psi0, grid, tol=1e-12)
    assert np.max(np.abs(got.amps - ref.amps)) < 1e-10


def test_chebyshev_matches_eigen_disordered():
    spec = _random_spec(100, 11)
    h = build_hamiltonian(spec)
    psi0 = _random_state(100, 12)
    grid = ZGrid(np.array([20.0]))
    ref = evolve_eigen(h, psi0, grid)
    got = evolve_chebyshev(h, psi0, grid, tol=1e-12)
    assert np.max(np.abs(got.amps - ref.amps)) < 1e-9


def test_chebyshev_tol_validation():
    h = build_hamiltonian(uniform_lattice(5))
    psi0 = make_initial_state(SingleSite(2), 5)
    for bad in (0.0, -1e-9, 1e-3):
        with pytest.raises(ValueError):
            evolve_chebyshev(h, psi0, ZGrid(np.array([1.0])), tol=bad)


def test_chebyshev_order_cap_signals():
    # an impossible tail request must hit the hard cap, not loop forever
    h = build_hamiltonian(uniform_lattice(31))
    psi0 = make_initial_state(SingleSite(15), 31)
    with pytest.raises(ChebyshevConvergenceError):
        evolve_chebyshev(h, psi0, ZGrid(np.array([10.0])), tol=1e-300)


# --- RK4 oracle --------------------------------------------------------------


def test_ode_oracle_identity_at_z0():
    h = build_hamiltonian(uniform_lattice(7))
    psi0 = make_initial_state(SingleSite(3), 7)
    assert np.array_equal(evolve_ode_oracle(h, psi0, 0.0, 1e-2).amps, psi0.amps)


def test_ode_oracle_rabi():
    h = build_hamiltonian(uniform_lattice(2))
    psi0 = make_initial_state(SingleSite(0), 2)
    wf = evolve_ode_oracle(h, psi0, np.pi / 2.0, 1e-4)
    assert abs(np.abs(wf.amps[1]) ** 2 - 1.0) < 1e-8


def test_ode_oracle_matches_eigen():
    spec = _random_spec(51, 21)
    h = build_hamiltonian(spec)
    psi0 = make_initial_state(SingleSite(25), 51)
    ref = evolve_eigen(h, psi0, ZGrid(np.array([3.0]))).amps[0]
    got = evolve_ode_oracle(h, psi0, 3.0, 1e-3).amps
    assert np.max(np.abs(got - ref)) < 1e-7


def test_ode_oracle_step_size_violation():
    h = build_hamiltonian(uniform_lattice(9))
    psi0 = make_initial_state(SingleSite(4), 9)
    with pytest.raises(ValueError):
        evolve_ode_oracle(h, psi0, 1.0, 1.0)  # dz * radius >= 1


# --- cross-cutting invariants -------------------------------------------------


def test_unitarity_across_grid():
    h = build_hamiltonian(_random_spec(70, 30))
    psi0 = _random_state(70, 31)
    grid = ZGrid(np.linspace(0.0, 15.0, 16))
    for snap, tol in ((evolve_eigen(h, psi0, grid), 1e-10),
                      (evolve_chebyshev(h, psi0, grid, tol=1e-12), 1e-11)):
        norms = np.sqrt(np.sum(np.abs(snap.amps) ** 2, axis=1))
        assert np.max(np.abs(norms - 1.0)) < tol


def test_composition():
    h = build_hamiltonian(_random_spec(40, 33))
    psi0 = _random_state(40, 34)
    z1, z2 = 2.3, 4.1
    direct = evolve_eigen(h, psi0, ZGrid(np.array([z1 + z2]))).amps[0]
    first = evolve_eigen(h, psi0, ZGrid(np.array([z1]))).state(0)
    stepped = evolve_eigen(h, first, ZGrid(np.array([z2]))).amps[0]
    assert np.max(np.abs(direct - stepped)) < 1e-10


def test_inner_product_preserved():
    h = build_hamiltonian(_random_spec(45, 35))
    phi0, psi0 = _random_state(45, 36), _random_state(45, 37)
    grid = ZGrid(np.array([7.7]))
    phi = evolve_eigen(h, phi0, grid).amps[0]
    psi = evolve_eigen(h, psi0, grid).amps[0]
    assert abs(abs(np.vdot(phi, psi)) - abs(np.vdot(phi0.amps, psi0.amps))) < 1e-10


def test_time_reversal_by_conjugation():
    # evolving conj(psi(z)) by z and conjugating again returns psi(0)
    h = build_hamiltonian(_random_spec(40, 38))
    psi0 = _random_state(40, 39)
    z = 5.0
    fwd = evolve_eigen(h, psi0, ZGrid(np.array([z]))).amps[0]
    back = np.conj(evolve_eigen(h, WaveFunction(np.conj(fwd)), ZGrid(np.array([z]))).amps[0])
    assert np.max(np.abs(back - psi0.amps)) < 1e-10


def test_gauge_shift_leaves_intensities():
    # adding a constant to the diagonal is a global phase
    spec = _random_spec(60, 40)
    h = build_hamiltonian(spec)
    from wavewalk import Hamiltonian

    shifted = Hamiltonian(diag=h.diag + 3.7, offdiag=h.offdiag, corner=h.corner)
    psi0 = _random_state(60, 41)
    grid = ZGrid(np.array([2.0, 9.0]))
    a = np.abs(evolve_eigen(h, psi0, grid).amps) ** 2
    b = np.abs(evolve_eigen(shifted, psi0, grid).amps) ** 2
    assert np.max(np.abs(a - b)) < 1e-10


def test_three_way_agreement_spot_check():
    # the full 50-case randomized version runs in the acceptance suite
    for seed in range(5):
        n = int(np.random.default_rng(seed).integers(10, 102))
        spec = _random_spec(n, 100 + seed, diag_w=2.0)
        h = build_hamiltonian(spec)
        psi0 = _random_state(n, 200 + seed)
        z = float(np.random.default_rng(300 + seed).uniform(0.5, 6.0))
        grid = ZGrid(np.array([z]))
        a = evolve_eigen(h, psi0, grid).amps[0]
        b = evolve_chebyshev(h, psi0, grid, tol=1e-12).amps[0]
        c = evolve_ode_oracle(h, psi0, z, 5e-4).amps
        assert np.max(np.abs(a - b)) < 1e-7
        assert np.max(np.abs(a - c)) < 1e-7
        assert np.max(np.abs(b - c)) < 1e-7


def test_zgrid_validation():
    with pytest.raises(ValueError):
        ZGrid(np.array([-1.0, 2.0]))
    with pytest.raises(ValueError):
        ZGrid(np.array([0.0, 0.0]))
    with pytest.raises(ValueError):
        ZGrid(np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        ZGrid(np.array([]))
