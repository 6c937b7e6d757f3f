import math
from fractions import Fraction

import numpy as np
import pytest

from src.encoding.ising import IsingProblem, all_basis_energies, qubo_to_ising, spectrum, to_qubo
from src.errors import (
    DegenerateDifference,
    DimensionMismatch,
    EmptyGroundSet,
    MissingComposition,
    NonpositiveParameter,
    StateTooLarge,
)
from src.lattice.core import DesignEnergyModel, contact_map, parse_structure
from src.quantum.anneal import (
    AnnealSchedule,
    DriverKind,
    IntegratorConfig,
    QuantumState,
    TraceRecorder,
    annealing_time_sweep,
    apply_hamiltonian,
    chi_diagnostic,
    chi_ratio,
    chi_table,
    evolve,
    ground_state_probability,
    hamming_weights,
    initial_state,
    sample_bitstrings,
    subspace_leak,
)


def single_spin():
    """One spin with h = -1: sigma = +1 (index 1) is the ground state."""
    return IsingProblem(1, (Fraction(-1),), ((Fraction(0),),), Fraction(0))


def chain_problem(moves="RULL", lam=Fraction(11, 10), n_h=3):
    model = DesignEnergyModel(contact_map(parse_structure(moves)), lam, n_h)
    return qubo_to_ising(to_qubo(model))


def dense_hamiltonian(problem, driver, a, b, driver_sign=1, xy_sign=-1):
    n, dim = problem.n, 1 << problem.n
    D = np.zeros((dim, dim))
    for x in range(dim):
        if driver == "x":
            for i in range(n):
                D[x ^ (1 << i), x] += driver_sign
        else:
            for i in range(n):
                for j in range(i + 1, n):
                    if ((x >> i) & 1) != ((x >> j) & 1):
                        D[x ^ ((1 << i) | (1 << j)), x] += xy_sign
    return a * D + b * np.diag(all_basis_energies(problem, include_offset=False))


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return QuantumState(n, v / np.linalg.norm(v))


def test_schedule_endpoints():
    s = AnnealSchedule(20.0)
    assert (s.a(0), s.b(0)) == (1.0, 0.0)
    assert (s.a(20.0), s.b(20.0)) == (0.0, 1.0)


@pytest.mark.parametrize("t_f", [0.0, -1.0])
def test_schedule_rejects_nonpositive(t_f):
    with pytest.raises(NonpositiveParameter):
        AnnealSchedule(t_f)


def test_step_count_exact_and_rounded_up():
    assert IntegratorConfig(eps=0.01).steps(20.0) == (2000, pytest.approx(0.01))
    m, eps = IntegratorConfig(eps=0.3).steps(1.0)
    assert m == 4 and eps == pytest.approx(0.25)


def test_x_initial_state_is_driver_ground_state():
    n = 3
    state = initial_state(n, "x")
    H = dense_hamiltonian(chain_problem("RR", 0, 0), "x", 1.0, 0.0)
    assert state.norm() == pytest.approx(1.0)
    assert np.allclose(H @ state.amplitudes, -n * state.amplitudes)


def test_x_initial_state_with_negative_sign_is_uniform():
    state = initial_state(2, DriverKind.X, driver_sign=-1)
    assert np.allclose(state.amplitudes, 0.5)


def test_xy_initial_state_fills_the_weight_sector():
    state = initial_state(4, "xy", n_h=2)
    support = np.flatnonzero(np.abs(state.amplitudes) > 0)
    assert len(support) == math.comb(4, 2)
    assert all(bin(int(x)).count("1") == 2 for x in support)
    assert state.norm() == pytest.approx(1.0)


def test_xy_initial_state_is_driver_ground_state():
    problem = chain_problem()
    state = initial_state(5, "xy", n_h=3)
    H = dense_hamiltonian(problem, "xy", 1.0, 0.0)
    energy = np.vdot(state.amplitudes, H @ state.amplitudes).real
    sector = np.flatnonzero(hamming_weights(5) == 3)
    assert energy == pytest.approx(np.linalg.eigvalsh(H[np.ix_(sector, sector)]).min())


def test_xy_needs_composition():
    with pytest.raises(MissingComposition):
        initial_state(4, "xy")


@pytest.mark.parametrize("driver", ["x", "xy"])
@pytest.mark.parametrize("a,b", [(1.0, 0.0), (0.3, 0.7), (0.0, 1.0)])
def test_apply_matches_dense_matrix(driver, a, b):
    problem = chain_problem()
    state = random_state(problem.n, seed=4)
    out = apply_hamiltonian(state, problem, driver, a, b)
    expected = dense_hamiltonian(problem, driver, a, b) @ state.amplitudes
    assert np.allclose(out.amplitudes, expected, rtol=0, atol=1e-12)


def test_apply_matches_dense_matrix_with_driver_signs():
    problem = chain_problem("RULLDD", n_h=3)
    state = random_state(problem.n, seed=9)
    for driver in ("x", "xy"):
        out = apply_hamiltonian(state, problem, driver, 0.6, 0.4, driver_sign=-1, xy_sign=1)
        expected = dense_hamiltonian(problem, driver, 0.6, 0.4, driver_sign=-1, xy_sign=1) @ state.amplitudes
        assert np.allclose(out.amplitudes, expected, rtol=0, atol=1e-12)


def test_apply_dimension_mismatch(square_ising):
    with pytest.raises(DimensionMismatch):
        apply_hamiltonian(random_state(3, seed=1), square_ising, "x", 1.0, 0.0)


def test_xy_preserves_hamming_weight():
    problem = chain_problem()
    state = initial_state(5, "xy", n_h=3)
    out = apply_hamiltonian(state, problem, "xy", 0.5, 0.5)
    assert subspace_leak(out, 3) == pytest.approx(0.0, abs=1e-28)


def test_evolution_keeps_the_norm():
    problem = chain_problem("RU", Fraction(11, 10), 2)
    config = IntegratorConfig(eps=0.002, cg_tol=1e-12)
    state = evolve(problem, "x", AnnealSchedule(20.0), config)
    assert config.steps(20.0)[0] == 10_000
    assert abs(state.norm() - 1.0) < 1e-7


def test_single_spin_follows_its_ground_state():
    state = evolve(single_spin(), "x", AnnealSchedule(20.0))
    assert ground_state_probability(state, {1}) > 0.99


def test_xy_evolution_stays_in_sector():
    problem = chain_problem()
    recorder = TraceRecorder(spectrum(problem).ground_states, n_h=3, every=10)
    state = evolve(problem, "xy", AnnealSchedule(5.0), IntegratorConfig(eps=0.05), n_h=3, observer=recorder)
    assert subspace_leak(state, 3) < 1e-10
    frame = recorder.frame()
    assert len(frame) == 10
    assert list(frame.columns) == ["t", "norm", "P_g", "subspace_leak"]
    assert frame["subspace_leak"].max() < 1e-10


def test_restricted_sector_matches_full_space():
    problem = chain_problem()
    schedule = AnnealSchedule(5.0)
    full = evolve(problem, "xy", schedule, IntegratorConfig(eps=0.05, cg_tol=1e-12), n_h=3)
    restricted = evolve(
        problem, "xy", schedule, IntegratorConfig(eps=0.05, cg_tol=1e-12, restrict_subspace=True), n_h=3
    )
    assert np.allclose(full.amplitudes, restricted.amplitudes, atol=1e-8)


def test_observer_sees_every_step():
    seen = []
    evolve(single_spin(), "x", AnnealSchedule(1.0), IntegratorConfig(eps=0.1),
           observer=lambda step, t, state: seen.append((step, t)))
    assert [s for s, _ in seen] == list(range(1, 11))
    assert seen[-1][1] == pytest.approx(1.0)


def test_state_too_large(square_ising):
    with pytest.raises(StateTooLarge):
        evolve(square_ising, "x", AnnealSchedule(1.0), max_n=3)


def test_empty_ground_set():
    with pytest.raises(EmptyGroundSet):
        ground_state_probability(initial_state(2, "x"), set())


def test_chi_ratio_value():
    assert chi_ratio(0.5, 0.4, 0.375) == pytest.approx(0.25)


def test_chi_ratio_flat_probabilities():
    with pytest.raises(DegenerateDifference):
        chi_ratio(0.4, 0.4, 0.4)


def test_chi_table_fills_only_bracketed_rows():
    frame = chi_table(single_spin(), "x", 3.0, [0.1, 0.05, 0.025], ground_set={1})
    assert list(frame.columns) == ["t_f", "eps", "P_g", "chi"]
    assert frame["eps"].tolist() == [0.1, 0.05, 0.025]
    assert np.isnan(frame["chi"].iloc[0]) and np.isnan(frame["chi"].iloc[2])
    # Crank-Nicolson errors shrink as eps^2, so chi tends to 1/4.
    assert frame["chi"].iloc[1] == pytest.approx(0.25, abs=0.05)


def test_sampling_is_reproducible():
    state = evolve(single_spin(), "x", AnnealSchedule(2.0), IntegratorConfig(eps=0.05))
    first = sample_bitstrings(state, 50, seed=3)
    assert first == sample_bitstrings(state, 50, seed=3)
    assert set(first) <= {0, 1}


def test_sampling_needs_a_positive_count():
    with pytest.raises(ValueError):
        sample_bitstrings(initial_state(2, "x"), 0, seed=1)


def test_chi_diagnostic_matches_table():
    frame = chi_table(single_spin(), "x", 3.0, [0.1, 0.05, 0.025], ground_set={1})
    chi = chi_diagnostic(single_spin(), "x", 3.0, 0.05, ground_set={1})
    assert chi == pytest.approx(frame["chi"].iloc[1])


def two_free_spins():
    """Uncoupled spins with unequal fields; the unique ground state is sigma = (-1, -1)."""
    zero = Fraction(0)
    return IsingProblem(2, (Fraction(3), Fraction(2)), ((zero, zero), (zero, zero)), zero)


def test_slower_anneals_approach_the_ground_state():
    problem = two_free_spins()
    assert set(spectrum(problem).ground_states) == {0}
    frame = annealing_time_sweep(problem, "x", [5.0, 10.0, 20.0, 50.0], IntegratorConfig(eps=0.01), threads=2)
    p = frame["P_g"].tolist()
    assert p == sorted(p)
    assert p[-1] > 0.99


def test_annealing_time_sweep_frame():
    frame = annealing_time_sweep(single_spin(), "x", [2.0, 1.0], IntegratorConfig(eps=0.1), ground_set={1})
    assert list(frame.columns) == ["t_f", "eps", "P_g"]
    assert frame["t_f"].tolist() == [2.0, 1.0]
    assert frame["eps"].tolist() == [0.1, 0.1]
    single = evolve(single_spin(), "x", AnnealSchedule(2.0), IntegratorConfig(eps=0.1))
    assert frame["P_g"].iloc[0] == pytest.approx(ground_state_probability(single, {1}))


def test_annealing_time_sweep_needs_times():
    with pytest.raises(ValueError):
        annealing_time_sweep(single_spin(), "x", [], ground_set={1})


def test_uniform_state_samples_evenly():
    n, count = 4, 100_000
    state = QuantumState(n, np.full(1 << n, 0.25, dtype=np.complex128))
    freq = np.bincount(sample_bitstrings(state, count, seed=11), minlength=1 << n) / count
    p = 1 / (1 << n)
    sigma = math.sqrt(p * (1 - p) / count)
    assert np.all(np.abs(freq - p) <= 5 * sigma)
