"""
State-vector simulation of a linear quantum anneal H(t) = a(t) H_D + b(t) H_P.

Each step of length eps uses the midpoint Hamiltonian H_m = H(t_m + eps/2) and
the Crank-Nicolson propagator (T^dagger)^-1 T with T = 1 - (i eps / 2) H_m.
The implicit step is solved as A v = u with A = T T^dagger (Hermitian, positive
definite) and u = T T psi, by conjugate gradients on a matrix-free operator.

Basis index x has bit i equal to s_i (1 = H, sigma_i = +1).
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg

from src.config import CG_TOL, DEFAULT_EPS, DEFAULT_TF, DRIVER_SIGN, STATE_LIMIT
from src.encoding.ising import all_basis_energies, spectrum
from src.errors import (
    CgNoConvergence,
    DegenerateDifference,
    DimensionMismatch,
    EmptyGroundSet,
    MissingComposition,
    NonpositiveParameter,
    StateTooLarge,
)
from src.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


class DriverKind(Enum):
    X = "x"
    XY = "xy"


@dataclass(frozen=True)
class AnnealSchedule:
    t_f: float = DEFAULT_TF

    def __post_init__(self):
        if self.t_f <= 0:
            raise NonpositiveParameter("t_f", self.t_f)

    def a(self, t):
        return 1.0 - t / self.t_f

    def b(self, t):
        return t / self.t_f


@dataclass(frozen=True)
class IntegratorConfig:
    eps: float = DEFAULT_EPS
    cg_tol: float = CG_TOL
    cg_maxiter: int = None
    driver_sign: int = DRIVER_SIGN
    # The uniform fixed-weight start is the ground state of -H_XY, so the XY
    # mixer enters with this sign by default.
    xy_sign: int = -1
    restrict_subspace: bool = False

    def __post_init__(self):
        if self.eps <= 0:
            raise NonpositiveParameter("eps", self.eps)

    def steps(self, t_f):
        """Number of steps M and the step actually used (t_f = M * eps)."""
        ratio = t_f / self.eps
        m = round(ratio) if abs(ratio - round(ratio)) < 1e-9 else math.ceil(ratio)
        m = max(1, m)
        return m, t_f / m

    def maxiter(self, n):
        if self.cg_maxiter is not None:
            return self.cg_maxiter
        return int(10 * 2 ** (n / 2) + 100)


@dataclass(frozen=True, eq=False)
class QuantumState:
    n: int
    amplitudes: np.ndarray

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


def hamming_weights(n):
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def initial_state(n, driver, n_h=None, driver_sign=DRIVER_SIGN):
    driver = DriverKind(driver)
    dim = 1 << n
    if driver is DriverKind.X:
        if driver_sign > 0:
            # Ground state of +sum sigma^x: each qubit (|0> - |1>)/sqrt(2).
            signs = np.where(hamming_weights(n) % 2 == 0, 1.0, -1.0)
        else:
            signs = np.ones(dim)
        return QuantumState(n, (signs / math.sqrt(dim)).astype(np.complex128))

    if n_h is None:
        raise MissingComposition("The XY driver needs the composition n_h")
    support = hamming_weights(n) == n_h
    amplitudes = np.zeros(dim, dtype=np.complex128)
    amplitudes[support] = 1.0 / math.sqrt(math.comb(n, n_h))
    return QuantumState(n, amplitudes)


class AnnealingHamiltonian:
    """Matrix-free a H_D + b H_P on the full 2^n space, or on one Hamming-weight sector for XY."""

    def __init__(self, problem, driver, n_h=None, driver_sign=DRIVER_SIGN, xy_sign=-1, restrict=False):
        self.n = problem.n
        self.driver = DriverKind(driver)
        self.driver_sign = driver_sign
        self.xy_sign = xy_sign
        self.n_h = n_h
        if self.driver is DriverKind.XY and n_h is None and restrict:
            raise MissingComposition("Restricting to a weight sector needs n_h")
        self.restricted = restrict and self.driver is DriverKind.XY

        diag = all_basis_energies(problem, include_offset=False)
        if self.restricted:
            self.basis = np.flatnonzero(hamming_weights(self.n) == n_h)
            self.diag = diag[self.basis]
            self._mixer = self._sector_mixer()
        else:
            self.basis = None
            self.diag = diag
            if self.driver is DriverKind.XY:
                w = hamming_weights(self.n)
                self._equal_pairs = (w * (w - 1) // 2 + (self.n - w) * (self.n - w - 1) // 2).astype(np.float64)

    @property
    def dim(self):
        return self.diag.shape[0]

    def _sector_mixer(self):
        basis = self.basis
        rows, cols = [], []
        for i in range(self.n):
            for j in range(self.n):
                if i == j:
                    continue
                movable = ((basis >> i) & 1 == 1) & ((basis >> j) & 1 == 0)
                src = np.flatnonzero(movable)
                targets = basis[src] ^ ((1 << i) | (1 << j))
                rows.append(src)
                cols.append(np.searchsorted(basis, targets))
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        data = np.ones(rows.shape[0], dtype=np.float64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(basis.size, basis.size))

    def _x_driver(self, psi):
        tensor = psi.reshape((2,) * self.n)
        out = np.zeros_like(tensor)
        for axis in range(self.n):
            out += np.flip(tensor, axis=axis)
        return self.driver_sign * out.reshape(-1)

    def _xy_driver(self, psi):
        if self.restricted:
            return self.xy_sign * (self._mixer @ psi)
        tensor = psi.reshape((2,) * self.n)
        out = np.zeros_like(tensor)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                out += np.swapaxes(tensor, i, j)
        # swapaxes also returns psi itself wherever bits i and j agree; remove those terms.
        out = out.reshape(-1) - self._equal_pairs * psi
        return self.xy_sign * out

    def driver_apply(self, psi):
        if self.driver is DriverKind.X:
            return self._x_driver(psi)
        return self._xy_driver(psi)

    def apply(self, psi, a, b):
        psi = np.ravel(psi)
        return a * self.driver_apply(psi) + b * (self.diag * psi)

    def compress(self, amplitudes):
        return amplitudes if self.basis is None else amplitudes[self.basis]

    def expand(self, psi):
        if self.basis is None:
            return psi
        full = np.zeros(1 << self.n, dtype=np.complex128)
        full[self.basis] = psi
        return full


def apply_hamiltonian(state, problem, driver, a, b, driver_sign=DRIVER_SIGN, xy_sign=-1):
    if state.n != problem.n or state.amplitudes.shape[0] != (1 << problem.n):
        raise DimensionMismatch(f"State of {state.n} qubits vs problem of {problem.n} spins")
    ham = AnnealingHamiltonian(problem, driver, driver_sign=driver_sign, xy_sign=xy_sign)
    return QuantumState(state.n, ham.apply(state.amplitudes, a, b))


def evolve(problem, driver, schedule, config=None, n_h=None, observer=None, max_n=STATE_LIMIT):
    """
    Integrates from the driver ground state to t_f.

    Args:
        problem (IsingProblem): the problem Hamiltonian, diagonal in the basis
        driver (DriverKind or str): "x" or "xy"
        schedule (AnnealSchedule): linear a(t), b(t) over [0, t_f]
        config (IntegratorConfig): step size, CG tolerance, driver signs
        n_h (int): Hamming weight of the XY start state
        observer (callable): called as observer(step, t, QuantumState) after every step

    Returns:
        QuantumState: the final state on the full 2^n basis
    """
    config = config or IntegratorConfig()
    n = problem.n
    if n > max_n:
        raise StateTooLarge(n, max_n)
    driver = DriverKind(driver)

    # 1. Operator and start state (compressed to the sector when restricted)
    ham = AnnealingHamiltonian(
        problem, driver, n_h=n_h, driver_sign=config.driver_sign,
        xy_sign=config.xy_sign, restrict=config.restrict_subspace,
    )
    psi = ham.compress(initial_state(n, driver, n_h, config.driver_sign).amplitudes)
    steps, eps = config.steps(schedule.t_f)
    maxiter = config.maxiter(n)
    dim = ham.dim
    logger.debug("Evolving %d qubits (dim %d) over %d steps of %.6g", n, dim, steps, eps)

    # 2. One Crank-Nicolson step per midpoint Hamiltonian
    for m in range(steps):
        t_mid = (m + 0.5) * eps
        a, b = schedule.a(t_mid), schedule.b(t_mid)
        half = 0.5j * eps

        def t_op(v, a=a, b=b):
            return v - half * ham.apply(v, a, b)

        def a_op(v, a=a, b=b):
            v = np.ravel(v)
            w = v + half * ham.apply(v, a, b)
            return w - half * ham.apply(w, a, b)

        # 3. Solve T T^dagger v = T T psi, warm-started from psi
        A = LinearOperator((dim, dim), matvec=a_op, dtype=np.complex128)
        u = t_op(t_op(psi))
        psi, info = cg(A, u, x0=psi, rtol=config.cg_tol, atol=0.0, maxiter=maxiter)
        if info != 0:
            raise CgNoConvergence(m, info)
        if observer is not None:
            observer(m + 1, (m + 1) * eps, QuantumState(n, ham.expand(psi)))

    return QuantumState(n, ham.expand(psi))


def ground_state_probability(state, ground_set):
    ground = list(ground_set)
    if not ground:
        raise EmptyGroundSet("Ground-state set is empty")
    return float(np.sum(np.abs(state.amplitudes[ground]) ** 2))


def subspace_leak(state, n_h):
    outside = hamming_weights(state.n) != n_h
    return float(np.sum(np.abs(state.amplitudes[outside]) ** 2))


class TraceRecorder:
    """Observer collecting t, norm, P_g and the weight-sector leak every `every` steps."""

    def __init__(self, ground_set, n_h=None, every=1):
        self.ground = list(ground_set)
        self.n_h = n_h
        self.every = max(1, every)
        self.rows = []

    def __call__(self, step, t, state):
        if step % self.every:
            return
        leak = subspace_leak(state, self.n_h) if self.n_h is not None else float("nan")
        self.rows.append({
            "t": t,
            "norm": state.norm(),
            "P_g": ground_state_probability(state, self.ground),
            "subspace_leak": leak,
        })

    def frame(self):
        return pd.DataFrame(self.rows, columns=["t", "norm", "P_g", "subspace_leak"])


def _final_probability(task):
    problem, driver, t_f, eps, config, n_h, ground = task
    cfg = IntegratorConfig(
        eps=eps, cg_tol=config.cg_tol, cg_maxiter=config.cg_maxiter, driver_sign=config.driver_sign,
        xy_sign=config.xy_sign, restrict_subspace=config.restrict_subspace,
    )
    state = evolve(problem, driver, AnnealSchedule(t_f), cfg, n_h=n_h)
    return ground_state_probability(state, ground)


def _ground(problem, ground_set):
    return sorted(ground_set) if ground_set is not None else sorted(spectrum(problem).ground_states)


def ground_probabilities(problem, driver, t_f, eps_list, config=None, n_h=None, ground_set=None, threads=None):
    """Final P_g for each step size; independent evolutions run in parallel."""
    config = config or IntegratorConfig()
    ground = _ground(problem, ground_set)
    tasks = [(problem, DriverKind(driver), t_f, eps, config, n_h, ground) for eps in eps_list]
    return parallel_map(_final_probability, tasks, threads)


def annealing_time_sweep(problem, driver, t_f_list, config=None, n_h=None, ground_set=None, threads=None):
    """
    Final P_g for each annealing time at the step size in config.

    Returns:
        pd.DataFrame: columns t_f, eps, P_g in the order of t_f_list
    """
    config = config or IntegratorConfig()
    if not t_f_list:
        raise ValueError("t_f_list is empty")
    ground = _ground(problem, ground_set)
    tasks = [(problem, DriverKind(driver), t_f, config.eps, config, n_h, ground) for t_f in t_f_list]
    probs = parallel_map(_final_probability, tasks, threads)
    return pd.DataFrame(
        {"t_f": [float(t) for t in t_f_list], "eps": float(config.eps), "P_g": probs},
        columns=["t_f", "eps", "P_g"],
    )


def chi_ratio(p_2eps, p_eps, p_half):
    denominator = p_2eps - p_eps
    if abs(denominator) < 1e-14:
        raise DegenerateDifference(f"P_g(2eps) - P_g(eps) = {denominator:.3g} is too small")
    return (p_eps - p_half) / denominator


def chi_diagnostic(problem, driver, t_f, eps, config=None, n_h=None, ground_set=None, threads=None):
    p_2eps, p_eps, p_half = ground_probabilities(
        problem, driver, t_f, [2 * eps, eps, eps / 2], config, n_h, ground_set, threads
    )
    return chi_ratio(p_2eps, p_eps, p_half)


def chi_table(problem, driver, t_f, eps_list, config=None, n_h=None, ground_set=None, threads=None):
    """
    P_g for every step size in eps_list, and chi(eps) wherever both 2*eps and
    eps/2 are also in the list.
    """
    eps_list = sorted(set(eps_list), reverse=True)
    probs = ground_probabilities(problem, driver, t_f, eps_list, config, n_h, ground_set, threads)
    by_eps = dict(zip(eps_list, probs))

    def lookup(value):
        for e, p in by_eps.items():
            if math.isclose(e, value, rel_tol=1e-9):
                return p
        return None

    rows = []
    for eps, p in by_eps.items():
        coarse, fine = lookup(2 * eps), lookup(eps / 2)
        chi = float("nan")
        if coarse is not None and fine is not None:
            try:
                chi = chi_ratio(coarse, p, fine)
            except DegenerateDifference:
                logger.warning("chi undefined at eps=%g (flat P_g)", eps)
        rows.append({"t_f": t_f, "eps": eps, "P_g": p, "chi": chi})
    return pd.DataFrame(rows, columns=["t_f", "eps", "P_g", "chi"])


def sample_bitstrings(state, count, seed):
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    return rng.choice(probs.shape[0], size=count, p=probs).tolist()
