"""
Control-error ensembles.

Each sample perturbs the logical (unrescaled) fields and couplers with
independent Gaussian errors, sigma_h = x max|h| / sqrt(k) and sigma_J = x J_cs,
and counts as a success when every minimizer of the perturbed problem is a
ground state of the unperturbed one.

Sample i draws from its own Philox stream keyed by (seed, stream, i), so the
result does not depend on how the samples are split across workers.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.config import NOISE_X, SPECTRUM_LIMIT, TIE_TOL
from src.encoding.ising import IsingProblem, spectrum, spin_matrix
from src.errors import NonpositiveParameter, TooLarge
from src.utils.parallel import parallel_map, split_range
from src.utils.summarizer import log_slope

logger = logging.getLogger(__name__)

STATE_BLOCK = 1 << 14
SAMPLE_BLOCK = 256

SWEEP_COLUMNS = [
    "system_id", "n", "n_h", "lambda", "x", "k", "j_cs", "samples", "successes", "p_g", "ci95",
]


@dataclass(frozen=True)
class NoiseSpec:
    x: float = NOISE_X
    k: int = 1
    j_cs: float = 1.0

    def __post_init__(self):
        if self.x < 0:
            raise ValueError(f"Noise strength x must be nonnegative, got {self.x}")
        if self.k < 1:
            raise ValueError(f"Chain length k must be at least 1, got {self.k}")
        if self.j_cs <= 0:
            raise NonpositiveParameter("j_cs", self.j_cs)


@dataclass(frozen=True)
class NoiseEnsembleResult:
    samples: int
    successes: int
    seed: int
    spec: NoiseSpec

    @property
    def p_g(self):
        return self.successes / self.samples

    @property
    def ci95(self):
        """Half-width of the normal-approximation binomial 95% interval."""
        p = self.p_g
        return 1.96 * math.sqrt(p * (1.0 - p) / self.samples)


@dataclass(frozen=True)
class NoiseSystem:
    """One row of a sweep: a problem, its noise spec, and labels for the CSV."""
    system_id: str
    problem: IsingProblem
    spec: NoiseSpec
    n_h: int = None
    lam: str = None


def noise_sigmas(spec, max_abs_h):
    if max_abs_h < 0:
        raise ValueError(f"max|h| must be nonnegative, got {max_abs_h}")
    return spec.x * float(max_abs_h) / math.sqrt(spec.k), spec.x * spec.j_cs


def sample_generator(seed, index, stream=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, index])))


def _draw(rng, n, sigma_h, sigma_j):
    """n field errors first, then coupler errors in row-major i<j order."""
    dh = rng.normal(0.0, 1.0, n) * sigma_h
    dj = rng.normal(0.0, 1.0, n * (n - 1) // 2) * sigma_j
    return dh, dj


def perturb(problem, spec, seed, index=0, stream=0):
    n = problem.n
    sigma_h, sigma_j = noise_sigmas(spec, problem.max_abs_h)
    dh, dj = _draw(sample_generator(seed, index, stream), n, sigma_h, sigma_j)
    h = tuple(float(v) + d for v, d in zip(problem.h, dh))
    J = [[0.0] * n for _ in range(n)]
    for (i, j, v), d in zip(problem.couplers(), dj):
        J[i][j] = float(v) + d
    return IsingProblem(n, h, tuple(tuple(row) for row in J), problem.offset)


def _count_successes(task):
    h, J, ground, sigma_h, sigma_j, seed, stream, start, stop = task
    n = h.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    total = 1 << n
    is_ground = np.zeros(total, dtype=bool)
    is_ground[ground] = True

    successes = 0
    for lo in range(start, stop, SAMPLE_BLOCK):
        hi = min(stop, lo + SAMPLE_BLOCK)
        draws = [_draw(sample_generator(seed, i, stream), n, sigma_h, sigma_j) for i in range(lo, hi)]
        fields = h[None, :] + np.array([d[0] for d in draws])
        couplings = J[iu, ju][None, :] + np.array([d[1] for d in draws])

        best_ground = np.full(hi - lo, np.inf)
        best_other = np.full(hi - lo, np.inf)
        for s_lo in range(0, total, STATE_BLOCK):
            s_hi = min(total, s_lo + STATE_BLOCK)
            sigma = spin_matrix(s_lo, s_hi, n)
            energies = sigma @ fields.T + (sigma[:, iu] * sigma[:, ju]) @ couplings.T
            mask = is_ground[s_lo:s_hi]
            if mask.any():
                best_ground = np.minimum(best_ground, energies[mask].min(axis=0))
            if not mask.all():
                best_other = np.minimum(best_other, energies[~mask].min(axis=0))
        # Every state within TIE_TOL of the minimum must be a ground state.
        successes += int(np.count_nonzero(best_other > best_ground + TIE_TOL))
    return successes


def ground_state_overlap_rate(problem, spec, samples, seed, threads=None, stream=0, ground_set=None,
                              max_n=SPECTRUM_LIMIT):
    if problem.n > max_n:
        raise TooLarge(problem.n, max_n)
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    # 1. Unperturbed ground set and noise widths
    ground = sorted(ground_set if ground_set is not None else spectrum(problem, max_n).ground_states)
    h, J, _ = problem.float_arrays()
    sigma_h, sigma_j = noise_sigmas(spec, problem.max_abs_h)

    # 2. Sample blocks; every sample draws from its own keyed stream
    blocks = split_range(samples, max(1, threads or 1) * 4)
    tasks = [(h, J, ground, sigma_h, sigma_j, seed, stream, a, b) for a, b in blocks]
    successes = sum(parallel_map(_count_successes, tasks, threads))
    result = NoiseEnsembleResult(samples, successes, seed, spec)
    logger.info("x=%g k=%d J_cs=%g: P_g=%.4f (%d/%d)", spec.x, spec.k, spec.j_cs, result.p_g, successes, samples)
    return result


def _row(system_id, n, n_h, lam, result):
    return {
        "system_id": system_id,
        "n": n,
        "n_h": n_h,
        "lambda": lam,
        "x": result.spec.x,
        "k": result.spec.k,
        "j_cs": result.spec.j_cs,
        "samples": result.samples,
        "successes": result.successes,
        "p_g": result.p_g,
        "ci95": result.ci95,
    }


def jcs_sweep(problem, x, k, jcs_list, samples, seed, threads=None, system_id="system", n_h=None, lam=None):
    """
    One overlap rate per chain strength. All entries reuse the same random
    streams, so only the coupler scale sigma_J changes between rows.
    """
    ground = sorted(spectrum(problem).ground_states)
    rows = []
    for j_cs in jcs_list:
        result = ground_state_overlap_rate(problem, NoiseSpec(x, k, j_cs), samples, seed, threads, ground_set=ground)
        rows.append(_row(system_id, problem.n, n_h, lam, result))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def x_sweep(problem, x_list, k, j_cs, samples, seed, threads=None, system_id="system", n_h=None, lam=None):
    ground = sorted(spectrum(problem).ground_states)
    rows = []
    for x in x_list:
        result = ground_state_overlap_rate(problem, NoiseSpec(x, k, j_cs), samples, seed, threads, ground_set=ground)
        rows.append(_row(system_id, problem.n, n_h, lam, result))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def n_sweep(systems, samples, seed, threads=None):
    """
    Overlap rate for each system and the fitted slope of ln(P_g) against N.

    Returns:
        tuple: (DataFrame, slope or None when fewer than two sizes have P_g > 0)
    """
    rows = []
    for stream, system in enumerate(systems):
        result = ground_state_overlap_rate(system.problem, system.spec, samples, seed, threads, stream=stream)
        rows.append(_row(system.system_id, system.problem.n, system.n_h, system.lam, result))
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    slope = log_slope(frame["n"], frame["p_g"])
    return frame, slope
