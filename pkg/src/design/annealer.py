"""
Classical simulated annealing over sequences for a fixed target.

Moves: with probability 1/2 a single-bead flip, otherwise an H<->P swap that
keeps the composition. Temperatures fall geometrically from t_start to t_end.
Energies are tracked exactly as integers scaled by the denominator of lambda.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from src.config import SA_RESTARTS, SA_STEPS, SA_T_END, SA_T_START
from src.lattice.core import HpSequence
from src.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SaResult:
    per_restart: tuple     # (HpSequence, Fraction) best found by each restart
    best_energy: Fraction
    best_sequences: tuple  # distinct sequences reaching best_energy, sorted by text

    def hits(self, energy):
        """Number of restarts whose best equals `energy`."""
        return sum(1 for _, e in self.per_restart if e == energy)


def _neighbours(model):
    nbrs = [[] for _ in range(model.n)]
    for i, j in model.cmap.contacts:
        nbrs[i].append(j)
        nbrs[j].append(i)
    return nbrs


def _scaled_energy(beads, nbrs, p, q, n_h):
    hh = sum(1 for i, row in enumerate(nbrs) for j in row if j > i and beads[i] and beads[j])
    excess = sum(beads) - n_h
    return -q * hh + p * excess * excess


def _run_restart(task):
    nbrs, n, p, q, n_h, steps, seed, restart, t_start, t_end = task
    rng = np.random.default_rng([seed, restart])

    beads = [0] * n
    for i in rng.permutation(n)[: min(n_h, n)].tolist():
        beads[i] = 1
    hs = [i for i in range(n) if beads[i]]
    ps = [i for i in range(n) if not beads[i]]
    mass = len(hs)

    # Random numbers are drawn up front so a restart is a fixed function of (seed, restart).
    swap_move = rng.random(steps) < 0.5
    sites = rng.integers(0, n, steps) if n else np.zeros(steps, dtype=np.int64)
    pick_h = rng.random(steps)
    pick_p = rng.random(steps)
    accept = rng.random(steps)
    ratio = (t_end / t_start) ** (1.0 / (steps - 1)) if steps > 1 else 1.0

    energy = _scaled_energy(beads, nbrs, p, q, n_h)
    best, best_beads = energy, list(beads)
    temperature = t_start

    for step in range(steps):
        if n == 0:
            break
        if swap_move[step]:
            if not hs or not ps:
                temperature *= ratio
                continue
            a = int(pick_h[step] * len(hs))
            b = int(pick_p[step] * len(ps))
            i, j = hs[a], ps[b]
            # Remove i, then add j (i already P when j's neighbours are counted).
            lost = sum(beads[k] for k in nbrs[i])
            gained = sum(beads[k] for k in nbrs[j] if k != i)
            delta = -q * (gained - lost)
        else:
            i = int(sites[step])
            c = sum(beads[k] for k in nbrs[i])
            sign = 1 if beads[i] == 0 else -1
            new_mass = mass + sign
            delta = -q * sign * c + p * ((new_mass - n_h) ** 2 - (mass - n_h) ** 2)

        if delta <= 0 or accept[step] < math.exp(-delta / (q * temperature)):
            if swap_move[step]:
                beads[i], beads[j] = 0, 1
                hs[a], ps[b] = j, i
            else:
                beads[i] = 1 - beads[i]
                mass = new_mass
                if beads[i]:
                    ps.remove(i)
                    hs.append(i)
                else:
                    hs.remove(i)
                    ps.append(i)
            energy += delta
            if energy < best:
                best, best_beads = energy, list(beads)
        temperature *= ratio

    return tuple(best_beads), best


def sa_minimize(model, restarts=SA_RESTARTS, steps=SA_STEPS, seed=0, threads=None,
                t_start=SA_T_START, t_end=SA_T_END):
    if steps < 1:
        raise ValueError(f"steps must be at least 1, got {steps}")
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")
    # 1. Integer form of the energy: everything scaled by the denominator of lambda
    p, q = model.lam.numerator, model.lam.denominator
    nbrs = _neighbours(model)
    tasks = [(nbrs, model.n, p, q, model.n_h, steps, seed, r, t_start, t_end) for r in range(restarts)]

    # 2. Independent restarts, seeded by (seed, restart)
    per_restart = []
    for beads, scaled in parallel_map(_run_restart, tasks, threads):
        per_restart.append((HpSequence(beads), Fraction(scaled, q)))
    # 3. Best energy and every distinct sequence reaching it
    best_energy = min(e for _, e in per_restart)
    best = {s for s, e in per_restart if e == best_energy}
    result = SaResult(tuple(per_restart), best_energy, tuple(sorted(best, key=lambda s: s.text)))
    logger.info("SA: best energy %s reached by %d/%d restarts", best_energy, result.hits(best_energy), restarts)
    return result
