"""
Design energy -> QUBO -> Ising, with exact rational coefficients.

Conventions used across the package:
- s_i = 1 is H, s_i = 0 is P, and sigma_i = 2 s_i - 1 (so sigma = +1 is H);
- basis-state index x has bit i equal to s_i.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from src.config import SPECTRUM_LIMIT
from src.errors import CompositionOutOfRange, DegenerateSpectrum, NonpositiveParameter, TooLarge
from src.lattice.core import HpSequence, to_fraction

logger = logging.getLogger(__name__)

STATE_CHUNK = 1 << 18


@dataclass(frozen=True)
class QuboProblem:
    """E(s) = sum_i Q[i][i] s_i + sum_{i<j} Q[i][j] s_i s_j + offset; only the upper triangle is used."""
    n: int
    Q: tuple
    offset: Fraction

    def energy(self, bits):
        e = self.offset
        for i in range(self.n):
            if bits[i]:
                e += self.Q[i][i]
                for j in range(i + 1, self.n):
                    if bits[j]:
                        e += self.Q[i][j]
        return e


@dataclass(frozen=True)
class IsingProblem:
    n: int
    h: tuple
    J: tuple       # upper triangular n x n; J[i][j] used for i < j only
    offset: Fraction

    def energy(self, spins):
        e = self.offset + sum(hi * si for hi, si in zip(self.h, spins))
        for i in range(self.n):
            for j in range(i + 1, self.n):
                e += self.J[i][j] * spins[i] * spins[j]
        return e

    @property
    def max_abs_h(self):
        return max((abs(x) for x in self.h), default=Fraction(0))

    def couplers(self):
        return [(i, j, self.J[i][j]) for i in range(self.n) for j in range(i + 1, self.n)]

    def float_arrays(self):
        """(h, J_upper, offset) as float64 arrays."""
        h = np.array([float(x) for x in self.h], dtype=np.float64)
        J = np.zeros((self.n, self.n), dtype=np.float64)
        for i, j, v in self.couplers():
            J[i, j] = float(v)
        return h, J, float(self.offset)

    def scaled_arrays(self):
        """Integer (h, J_upper, offset) times a common denominator, plus that denominator."""
        values = list(self.h) + [v for _, _, v in self.couplers()] + [self.offset]
        scale = 1
        for v in values:
            scale = lcm(scale, Fraction(v).denominator)
        h = np.array([int(x * scale) for x in self.h], dtype=np.int64)
        J = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j, v in self.couplers():
            J[i, j] = int(v * scale)
        return h, J, int(self.offset * scale), scale


@dataclass(frozen=True)
class SpectrumSummary:
    ground_energy: Fraction
    ground_states: frozenset
    gap: Fraction

    def ground_sequences(self, n):
        return sorted((HpSequence.from_index(x, n) for x in self.ground_states), key=lambda s: s.text)


def to_qubo(model):
    n, lam, n_h = model.n, model.lam, model.n_h
    Q = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        Q[i][i] = lam * (1 - 2 * n_h)
        for j in range(i + 1, n):
            Q[i][j] = 2 * lam
    for i, j in model.cmap.contacts:
        Q[i][j] -= 1
    return QuboProblem(n, tuple(tuple(row) for row in Q), lam * n_h * n_h)


def qubo_to_ising(q):
    # s_i = (1 + sigma_i) / 2
    n = q.n
    h = [q.Q[i][i] / 2 for i in range(n)]
    J = [[Fraction(0)] * n for _ in range(n)]
    offset = q.offset + sum(q.Q[i][i] for i in range(n)) / 2
    for i in range(n):
        for j in range(i + 1, n):
            c = q.Q[i][j] / 4
            J[i][j] = c
            h[i] += c
            h[j] += c
            offset += c
    return IsingProblem(n, tuple(h), tuple(tuple(row) for row in J), offset)


def rescale(p, j_cs, j_max):
    if j_cs <= 0:
        raise NonpositiveParameter("j_cs", j_cs)
    if j_max <= 0:
        raise NonpositiveParameter("j_max", j_max)
    r = to_fraction(j_cs) / to_fraction(j_max)
    h = tuple(x / r for x in p.h)
    J = tuple(tuple(x / r for x in row) for row in p.J)
    return IsingProblem(p.n, h, J, p.offset / r), r


def spin_matrix(start, stop, n):
    """sigma values (+1 for H) of basis states start..stop-1, shape (stop-start, n)."""
    idx = np.arange(start, stop, dtype=np.int64)
    return (2 * ((idx[:, None] >> np.arange(n)) & 1) - 1).astype(np.float64)


def basis_energies(h, J, offset, start, stop):
    """Float energies sum h.sigma + sum_{i<j} J sigma sigma + offset over a block of basis states."""
    sigma = spin_matrix(start, stop, len(h))
    return sigma @ h + np.einsum("bi,bi->b", sigma @ J, sigma) + offset


def all_basis_energies(p, include_offset=True):
    h, J, offset = p.float_arrays()
    offset = offset if include_offset else 0.0
    total = 1 << p.n
    return np.concatenate([
        basis_energies(h, J, offset, lo, min(total, lo + STATE_CHUNK))
        for lo in range(0, total, STATE_CHUNK)
    ])


def level_counts(p, levels=2, max_n=SPECTRUM_LIMIT):
    """Lowest `levels` distinct exact energies with their multiplicities."""
    if p.n > max_n:
        raise TooLarge(p.n, max_n)
    h, J, offset, scale = p.scaled_arrays()
    hf, Jf = h.astype(np.float64), J.astype(np.float64)
    total = 1 << p.n

    found = {}
    for lo in range(0, total, STATE_CHUNK):
        hi = min(total, lo + STATE_CHUNK)
        # Scaled coefficients are small integers, so the float sums are exact.
        energies = np.rint(basis_energies(hf, Jf, 0.0, lo, hi)).astype(np.int64)
        values, counts = np.unique(energies, return_counts=True)
        for v, c in zip(values[:levels].tolist(), counts[:levels].tolist()):
            found[v] = found.get(v, 0) + c
        found = dict(sorted(found.items())[:levels])
    return [(Fraction(v + offset, scale), c) for v, c in sorted(found.items())]


def spectrum(p, max_n=SPECTRUM_LIMIT):
    if p.n > max_n:
        raise TooLarge(p.n, max_n)
    h, J, offset, scale = p.scaled_arrays()
    hf, Jf = h.astype(np.float64), J.astype(np.float64)
    total = 1 << p.n

    ground, second, states = None, None, []
    for lo in range(0, total, STATE_CHUNK):
        hi = min(total, lo + STATE_CHUNK)
        energies = np.rint(basis_energies(hf, Jf, 0.0, lo, hi)).astype(np.int64)
        lowest = np.unique(energies)[:2].tolist()
        known = [v for v in (ground, second) if v is not None]
        merged = sorted(set(known + lowest))
        if ground is not None and merged[0] < ground:
            states = []
        ground = merged[0]
        second = merged[1] if len(merged) > 1 else None
        if lowest[0] == ground:
            states.extend((lo + np.flatnonzero(energies == ground)).tolist())

    if second is None:
        raise DegenerateSpectrum("All basis states share one energy; the gap is undefined")
    ground_energy = Fraction(ground + offset, scale)
    gap = Fraction(second - ground, scale)
    logger.debug("Spectrum: E0=%s, %d ground states, gap=%s", ground_energy, len(states), gap)
    return SpectrumSummary(ground_energy, frozenset(states), gap)


def sector_ground_states(p, n_h, max_n=SPECTRUM_LIMIT):
    """Exact minimizers among basis states of Hamming weight n_h (the XY-reachable sector)."""
    if p.n > max_n:
        raise TooLarge(p.n, max_n)
    if not (0 <= n_h <= p.n):
        raise CompositionOutOfRange(n_h, p.n)
    h, J, _, _ = p.scaled_arrays()
    hf, Jf = h.astype(np.float64), J.astype(np.float64)
    total = 1 << p.n

    best, states = None, []
    for lo in range(0, total, STATE_CHUNK):
        hi = min(total, lo + STATE_CHUNK)
        idx = np.arange(lo, hi, dtype=np.int64)
        in_sector = np.bitwise_count(idx.astype(np.uint64)) == n_h
        if not in_sector.any():
            continue
        energies = np.rint(basis_energies(hf, Jf, 0.0, lo, hi)).astype(np.int64)[in_sector]
        low = int(energies.min())
        if best is None or low < best:
            best, states = low, []
        if low == best:
            states.extend(idx[in_sector][energies == best].tolist())
    return frozenset(states)


def format_value(v):
    """Decimal text when the fraction terminates, p/q otherwise."""
    v = Fraction(v)
    d = v.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        return f"{v.numerator}/{v.denominator}"
    digits = 0
    while (v * 10 ** digits).denominator != 1:
        digits += 1
    text = f"{v.numerator * 10 ** digits // v.denominator}"
    if digits == 0:
        return text
    sign = "-" if text.startswith("-") else ""
    text = text.lstrip("-").rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"
