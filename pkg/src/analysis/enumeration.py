"""
Exhaustive ground truth for short chains.

Every self-avoiding walk is enumerated once per symmetry class (first move R,
first turn U). Energies depend on a structure only through its contact map, so
the walks of one length are grouped into contact-map classes; a sequence is
then scored against all classes at once with a single matrix product.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.config import DESIGNABILITY_LIMIT, STRUCTURE_LIMIT
from src.errors import LengthMismatch, LimitExceeded
from src.lattice.core import (
    MOVE_ORDER,
    STEPS,
    HpSequence,
    LatticeStructure,
    canonicalize,
    contact_map,
    hp_energy,
    move_key,
)
from src.utils.parallel import parallel_map, split_range

logger = logging.getLogger(__name__)

# Depth of the walk prefixes handed to workers.
PREFIX_DEPTH = 6
SEQUENCE_CHUNK = 512


@dataclass(frozen=True)
class FoldResult:
    min_ehp: int
    ground_state_moves: tuple
    unique: bool

    @property
    def ground_states(self):
        return [LatticeStructure(m) for m in self.ground_state_moves]

    def to_dict(self):
        return {
            "min_ehp": self.min_ehp,
            "unique": self.unique,
            "ground_state_moves": list(self.ground_state_moves),
        }


@dataclass(frozen=True)
class DesignabilityRecord:
    structure: LatticeStructure
    count: int
    sequences: tuple = ()


class DesignabilityRanking(list):
    """Records sorted by descending count, ties by canonical move order."""

    def __init__(self, records, n):
        super().__init__(records)
        self.n = n

    @property
    def unique_fraction(self):
        return sum(r.count for r in self) / float(1 << self.n)

    def most_designable(self):
        return self[0].structure


# --- Walk enumeration ---

def _grow(moves, coords, occupied, remaining, turned, out):
    if remaining == 0:
        out.append("".join(moves))
        return
    x, y = coords[-1]
    for m in MOVE_ORDER:
        # Until the chain turns, only R (straight) or U (first turn) are allowed.
        if not turned and m not in ("R", "U"):
            continue
        dx, dy = STEPS[m]
        nxt = (x + dx, y + dy)
        if nxt in occupied:
            continue
        moves.append(m)
        coords.append(nxt)
        occupied.add(nxt)
        _grow(moves, coords, occupied, remaining - 1, turned or m != "R", out)
        occupied.discard(nxt)
        coords.pop()
        moves.pop()


def _walks_from_prefix(task):
    prefix, total_moves = task
    coords = [(0, 0)]
    for m in prefix:
        dx, dy = STEPS[m]
        coords.append((coords[-1][0] + dx, coords[-1][1] + dy))
    out = []
    _grow(list(prefix), coords, set(coords), total_moves - len(prefix), "U" in prefix, out)
    return out


def _canonical_walks(n, threads=None):
    total_moves = n - 1
    if total_moves == 0:
        return [""]
    depth = min(PREFIX_DEPTH, total_moves)
    prefixes = _walks_from_prefix(("R", depth)) if depth > 1 else ["R"]
    return [
        walk
        for chunk in parallel_map(_walks_from_prefix, [(p, total_moves) for p in prefixes], threads)
        for walk in chunk
    ]


def _check_limit(n, limit):
    if n < 1 or n > limit:
        raise LimitExceeded(n, limit)


def enumerate_structures(n, limit=STRUCTURE_LIMIT, threads=None):
    _check_limit(n, limit)
    bank = load_databank(n, threads)
    return (LatticeStructure(moves) for moves in bank.moves)


# --- Contact-map classes ---

class StructureDatabank:
    """All canonical walks of one length grouped by contact map."""

    def __init__(self, n, moves):
        self.n = n
        self.moves = moves
        self.pairs = [(i, j) for i in range(n) for j in range(i + 3, n) if (j - i) % 2 == 1]
        pair_index = {p: k for k, p in enumerate(self.pairs)}

        class_ids = {}
        class_of = np.empty(len(moves), dtype=np.int64)
        members = []
        for idx, m in enumerate(moves):
            key = contact_map(LatticeStructure(m)).contacts
            cls = class_ids.get(key)
            if cls is None:
                cls = class_ids[key] = len(members)
                members.append([])
            class_of[idx] = cls
            members[cls].append(idx)

        matrix = np.zeros((len(members), len(self.pairs)), dtype=np.float32)
        for key, cls in class_ids.items():
            for p in key:
                matrix[cls, pair_index[p]] = 1.0
        self.class_of = class_of
        self.members = members
        self.class_matrix = matrix
        self.class_sizes = np.array([len(m) for m in members], dtype=np.int64)
        self._pi = np.array([p[0] for p in self.pairs], dtype=np.int64)
        self._pj = np.array([p[1] for p in self.pairs], dtype=np.int64)

    def class_energies(self, bits):
        """E_HP of every sequence row in `bits` (B x n, 0/1) in every class -> (B x classes) ints."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim == 1:
            bits = bits[None, :]
        hh = (bits[:, self._pi] & bits[:, self._pj]).astype(np.float32)
        return -np.rint(hh @ self.class_matrix.T).astype(np.int64)


_DATABANKS = {}


def load_databank(n, threads=None):
    bank = _DATABANKS.get(n)
    if bank is None:
        moves = _canonical_walks(n, threads)
        logger.info("Enumerated %d canonical structures for N=%d", len(moves), n)
        bank = _DATABANKS[n] = StructureDatabank(n, moves)
        logger.info("N=%d: %d distinct contact maps", n, len(bank.members))
    return bank


def install_databank(bank):
    """Registers a databank built elsewhere, e.g. shipped to a worker process."""
    _DATABANKS[bank.n] = bank


def index_bits(start, stop, n):
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


# --- Folding ---

def fold_sequences(seqs, n_limit=STRUCTURE_LIMIT):
    seqs = list(seqs)
    if not seqs:
        return []
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        raise LengthMismatch(n, next(len(s) for s in seqs if len(s) != n))
    _check_limit(n, n_limit)
    bank = load_databank(n)

    energies = bank.class_energies([s.beads for s in seqs])
    results = []
    for row in energies:
        best = int(row.min())
        winners = np.flatnonzero(row == best)
        members = sorted(idx for cls in winners for idx in bank.members[cls])
        ground = tuple(bank.moves[idx] for idx in members)
        results.append(FoldResult(best, ground, len(ground) == 1))
    return results


def fold_sequence(seq, n_limit=STRUCTURE_LIMIT):
    return fold_sequences([seq], n_limit)[0]


# --- Designability ---

def _unique_ground_states(task):
    n, start, stop = task
    bank = load_databank(n)
    credited = []
    for lo in range(start, stop, SEQUENCE_CHUNK):
        hi = min(stop, lo + SEQUENCE_CHUNK)
        energies = bank.class_energies(index_bits(lo, hi, n))
        best = energies.min(axis=1)
        n_best = (energies == best[:, None]).sum(axis=1)
        winner = energies.argmin(axis=1)
        single = (n_best == 1) & (bank.class_sizes[winner] == 1)
        for row in np.flatnonzero(single):
            credited.append((lo + int(row), bank.members[winner[row]][0]))
    return credited


def designability(n, limit=DESIGNABILITY_LIMIT, threads=None):
    """
    Ranks every structure of length n by how many of the 2^n sequences fold
    to it uniquely.

    Returns:
        DesignabilityRanking: one record per canonical structure, most designable first
    """
    _check_limit(n, limit)
    # 1. Walks and contact-map classes
    bank = load_databank(n, threads)

    # 2. Score sequence blocks against all classes in parallel
    blocks = split_range(1 << n, max(1, threads or 1) * 4)

    counts = np.zeros(len(bank.moves), dtype=np.int64)
    sequences = {}
    tasks = [(n, a, b) for a, b in blocks]
    # Each worker receives the databank once, through the pool initializer.
    for chunk in parallel_map(_unique_ground_states, tasks, threads, initializer=install_databank, initargs=(bank,)):
        for seq_index, struct_index in chunk:
            counts[struct_index] += 1
            sequences.setdefault(struct_index, []).append(HpSequence.from_index(seq_index, n))

    # 3. Rank: descending count, ties in canonical move order
    order = sorted(range(len(bank.moves)), key=lambda k: (-counts[k], move_key(bank.moves[k])))
    records = [
        DesignabilityRecord(LatticeStructure(bank.moves[k]), int(counts[k]), tuple(sequences.get(k, ())))
        for k in order
    ]
    ranking = DesignabilityRanking(records, n)
    logger.info("N=%d: %.2f%% of sequences have a unique ground state", n, 100 * ranking.unique_fraction)
    return ranking


_TARGETS = {}


def most_designable(n, limit=DESIGNABILITY_LIMIT, threads=None):
    _check_limit(n, limit)
    if n not in _TARGETS:
        _TARGETS[n] = designability(n, limit, threads).most_designable()
    return _TARGETS[n]


# --- Boltzmann population of the target ---

def target_population(seq, target, beta, limit=STRUCTURE_LIMIT):
    if len(seq) != target.n:
        raise LengthMismatch(target.n, len(seq))
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    _check_limit(target.n, limit)
    bank = load_databank(target.n)

    per_class = bank.class_energies(seq.beads)[0]
    per_structure = per_class[bank.class_of].astype(np.float64)
    e_min = per_structure.min()
    z = np.exp(-beta * (per_structure - e_min)).sum()
    e_target = hp_energy(contact_map(canonicalize(target)), seq)
    return float(np.exp(-beta * (e_target - e_min)) / z)
