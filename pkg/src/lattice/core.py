"""
2D square-lattice HP chains: structures, contact maps, sequences and energies.

A structure travels as its move-string over {U, D, L, R}; bead coordinates are
derived from (0, 0). Energies are exact: ints for E_HP, Fractions for the
design energy with its composition penalty.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from src.errors import (
    CompositionOutOfRange,
    InvalidCharacter,
    InvalidContactMap,
    LengthMismatch,
    SelfIntersection,
)

STEPS = {"U": (0, 1), "D": (0, -1), "L": (-1, 0), "R": (1, 0)}

# Canonical forms compare moves in this order, so the canonical representative
# of every class starts with R and turns U first.
MOVE_ORDER = "RULD"
_MOVE_RANK = {m: i for i, m in enumerate(MOVE_ORDER)}

_ROTATE = {"R": "U", "U": "L", "L": "D", "D": "R"}
_REFLECT = {"R": "R", "L": "L", "U": "D", "D": "U"}


def to_fraction(value):
    """Exact rational from int/str/Fraction; floats go through their repr so 1.1 -> 11/10."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _walk(moves):
    coords = [(0, 0)]
    seen = {(0, 0)}
    x, y = 0, 0
    for pos, m in enumerate(moves):
        if m not in STEPS:
            raise InvalidCharacter(m, pos)
        dx, dy = STEPS[m]
        x, y = x + dx, y + dy
        if (x, y) in seen:
            raise SelfIntersection(pos + 1)
        seen.add((x, y))
        coords.append((x, y))
    return tuple(coords)


@dataclass(frozen=True)
class LatticeStructure:
    moves: str
    coords: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", _walk(self.moves))

    def __len__(self):
        return len(self.moves) + 1

    @property
    def n(self):
        return len(self.moves) + 1


@dataclass(frozen=True)
class ContactMap:
    n: int
    contacts: frozenset

    def __post_init__(self):
        if self.n < 0:
            raise InvalidContactMap(f"Negative bead count {self.n}")
        pairs = frozenset((int(i), int(j)) for i, j in self.contacts)
        for i, j in pairs:
            if not (0 <= i < j < self.n):
                raise InvalidContactMap(f"Pair ({i}, {j}) out of range for n={self.n}")
            if j <= i + 1:
                raise InvalidContactMap(f"Pair ({i}, {j}) joins consecutive beads")
        object.__setattr__(self, "contacts", pairs)

    def __len__(self):
        return len(self.contacts)

    def sorted_pairs(self):
        return sorted(self.contacts)

    def has_lattice_parity(self):
        """True when every contact joins beads an odd number of steps apart."""
        return all((j - i) % 2 == 1 for i, j in self.contacts)


@dataclass(frozen=True)
class HpSequence:
    beads: tuple

    def __post_init__(self):
        beads = tuple(int(b) for b in self.beads)
        if any(b not in (0, 1) for b in beads):
            raise ValueError(f"Beads must be 0/1, got {self.beads}")
        object.__setattr__(self, "beads", beads)

    @classmethod
    def from_text(cls, text):
        text = text.strip().upper()
        beads = []
        for pos, c in enumerate(text):
            if c == "H":
                beads.append(1)
            elif c == "P":
                beads.append(0)
            else:
                raise InvalidCharacter(c, pos)
        return cls(tuple(beads))

    @classmethod
    def from_index(cls, index, n):
        """Basis-state index to sequence; bit i of the index is s_i."""
        return cls(tuple((index >> i) & 1 for i in range(n)))

    def to_index(self):
        return sum(b << i for i, b in enumerate(self.beads))

    @property
    def text(self):
        return "".join("H" if b else "P" for b in self.beads)

    @property
    def n_h(self):
        return sum(self.beads)

    def __len__(self):
        return len(self.beads)

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class DesignEnergyModel:
    cmap: ContactMap
    lam: Fraction
    n_h: int

    def __post_init__(self):
        lam = to_fraction(self.lam)
        if lam < 0:
            raise ValueError(f"Lagrange parameter must be nonnegative, got {lam}")
        if not (0 <= self.n_h <= self.cmap.n):
            raise CompositionOutOfRange(self.n_h, self.cmap.n)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self):
        return self.cmap.n


def parse_structure(text):
    return LatticeStructure(text.strip().upper())


def contact_map(structure):
    index = {xy: i for i, xy in enumerate(structure.coords)}
    contacts = set()
    for i, (x, y) in enumerate(structure.coords):
        for dx, dy in STEPS.values():
            j = index.get((x + dx, y + dy))
            if j is not None and j > i + 1:
                contacts.add((i, j))
    return ContactMap(structure.n, frozenset(contacts))


def hp_energy(cmap, seq):
    if len(seq) != cmap.n:
        raise LengthMismatch(cmap.n, len(seq))
    s = seq.beads
    return -sum(1 for i, j in cmap.contacts if s[i] and s[j])


def design_energy(model, seq):
    if len(seq) != model.n:
        raise LengthMismatch(model.n, len(seq))
    excess = seq.n_h - model.n_h
    return Fraction(hp_energy(model.cmap, seq)) + model.lam * excess * excess


def symmetry_images(moves):
    """All 8 dihedral images of a move-string (4 rotations, each optionally reflected)."""
    images = []
    for reflect in (False, True):
        current = "".join(_REFLECT[m] for m in moves) if reflect else moves
        for _ in range(4):
            images.append(current)
            current = "".join(_ROTATE[m] for m in current)
    return images


def move_key(moves):
    return tuple(_MOVE_RANK[m] for m in moves)


def canonicalize(structure):
    best = min(symmetry_images(structure.moves), key=move_key)
    if best == structure.moves:
        return structure
    return LatticeStructure(best)
