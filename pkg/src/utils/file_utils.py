import json
import logging
import os
from fractions import Fraction

from src.encoding.ising import IsingProblem, format_value
from src.errors import HpDesignError
from src.lattice.core import STEPS, ContactMap, HpSequence, parse_structure

logger = logging.getLogger(__name__)


def _content_lines(path):
    """(line_no, text) of non-blank lines with '#' comments removed."""
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield line_no, line


def validate_structure_file(path):
    """
    Checks a structure file: a move-string over U/D/L/R that does not
    self-intersect, optionally followed by one H/P sequence line of matching
    length. Comments and blank lines are ignored.

    Returns:
        tuple: (is_ok (bool), reason (str or None))
    """
    if not os.path.isfile(path):
        return False, f"Structure file does not exist: {path}"

    lines = list(_content_lines(path))
    if not lines:
        return False, f"Structure file '{path}' contains no move-string."
    if len(lines) > 2:
        return False, (f"Structure file '{path}' has {len(lines)} lines; "
                       "expected a move-string and at most one sequence.")

    line_no, moves = lines[0]
    bad = [c for c in moves.upper() if c not in STEPS]
    if bad:
        return False, f"Line {line_no}: invalid move {bad[0]!r}. Expected only U, D, L, R."
    try:
        structure = parse_structure(moves)
    except HpDesignError as e:
        return False, f"Line {line_no}: {e}"

    if len(lines) == 2:
        line_no, text = lines[1]
        bad = [c for c in text.upper() if c not in "HP"]
        if bad:
            return False, f"Line {line_no}: invalid residue {bad[0]!r}. Expected only H, P."
        if len(text) != structure.n:
            return False, f"Line {line_no}: sequence has {len(text)} residues, the structure has {structure.n} beads."
    return True, None


def read_structure_file(path):
    """
    Returns:
        tuple: (LatticeStructure, HpSequence or None)
    """
    lines = [line for _, line in _content_lines(path)]
    structure = parse_structure(lines[0])
    sequence = HpSequence.from_text(lines[1]) if len(lines) > 1 else None
    return structure, sequence


def validate_contact_map_file(path):
    """
    Checks a contact-map file: the bead count n on the first line, then one
    "i j" pair (0-based) per line. Pairs must be distinct, in range and must
    not join consecutive beads.

    Returns:
        tuple: (is_ok (bool), reason (str or None))
    """
    if not os.path.isfile(path):
        return False, f"Contact-map file does not exist: {path}"

    lines = list(_content_lines(path))
    if not lines:
        return False, f"Contact-map file '{path}' is empty."
    line_no, header = lines[0]
    try:
        n = int(header)
    except ValueError:
        return False, f"Line {line_no}: expected the bead count, got {header!r}."
    if n < 1:
        return False, f"Line {line_no}: bead count must be positive, got {n}."

    seen = set()
    for line_no, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            return False, f"Line {line_no}: expected 'i j', got {line!r}."
        try:
            i, j = sorted(int(p) for p in parts)
        except ValueError:
            return False, f"Line {line_no}: could not parse {line!r}."
        if i < 0 or j >= n:
            return False, f"Line {line_no}: pair ({i}, {j}) outside beads 0..{n - 1}."
        if j - i < 2:
            return False, f"Line {line_no}: pair ({i}, {j}) is not a contact between non-consecutive beads."
        if (i, j) in seen:
            return False, f"Line {line_no}: pair ({i}, {j}) given twice."
        seen.add((i, j))
    return True, None


def read_contact_map_file(path):
    lines = [line for _, line in _content_lines(path)]
    n = int(lines[0])
    pairs = frozenset(tuple(sorted(int(p) for p in line.split())) for line in lines[1:])
    cmap = ContactMap(n, pairs)
    if not cmap.has_lattice_parity():
        logger.warning("Contact map in %s has pairs an even number of beads apart; "
                       "it cannot come from a square-lattice walk", path)
    return cmap


def write_ising_file(problem, path):
    """
    Writes "h i value", "J i j value" and "offset value" lines with exact
    values (decimal when terminating, p/q otherwise). Every field is written,
    zeros included, so the spin count is recoverable.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, v in enumerate(problem.h):
            f.write(f"h {i} {format_value(v)}\n")
        for i, j, v in problem.couplers():
            if v != 0:
                f.write(f"J {i} {j} {format_value(v)}\n")
        f.write(f"offset {format_value(problem.offset)}\n")


def validate_ising_file(path):
    """
    Returns:
        tuple: (is_ok (bool), reason (str or None))
    """
    if not os.path.isfile(path):
        return False, f"Ising file does not exist: {path}"

    fields = set()
    couplers = []
    offsets = 0
    for line_no, line in _content_lines(path):
        parts = line.split()
        kind = parts[0]
        expected = {"h": 3, "J": 4, "offset": 2}.get(kind)
        if expected is None:
            return False, f"Line {line_no}: unknown record {kind!r}. Expected 'h', 'J' or 'offset'."
        if len(parts) != expected:
            return False, f"Line {line_no}: '{kind}' takes {expected - 1} values, got {len(parts) - 1}."
        try:
            Fraction(parts[-1])
            indices = [int(p) for p in parts[1:-1]]
        except ValueError:
            return False, f"Line {line_no}: could not parse {line!r}."
        if any(i < 0 for i in indices):
            return False, f"Line {line_no}: negative spin index."
        if kind == "h":
            if indices[0] in fields:
                return False, f"Line {line_no}: field h {indices[0]} given twice."
            fields.add(indices[0])
        elif kind == "J":
            if indices[0] >= indices[1]:
                return False, f"Line {line_no}: couplers must be written with i < j."
            couplers.append((line_no, indices[1]))
        else:
            offsets += 1

    if not fields:
        return False, "No 'h' records found."
    n = max(fields) + 1
    if fields != set(range(n)):
        missing = sorted(set(range(n)) - fields)
        return False, f"Missing field records for spins {missing}."
    for line_no, j in couplers:
        if j >= n:
            return False, f"Line {line_no}: coupler index {j} beyond the {n} spins."
    if offsets > 1:
        return False, "More than one 'offset' record."
    return True, None


def read_ising_file(path):
    h, couplers, offset = {}, {}, Fraction(0)
    for _, line in _content_lines(path):
        parts = line.split()
        if parts[0] == "h":
            h[int(parts[1])] = Fraction(parts[2])
        elif parts[0] == "J":
            couplers[(int(parts[1]), int(parts[2]))] = Fraction(parts[3])
        else:
            offset = Fraction(parts[1])
    n = len(h)
    J = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), v in couplers.items():
        J[i][j] = v
    return IsingProblem(n, tuple(h[i] for i in range(n)), tuple(tuple(row) for row in J), offset)


def write_json(data, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")


def write_csv(frame, path):
    frame.to_csv(path, index=False, lineterminator="\n")
