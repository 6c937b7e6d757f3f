import json

import pandas as pd
import pytest

from src.lattice.core import ContactMap, HpSequence
from src.utils.file_utils import (
    read_contact_map_file,
    read_ising_file,
    read_structure_file,
    validate_contact_map_file,
    validate_ising_file,
    validate_structure_file,
    write_csv,
    write_ising_file,
    write_json,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_structure_file_with_comments(tmp_path):
    path = write(tmp_path, "t.txt", "# unit square\n\nRUL  # four beads\n")
    assert validate_structure_file(path) == (True, None)
    structure, sequence = read_structure_file(path)
    assert structure.moves == "RUL"
    assert sequence is None


def test_structure_file_with_sequence_line(tmp_path):
    path = write(tmp_path, "t.txt", "RUL\nhpph\n")
    assert validate_structure_file(path) == (True, None)
    structure, sequence = read_structure_file(path)
    assert structure.n == 4
    assert sequence == HpSequence.from_text("HPPH")


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "no move-string"),
        ("RUL\nHPPH\nHPPH\n", "at most one sequence"),
        ("RUL\nHPXH\n", "invalid residue 'X'"),
        ("RUL\nHPP\n", "3 residues"),
        ("RUX\n", "invalid move 'X'"),
        ("RLR\n", "self-intersects"),
    ],
)
def test_structure_file_errors(tmp_path, text, fragment):
    is_ok, reason = validate_structure_file(write(tmp_path, "t.txt", text))
    assert not is_ok
    assert fragment in reason


def test_missing_structure_file(tmp_path):
    is_ok, reason = validate_structure_file(str(tmp_path / "nope.txt"))
    assert not is_ok and "does not exist" in reason


def test_contact_map_file(tmp_path):
    path = write(tmp_path, "t.cmap", "# unit square\n4\n3 0\n")
    assert validate_contact_map_file(path) == (True, None)
    assert read_contact_map_file(path) == ContactMap(4, frozenset({(0, 3)}))


def test_contact_map_file_without_pairs(tmp_path):
    path = write(tmp_path, "t.cmap", "5\n")
    assert validate_contact_map_file(path) == (True, None)
    assert len(read_contact_map_file(path)) == 0


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "is empty"),
        ("four\n0 3\n", "expected the bead count"),
        ("0\n", "must be positive"),
        ("4\n0 3 1\n", "expected 'i j'"),
        ("4\n0 x\n", "could not parse"),
        ("4\n0 4\n", "outside beads 0..3"),
        ("4\n-1 2\n", "outside beads"),
        ("4\n1 2\n", "non-consecutive"),
        ("4\n0 3\n3 0\n", "given twice"),
    ],
)
def test_contact_map_file_errors(tmp_path, text, fragment):
    is_ok, reason = validate_contact_map_file(write(tmp_path, "t.cmap", text))
    assert not is_ok
    assert fragment in reason


def test_missing_contact_map_file(tmp_path):
    is_ok, reason = validate_contact_map_file(str(tmp_path / "nope.cmap"))
    assert not is_ok and "does not exist" in reason


def test_ising_file_layout(tmp_path, square_ising):
    path = str(tmp_path / "square.ising")
    write_ising_file(square_ising, path)
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[:4] == ["h 0 -0.25", "h 1 0", "h 2 0", "h 3 -0.25"]
    assert "J 0 3 0.3" in lines
    assert "J 0 1 0.55" in lines
    assert lines[-1] == "offset 0.85"


def test_ising_file_reads_back_exactly(tmp_path, square_ising):
    path = str(tmp_path / "square.ising")
    write_ising_file(square_ising, path)
    assert validate_ising_file(path) == (True, None)
    assert read_ising_file(path) == square_ising


def test_ising_file_accepts_ratios(tmp_path):
    path = write(tmp_path, "p.ising", "h 0 1/3\nh 1 -2\nJ 0 1 0.5\n")
    assert validate_ising_file(path) == (True, None)
    problem = read_ising_file(path)
    assert problem.n == 2
    assert problem.energy([1, 1]) == pytest.approx(1 / 3 - 2 + 0.5)
    assert problem.offset == 0


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("h 0 1\nx 0 1\n", "unknown record"),
        ("h 0 1 2\n", "takes 2 values"),
        ("h 0 abc\n", "could not parse"),
        ("h 0 1\nh 0 2\n", "given twice"),
        ("h 0 1\nh 1 1\nJ 1 0 1\n", "i < j"),
        ("h 0 1\nh 2 1\n", "Missing field records"),
        ("h 0 1\nh 1 1\nJ 0 5 1\n", "beyond the 2 spins"),
        ("h 0 1\noffset 1\noffset 2\n", "More than one"),
        ("offset 1\n", "No 'h' records"),
    ],
)
def test_ising_file_errors(tmp_path, text, fragment):
    is_ok, reason = validate_ising_file(write(tmp_path, "p.ising", text))
    assert not is_ok
    assert fragment in reason


def test_json_is_sorted_and_newline_terminated(tmp_path):
    path = tmp_path / "out.json"
    write_json({"b": 1, "a": [1, 2]}, str(path))
    text = path.read_text(encoding="utf-8")
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1, 2], "b": 1}


def test_csv_has_no_index(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(pd.DataFrame({"x": [1, 2]}), str(path))
    assert path.read_bytes() == b"x\n1\n2\n"
