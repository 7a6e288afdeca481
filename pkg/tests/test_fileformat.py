from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from conftest import EXAMPLES_DIR, space
from tropicore.errors import ParseError
from tropicore.fileformat import (
    dumps_cocycle,
    dumps_cycle,
    dumps_space,
    fmt_rational,
    loads_cocycle,
    loads_cycle,
    loads_space,
    parse_coordinate,
    read_space,
    spaces_equal,
    write_space,
)
from tropicore.homology import homology_table
from tropicore.library import BUNDLED

ALL = BUNDLED + ["tp-product:1,1", "torus:3,3"]


@pytest.mark.parametrize("name", ALL)
def test_round_trip_is_byte_identical(name):
    text = dumps_space(space(name))
    Y = loads_space(text)
    assert dumps_space(Y) == text
    assert spaces_equal(space(name), Y)


@pytest.mark.parametrize("path", sorted(Path(EXAMPLES_DIR).glob("*.trop")), ids=lambda p: p.stem)
def test_bundled_files_load(path):
    X = read_space(str(path))
    assert dumps_space(X) == path.read_text()


def test_write_then_read(tmp_path):
    X = space("nodal-genus2")
    p = tmp_path / "n.trop"
    write_space(X, str(p))
    Y = read_space(str(p))
    assert spaces_equal(X, Y)
    assert homology_table(Y).ranks() == homology_table(X).ranks()


def test_spaces_differ():
    assert not spaces_equal(space("elliptic:3"), space("elliptic:5"))


@given(st.fractions(max_denominator=10 ** 6))
def test_rational_round_trip(x):
    s = fmt_rational(x)
    assert "/" in s and parse_coordinate(s) == x


def test_minus_infinity():
    assert fmt_rational(parse_coordinate("-inf")) == "-inf"


class TestErrors:
    def test_truncated(self):
        text = dumps_space(space("elliptic:3"))
        with pytest.raises(ParseError) as exc:
            loads_space(text[: len(text) // 2])
        assert exc.value.line is not None and "line" in str(exc.value)

    def test_missing_header(self):
        with pytest.raises(ParseError) as exc:
            loads_space('{"faces": []}')
        assert exc.value.line == 1

    def test_bad_rational(self):
        text = dumps_space(space("elliptic:3")).replace('"dim": "1/1"', '"dim": "one"', 1)
        with pytest.raises(ParseError):
            loads_space(text)

    def test_zero_denominator(self):
        with pytest.raises(ParseError):
            parse_coordinate("1/0")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_space(str(tmp_path / "nope.trop"))

    def test_wrong_kind(self):
        with pytest.raises(ParseError):
            loads_cycle(dumps_space(space("tp:1")))


def test_cocycle_round_trip():
    tau = {("v2", "v0"): (Fraction(-1),), ("v0", "v2"): (Fraction(1),)}
    text = dumps_cocycle(tau)
    assert loads_cocycle(text) == tau
    assert dumps_cocycle(loads_cocycle(text)) == text


def test_cycle_round_trip():
    terms = {"e0": {(0,): Fraction(1)}, "e1": {(0,): Fraction(-2, 3)}}
    text = dumps_cycle(1, 1, terms)
    doc = loads_cycle(text)
    assert (doc["p"], doc["q"], doc["terms"]) == (1, 1, terms)
    assert dumps_cycle(doc["p"], doc["q"], doc["terms"]) == text
