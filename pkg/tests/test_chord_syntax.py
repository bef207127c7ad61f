import pytest
from hypothesis import given, strategies as st

from app.exceptions import ChordParseError
from app.models.chords import NO_CHORD, Quality, SeventhClass, ThirdClass
from app.utils.chord_syntax import (
    parse_label, pitch_classes, render_label, seventh_class, third_class, transpose,
)
from tests.conftest import chord_labels


def test_parse_quality_and_root():
    label = parse_label("G:maj7")
    assert label.root == 7
    assert label.quality is Quality.MAJ7
    assert label.extensions == ()


@pytest.mark.parametrize("text", ["N", "X"])
def test_no_chord(text):
    assert parse_label(text) == NO_CHORD
    assert parse_label(text).is_no_chord


def test_inversion_is_discarded():
    label = parse_label("C#:min/b3")
    assert (label.root, label.quality) == (1, Quality.MIN)
    assert parse_label("C#:min/b3") == parse_label("C#:min")


def test_bare_root_is_major():
    assert parse_label("C") == parse_label("C:maj")
    assert parse_label("Bb").root == 10


def test_enharmonic_roots():
    assert parse_label("Db:min").root == parse_label("C#:min").root == 1
    assert parse_label("Cb:maj").root == 11


def test_extensions_are_canonical():
    label = parse_label("C:maj(b13,9)")
    assert label.extensions == ("9", "b13")
    assert label.text == "C:maj(9,b13)"


@pytest.mark.parametrize("text,fragment", [
    ("H:maj", "H"),
    ("C:foo", "foo"),
    ("C:", ":"),
])
def test_parse_errors_name_the_fragment(text, fragment):
    with pytest.raises(ChordParseError) as info:
        parse_label(text)
    assert info.value.fragment == fragment


@pytest.mark.parametrize("text", ["", "   ", "C:maj(", "C:maj()", "C:maj(3)", "C:maj(b10)", "Cmaj", "C:maj/Q"])
def test_malformed_labels(text):
    with pytest.raises(ChordParseError):
        parse_label(text)


@pytest.mark.parametrize("text,token", [("C:7(#9)", "#9"), ("C:maj(b11)", "b11"), ("D:min(#2)", "#2")])
def test_extensions_on_a_third_are_rejected(text, token):
    with pytest.raises(ChordParseError) as info:
        parse_label(text)
    assert info.value.fragment == token
    assert "third" in str(info.value)


@pytest.mark.parametrize("text,third,seventh", [
    ("G:maj7", ThirdClass.SHARP3, SeventhClass.SHARP7),
    ("G:maj", ThirdClass.SHARP3, SeventhClass.STAR7),
    ("G:minmaj7", ThirdClass.FLAT3, SeventhClass.SHARP7),
    ("A:7", ThirdClass.SHARP3, SeventhClass.FLAT7),
    ("C:sus4", ThirdClass.STAR3, SeventhClass.STAR7),
    ("B:hdim7", ThirdClass.FLAT3, SeventhClass.FLAT7),
    ("B:dim7", ThirdClass.FLAT3, SeventhClass.STAR7),
    ("E:aug", ThirdClass.SHARP3, SeventhClass.STAR7),
    ("N", ThirdClass.STAR3, SeventhClass.STAR7),
])
def test_interval_classes(text, third, seventh):
    label = parse_label(text)
    assert third_class(label) is third
    assert seventh_class(label) is seventh


def test_seventh_from_extension():
    assert seventh_class(parse_label("C:maj(7)")) is SeventhClass.SHARP7
    assert seventh_class(parse_label("C:sus4(b7)")) is SeventhClass.FLAT7


@pytest.mark.parametrize("text,expected", [
    ("C:maj", {0, 4, 7}),
    ("G:maj7", {7, 11, 2, 6}),
    ("N", set()),
    ("D:min(9)", {2, 5, 9, 4}),
])
def test_pitch_classes(text, expected):
    assert pitch_classes(parse_label(text)) == frozenset(expected)


@given(chord_labels())
def test_render_parse_round_trip(label):
    text = render_label(label)
    assert parse_label(text) == label
    assert render_label(parse_label(text)) == text


@given(chord_labels(allow_no_chord=False))
def test_third_matches_pitch_classes(label):
    pcs = pitch_classes(label)
    assert label.root in pcs
    third = third_class(label)
    assert ((label.root + 4) % 12 in pcs) == (third is ThirdClass.SHARP3)
    assert ((label.root + 3) % 12 in pcs) == (third is ThirdClass.FLAT3)


@given(chord_labels(), st.integers(-24, 24))
def test_transposition(label, k):
    moved = transpose(label, k)
    assert pitch_classes(moved) == frozenset((pc + k) % 12 for pc in pitch_classes(label))
    assert third_class(moved) is third_class(label)
    assert seventh_class(moved) is seventh_class(label)
