"""Chord label text syntax: ``ROOT[:QUALITY][(EXT{,EXT})][/BASS]``.

Roots are note letters A-G with an optional ``#`` or ``b``; ``N`` and ``X``
both mean no chord. The bass note after ``/`` is validated and dropped.
"""
import re
from functools import lru_cache
from typing import FrozenSet

from app.exceptions import ChordParseError
from app.models.chords import (
    NO_CHORD, ChordLabel, Quality, SeventhClass, ThirdClass,
)

_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_ROOT_RE = re.compile(r"^([A-G])([#b]?)")
_EXTENSION_RE = re.compile(r"^(add)?([#b]*)(\d{1,2})$")
_BASS_RE = re.compile(r"^([#b]*\d{1,2}|[A-G][#b]?)$")

QUALITY_INTERVALS = {
    Quality.MAJ: (0, 4, 7),
    Quality.MIN: (0, 3, 7),
    Quality.MAJ7: (0, 4, 7, 11),
    Quality.MIN7: (0, 3, 7, 10),
    Quality.DOM7: (0, 4, 7, 10),
    Quality.MINMAJ7: (0, 3, 7, 11),
    Quality.DIM: (0, 3, 6),
    Quality.AUG: (0, 4, 8),
    Quality.SUS2: (0, 2, 7),
    Quality.SUS4: (0, 5, 7),
    Quality.DIM7: (0, 3, 6, 9),
    Quality.HDIM7: (0, 3, 6, 10),
    Quality.MAJ6: (0, 4, 7, 9),
    Quality.MIN6: (0, 3, 7, 9),
}

_THIRDS = {
    Quality.MAJ: ThirdClass.SHARP3,
    Quality.MAJ7: ThirdClass.SHARP3,
    Quality.DOM7: ThirdClass.SHARP3,
    Quality.AUG: ThirdClass.SHARP3,
    Quality.MAJ6: ThirdClass.SHARP3,
    Quality.MIN: ThirdClass.FLAT3,
    Quality.MIN7: ThirdClass.FLAT3,
    Quality.MINMAJ7: ThirdClass.FLAT3,
    Quality.DIM: ThirdClass.FLAT3,
    Quality.DIM7: ThirdClass.FLAT3,
    Quality.HDIM7: ThirdClass.FLAT3,
    Quality.MIN6: ThirdClass.FLAT3,
    Quality.SUS2: ThirdClass.STAR3,
    Quality.SUS4: ThirdClass.STAR3,
}

# dim7 has a diminished seventh, which is neither a major nor a minor seventh
_SEVENTHS = {
    Quality.MAJ7: SeventhClass.SHARP7,
    Quality.MINMAJ7: SeventhClass.SHARP7,
    Quality.DOM7: SeventhClass.FLAT7,
    Quality.MIN7: SeventhClass.FLAT7,
    Quality.HDIM7: SeventhClass.FLAT7,
}

# Scale degree -> semitones above the root. Degrees 1 and 3 are not valid
# extensions: the root is always present and the third belongs to the quality.
_DEGREE_SEMITONES = {2: 2, 4: 5, 5: 7, 6: 9, 7: 11, 9: 14, 11: 17, 13: 21}


def _root_pitch_class(letter: str, accidental: str) -> int:
    offset = {"": 0, "#": 1, "b": -1}[accidental]
    return (_LETTER_PC[letter] + offset) % 12


def extension_semitones(token: str) -> int:
    """Semitones above the root for an extension token such as ``b9``"""
    match = _EXTENSION_RE.match(token)
    if not match:
        raise ChordParseError(f"malformed extension {token!r}", token)
    _, accidentals, degree = match.groups()
    degree = int(degree)
    if degree not in _DEGREE_SEMITONES:
        raise ChordParseError(f"unsupported extension degree {token!r}", token)
    semitones = _DEGREE_SEMITONES[degree] + accidentals.count("#") - accidentals.count("b")
    if semitones % 12 in (3, 4):
        raise ChordParseError(f"extension {token!r} collides with the chord's third", token)
    return semitones


def _parse_extensions(text: str, fragment: str) -> tuple:
    if not text.endswith(")"):
        raise ChordParseError(f"unterminated extension list in {fragment!r}", fragment)
    inner = text[1:-1]
    tokens = [token.strip() for token in inner.split(",")]
    if not inner.strip() or any(not token for token in tokens):
        raise ChordParseError(f"empty extension in {fragment!r}", fragment)
    for token in tokens:
        extension_semitones(token)
    return tuple(tokens)


def parse_label(text: str) -> ChordLabel:
    """Parse a chord label, e.g. ``G:maj7``, ``C#:min/b3``, ``N``"""
    if text is None or not text.strip():
        raise ChordParseError("empty chord label", "")
    raw = text.strip()
    if raw in ("N", "X"):
        return NO_CHORD

    body, slash, bass = raw.partition("/")
    if slash:
        if not _BASS_RE.match(bass):
            raise ChordParseError(f"malformed bass {bass!r}", bass)

    match = _ROOT_RE.match(body)
    if not match:
        fragment = body[:1] or raw
        raise ChordParseError(f"invalid root note {fragment!r}", fragment)
    root = _root_pitch_class(*match.groups())
    rest = body[match.end():]

    extensions = ()
    if rest.startswith(":"):
        quality_text, paren, ext_text = rest[1:].partition("(")
        if not quality_text:
            raise ChordParseError(f"empty quality in {raw!r}", rest)
        try:
            quality = Quality(quality_text)
        except ValueError:
            raise ChordParseError(f"unknown quality {quality_text!r}", quality_text) from None
        if paren:
            extensions = _parse_extensions(paren + ext_text, rest)
    elif rest.startswith("("):
        quality = Quality.MAJ
        extensions = _parse_extensions(rest, rest)
    elif not rest:
        quality = Quality.MAJ
    else:
        raise ChordParseError(f"unexpected text {rest!r} after root", rest)

    return ChordLabel(root=root, quality=quality, extensions=extensions)


def render_label(label: ChordLabel) -> str:
    return label.text


@lru_cache(maxsize=4096)
def third_class(label: ChordLabel) -> ThirdClass:
    if label.is_no_chord:
        return ThirdClass.STAR3
    return _THIRDS[label.quality]


@lru_cache(maxsize=4096)
def seventh_class(label: ChordLabel) -> SeventhClass:
    if label.is_no_chord:
        return SeventhClass.STAR7
    seventh = _SEVENTHS.get(label.quality, SeventhClass.STAR7)
    if seventh is SeventhClass.STAR7:
        if "7" in label.extensions:
            return SeventhClass.SHARP7
        if "b7" in label.extensions:
            return SeventhClass.FLAT7
    return seventh


@lru_cache(maxsize=4096)
def pitch_classes(label: ChordLabel) -> FrozenSet[int]:
    if label.is_no_chord:
        return frozenset()
    intervals = list(QUALITY_INTERVALS[label.quality])
    intervals.extend(extension_semitones(token) for token in label.extensions)
    return frozenset((label.root + interval) % 12 for interval in intervals)


def transpose(label: ChordLabel, semitones: int) -> ChordLabel:
    if label.is_no_chord:
        return label
    return label.model_copy(update={"root": (label.root + semitones) % 12})
