import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from app.config import settings
from app.models.chords import NO_CHORD, ChordLabel, Quality
from app.utils.chord_syntax import parse_label

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")

# extension tokens that never land on a third
EXTENSIONS = ("9", "b9", "11", "#11", "13", "b13", "add9", "6", "2", "4", "b7", "7")


@st.composite
def chord_labels(draw, allow_no_chord: bool = True) -> ChordLabel:
    if allow_no_chord and draw(st.integers(0, 12)) == 0:
        return NO_CHORD
    root = draw(st.integers(0, 11))
    quality = draw(st.sampled_from(list(Quality)))
    extensions = draw(st.lists(st.sampled_from(EXTENSIONS), max_size=2, unique=True))
    return ChordLabel(root=root, quality=quality, extensions=tuple(extensions))


@pytest.fixture
def table_labels():
    """The three labels and four-annotator frame of the worked example"""
    return {
        "G:maj7": parse_label("G:maj7"),
        "G:maj": parse_label("G:maj"),
        "G:minmaj7": parse_label("G:minmaj7"),
    }


@pytest.fixture
def frame_labels(table_labels):
    return [table_labels["G:maj7"], table_labels["G:maj"], table_labels["G:maj7"], table_labels["G:minmaj7"]]


@pytest.fixture
def tmp_settings(monkeypatch, tmp_path):
    """Small, quiet settings with the CQT cache under tmp_path"""
    monkeypatch.setattr(settings, "cache_dir", tmp_path / "cache")
    monkeypatch.setattr(settings, "progress", False)
    monkeypatch.setattr(settings, "context_radius", 1)
    monkeypatch.setattr(settings, "max_epochs", 3)
    monkeypatch.setattr(settings, "patience_epochs", 2)
    monkeypatch.setattr(settings, "batch_size", 64)
    return settings


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
