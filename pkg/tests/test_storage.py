import numpy as np
import pytest

from app.exceptions import AnnotationError, AudioFormatError, CorpusError, ModelFormatError
from app.models.annotations import CorpusManifest, SongEntry, SplitSettings
from app.models.audio import AudioBuffer, CqtConfig
from app.models.network import MlpConfig
from app.models.profiles import HIP_SIZE
from app.storage import Storage, cqt_cache_key, decode_cqt, encode_cqt
from app.utils.audio_cqt import compute_cqt
from app.utils.mlp_core import init_model

CONFIG = CqtConfig(hop=2048)


@pytest.fixture
def wav(tmp_path, rng):
    audio = AudioBuffer(samples=rng.uniform(-0.5, 0.5, 22050), sample_rate=22050)
    path = tmp_path / "song.wav"
    Storage.write_audio(path, audio)
    return path


def test_cqt_cache_file_format(wav):
    cqt = compute_cqt(Storage.read_audio(wav), CONFIG)
    data = encode_cqt(cqt)
    assert data[:4] == b"CQTF"
    decoded = decode_cqt(data)
    assert np.array_equal(decoded.frames, cqt.frames)
    assert decoded.config == CONFIG
    assert np.array_equal(decoded.frame_times, cqt.frame_times)


@pytest.mark.parametrize("damage", [
    lambda data: data[:10],
    lambda data: b"XXXX" + data[4:],
    lambda data: data[:-8],
])
def test_damaged_cache_files(wav, damage):
    data = encode_cqt(compute_cqt(Storage.read_audio(wav), CONFIG))
    with pytest.raises(AudioFormatError):
        decode_cqt(damage(data))


def test_song_cqt_uses_the_cache(wav, tmp_path):
    cache = tmp_path / "cache"
    first = Storage.song_cqt(wav, CONFIG, cache)
    key = cqt_cache_key(Storage.read_audio(wav), CONFIG)
    cache_file = cache / f"{key}.cqt"
    assert cache_file.is_file()
    assert np.array_equal(Storage.song_cqt(wav, CONFIG, cache).frames, first.frames)

    cache_file.write_bytes(b"garbage")
    assert np.array_equal(Storage.song_cqt(wav, CONFIG, cache).frames, first.frames)
    assert cache_file.read_bytes()[:4] == b"CQTF"


def test_cache_key_depends_on_config(wav):
    audio = Storage.read_audio(wav)
    assert cqt_cache_key(audio, CONFIG) != cqt_cache_key(audio, CqtConfig(hop=4096))


def test_manifest_round_trip(tmp_path):
    manifest = CorpusManifest(
        songs=[SongEntry(song_id="s1", audio="audio/s1.wav", annotations={"a": "labels/a/s1.lab"})],
        split=SplitSettings(seed=9, ratios=(0.6, 0.2, 0.2), song_wise=True),
        reference_annotator="a",
    )
    Storage.write_manifest(tmp_path / "manifest.json", manifest)
    loaded = Storage.read_manifest(tmp_path / "manifest.json")
    assert loaded.root == tmp_path
    assert loaded.split == manifest.split
    assert loaded.resolve(loaded.songs[0].audio) == tmp_path / "audio" / "s1.wav"
    assert "root" not in (tmp_path / "manifest.json").read_text()


def test_invalid_manifest(tmp_path):
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(CorpusError):
        Storage.read_manifest(tmp_path / "manifest.json")


def test_lab_errors_name_the_file(tmp_path):
    path = tmp_path / "bad.lab"
    path.write_text("0 1 C:maj\n1 2 C:nope\n")
    with pytest.raises(AnnotationError) as info:
        Storage.read_lab(path, "a", "s")
    assert str(path) in str(info.value)
    assert info.value.line == 2


def test_model_file_and_history(tmp_path):
    model = init_model(MlpConfig(layer_sizes=[4, 3, HIP_SIZE]))
    path = tmp_path / "net.model"
    Storage.save_model(path, model)
    assert (tmp_path / "net.history.tsv").read_text().startswith("epoch\t")
    loaded = Storage.load_model(path, expected_layer_sizes=[4, 3, HIP_SIZE])
    assert all(np.array_equal(a, b) for a, b in zip(loaded.weights, model.weights))

    path.write_bytes(b"not a model")
    with pytest.raises(ModelFormatError):
        Storage.load_model(path)
    with pytest.raises(OSError):
        Storage.load_model(tmp_path / "missing.model")
