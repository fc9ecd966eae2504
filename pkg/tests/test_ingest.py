import numpy as np
import pytest
from scipy.io import wavfile

from kprofile import InvalidConfig, TimeSeriesCube
from kprofile.errors import ChannelMismatch, IncompleteGrid, ParseError, TooShort, UnsupportedFormat
from kprofile.ingest import (AudioWindowConfig, CsvCubeSpec, decimate, file_sha256, load_audio_windows,
                             load_cube, load_matrix, provenance, read_wav, save_cube, window_points,
                             write_wav)


def _write(path, text):
    path.write_text(text)
    return path


CUBE_CSV = """time,site,a,b
0,x,1,2
0,y,3,4
0,z,5,6
1,x,7,8
1,y,9,10
1,z,11,12
"""


def test_cube_2x3x2(tmp_path):
    p = _write(tmp_path / "c.csv", CUBE_CSV)
    cube = load_cube(CsvCubeSpec(p, "time", "site", ("a", "b")))
    assert (cube.T, cube.P, cube.v) == (2, 3, 2)
    assert np.array_equal(cube.samples[1, 2], [11, 12])
    assert cube.dt_label == "c"


def test_cube_row_order_and_numeric_sort(tmp_path):
    lines = CUBE_CSV.strip().split("\n")
    p = _write(tmp_path / "c.csv", "\n".join([lines[0]] + lines[:0:-1]) + "\n")
    cube = load_cube(CsvCubeSpec(p, "time", "site", ("b",)))
    assert np.array_equal(cube.samples[:, :, 0], [[2, 4, 6], [8, 10, 12]])
    p2 = _write(tmp_path / "n.csv", "t,s,v\n10,1,1\n2,1,2\n10,2,3\n2,2,4\n")
    assert np.array_equal(load_cube(CsvCubeSpec(p2, "t", "s", ("v",))).samples[:, :, 0],
                          [[2, 4], [1, 3]])


def test_cube_incomplete(tmp_path):
    p = _write(tmp_path / "c.csv", "\n".join(CUBE_CSV.strip().split("\n")[:-1]) + "\n")
    with pytest.raises(IncompleteGrid, match="1.*z"):
        load_cube(CsvCubeSpec(p, "time", "site", ("a", "b")))


@pytest.mark.parametrize("text, where", [
    ("time,site,a\n0,x,1\n0,y,oops\n", ":3"),
    ("time,site,a\n0,x,1\n0,y\n", ":3"),
    ("time,site,a\n0,x,1\n0,x,2\n", ":3"),
    ("time,site,a\n0,x,nan\n", ":2"),
    ("time,site\n0,x\n", "lacks"),
    ("", "empty"),
    ("time,site,a\n", "no data"),
])
def test_cube_parse_errors(tmp_path, text, where):
    p = _write(tmp_path / "bad.csv", text)
    with pytest.raises(ParseError, match=where):
        load_cube(CsvCubeSpec(p, "time", "site", ("a",)))


def test_cube_spec_validation(tmp_path):
    with pytest.raises(InvalidConfig):
        CsvCubeSpec(tmp_path, "t", "s", ())
    with pytest.raises(InvalidConfig):
        CsvCubeSpec(tmp_path, "t", "s", ("a", "a"))
    with pytest.raises(ParseError):
        load_cube(CsvCubeSpec(tmp_path / "missing.csv", "t", "s", ("a",)))


def test_cube_save_load_round_trip(tmp_path):
    cube = TimeSeriesCube(np.random.default_rng(0).standard_normal((4, 5, 3)))
    spec = save_cube(cube, tmp_path / "cube.csv")
    back = load_cube(spec)
    assert np.array_equal(back.samples, cube.samples)


def test_load_matrix(tmp_path):
    p = _write(tmp_path / "m.csv", "x,y\n1,2\n3,4\n5,6\n")
    d = load_matrix(p)
    assert (d.N, d.n, d.label) == (3, 2, "m")
    with pytest.raises(ParseError, match=":2"):
        load_matrix(_write(tmp_path / "b.csv", "1,2\n3,x\n"))
    with pytest.raises(ParseError):
        load_matrix(_write(tmp_path / "r.csv", "1,2\n3\n"))
    with pytest.raises(ParseError):
        load_matrix(_write(tmp_path / "one.csv", "1,2\n"))


# -------------------------------------------------------------------- audio

def test_mono_ramp_disjoint_windows(tmp_path):
    p = tmp_path / "ramp.wav"
    wavfile.write(p, 1000, np.arange(100, dtype=np.float64))
    d = load_audio_windows(p, AudioWindowConfig(decimation=1, window_len=10, hop=10))
    assert (d.N, d.n) == (10, 10)
    assert np.array_equal(d.points[0], np.arange(10.0))
    assert np.array_equal(d.points[-1], np.arange(90.0, 100.0))


def test_stereo_48k_dimension(tmp_path):
    p = tmp_path / "s.wav"
    rng = np.random.default_rng(0)
    write_wav(p, 48000, 0.3 * rng.standard_normal((48000 * 20, 2)))
    d = load_audio_windows(p, AudioWindowConfig(decimation=100, window_len=5000))
    assert d.n == 10_000
    assert d.N == (9600 - 5000) // 2500 + 1


def test_sine_decimation_matches_closed_form():
    fs, D, f = 48000, 100, 1.0
    t = np.arange(2 * fs) / fs
    y = decimate(np.sin(2 * np.pi * f * t)[:, None], D)[:, 0]
    # block mean of a sine is a sine at the block centres, scaled by a Dirichlet kernel
    gain = np.sin(np.pi * f * D / fs) / (D * np.sin(np.pi * f / fs))
    centres = (np.arange(len(y)) * D + (D - 1) / 2) / fs
    assert len(y) == 960  # 480 Hz for 2 seconds
    assert np.sqrt(np.mean((y - gain * np.sin(2 * np.pi * f * centres)) ** 2)) < 1e-6
    picked = decimate(np.sin(2 * np.pi * f * t)[:, None], D, raw_stride=True)[:, 0]
    assert np.sqrt(np.mean((picked - np.sin(2 * np.pi * f * np.arange(960) / 480)) ** 2)) < 1e-6


def test_sine_via_float_wav(tmp_path):
    fs = 48000
    p = tmp_path / "sine.wav"
    wavfile.write(p, fs, np.sin(2 * np.pi * np.arange(2 * fs) / fs).astype(np.float32))
    d = load_audio_windows(p, AudioWindowConfig(decimation=100, window_len=480, hop=480))
    gain = np.sin(np.pi * 100 / fs) / (100 * np.sin(np.pi / fs))
    ref = gain * np.sin(2 * np.pi * (np.arange(480) * 100 + 49.5) / fs)
    assert np.sqrt(np.mean((d.points[0] - ref) ** 2)) < 1e-6


def test_constant_signal_decimates_exactly():
    y = decimate(np.full((1000, 2), 0.25), 7)
    assert y.shape == (142, 2) and np.max(np.abs(y - 0.25)) < 1e-12


@pytest.mark.parametrize("L, w, h", [(10, 10, 1), (11, 10, 1), (100, 7, 3), (50, 5, 50)])
def test_window_count_formula(L, w, h):
    sig = np.random.default_rng(L).standard_normal((L, 3))
    pts = window_points(sig, w, h)
    assert pts.shape == ((L - w) // h + 1, 3 * w)
    # channel-major: first w entries are channel 0
    k = len(pts) - 1
    assert np.array_equal(pts[k, :w], sig[k * h:k * h + w, 0])
    assert np.array_equal(pts[k, w:2 * w], sig[k * h:k * h + w, 1])


def test_audio_errors(tmp_path):
    p = tmp_path / "mono.wav"
    write_wav(p, 8000, np.zeros(1000))
    with pytest.raises(ChannelMismatch):
        load_audio_windows(p, AudioWindowConfig(decimation=1, window_len=10, channels=2))
    with pytest.raises(TooShort):
        load_audio_windows(p, AudioWindowConfig(decimation=100, window_len=11))
    junk = _write(tmp_path / "junk.wav", "not a wave file")
    with pytest.raises(UnsupportedFormat):
        read_wav(junk)
    with pytest.raises(InvalidConfig):
        AudioWindowConfig(decimation=0)
    with pytest.raises(InvalidConfig):
        AudioWindowConfig(hop=0)


def test_pcm_scaling(tmp_path):
    for dtype, value, expected in [(np.int16, -32768, -1.0), (np.uint8, 192, 0.5),
                                   (np.int32, 1 << 30, 0.5)]:
        p = tmp_path / f"{np.dtype(dtype).name}.wav"
        wavfile.write(p, 8000, np.full(20, value, dtype=dtype))
        rate, x = read_wav(p)
        assert rate == 8000 and x.shape == (20, 1) and np.all(x == expected)


def test_default_hop_and_provenance(tmp_path):
    cfg = AudioWindowConfig(window_len=5000)
    assert cfg.step == 2500 and cfg.to_dict()["resolved_hop"] == 2500
    p = _write(tmp_path / "m.csv", "1,2\n3,4\n")
    prov = provenance(p, cfg)
    assert prov["sha256"] == file_sha256(p) and len(prov["sha256"]) == 64
    assert prov["config"]["window_len"] == 5000
