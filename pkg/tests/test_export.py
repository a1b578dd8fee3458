import numpy as np
import pytest

from pdcsim.export import read_pgm, render_heatmap, sha256_file, write_csv, write_json


def test_heatmap_scaling(tmp_path):
    m = np.array([[0.0, 1.0], [2.0, 4.0]])
    render_heatmap(m, tmp_path / "a.pgm")
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n2 2\n255\n")
    np.testing.assert_array_equal(read_pgm(tmp_path / "a.pgm"), [[0, 64], [128, 255]])


def test_heatmap_row_major_shape(tmp_path):
    render_heatmap(np.arange(6.0).reshape(2, 3), tmp_path / "r.pgm")
    img = read_pgm(tmp_path / "r.pgm")
    assert img.shape == (2, 3)
    assert img[0, 0] == 0 and img[1, 2] == 255


def test_constant_heatmap_is_black(tmp_path):
    render_heatmap(np.full((4, 5), 3.0), tmp_path / "c.pgm")
    assert not read_pgm(tmp_path / "c.pgm").any()


def test_separable_gaussian_is_round_blob(tmp_path):
    x = np.linspace(-3, 3, 41)
    render_heatmap(np.exp(-np.add.outer(x**2, x**2)), tmp_path / "g.pgm")
    img = read_pgm(tmp_path / "g.pgm")
    assert img[20, 20] == 255
    np.testing.assert_array_equal(img, img.T)
    np.testing.assert_array_equal(img, img[::-1, ::-1])


def test_heatmap_deterministic_bytes(tmp_path):
    m = np.random.default_rng(1).random((16, 16))
    render_heatmap(m, tmp_path / "1.pgm")
    render_heatmap(m.copy(), tmp_path / "2.pgm")
    assert sha256_file(tmp_path / "1.pgm") == sha256_file(tmp_path / "2.pgm")


@pytest.mark.parametrize("bad", [np.zeros((0, 3)), np.zeros(4)])
def test_heatmap_rejects_empty_or_1d(tmp_path, bad):
    with pytest.raises(ValueError):
        render_heatmap(bad, tmp_path / "x.pgm")


def test_heatmap_io_error_surfaces(tmp_path):
    with pytest.raises(OSError):
        render_heatmap(np.eye(2), tmp_path / "missing" / "x.pgm")


def test_csv_round_trips_floats(tmp_path):
    vals = [0.1, 1 / 3, 1e-300, np.float64(2.5)]
    write_csv(tmp_path / "t.csv", ["x"], [(v,) for v in vals])
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "x"
    assert [float(s) for s in lines[1:]] == [float(v) for v in vals]


def test_json_nan_becomes_null(tmp_path):
    write_json(tmp_path / "j.json", {"b": np.nan, "a": np.arange(2), "c": np.float32(0.5)})
    assert (tmp_path / "j.json").read_text() == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": null,\n  "c": 0.5\n}\n'
