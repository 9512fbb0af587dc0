import numpy as np
import pytest

from mmlab import AlgorithmSpec, Dataset, make_objective, parse_schedule, run
from mmlab.reporting import (
    atomic_write_text,
    config_hash,
    render_curves_svg,
    save_trajectory_csv,
    write_csv,
    write_done_marker,
)


def test_config_hash_is_order_invariant():
    a = {"x": 1, "y": {"b": 2.0, "a": [1, 2]}}
    b = {"y": {"a": [1, 2], "b": 2.0}, "x": 1}
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64  # sha256 hex


def test_config_hash_detects_changes():
    assert config_hash({"x": 1}) != config_hash({"x": 2})
    assert config_hash({"x": 1}) != config_hash({"x": 1.0})


def test_atomic_write_text_replaces(tmp_path):
    p = tmp_path / "f.txt"
    atomic_write_text(p, "one\n")
    atomic_write_text(p, "two\n")
    assert p.read_text() == "two\n"
    assert list(tmp_path.iterdir()) == [p]  # no stray temp files


def test_write_csv_format(tmp_path):
    p = tmp_path / "c.csv"
    write_csv(p, ["t", "v"], [np.array([0, 10]), np.array([1.5, 0.25])],
              cfg_hash="ab12")
    lines = p.read_text().splitlines()
    assert lines[0] == "# config_hash=ab12"
    assert lines[1] == "t,v"
    assert lines[2] == "0,1.5"
    assert lines[3] == "10,0.25"


def test_write_csv_no_hash_and_validation(tmp_path):
    p = tmp_path / "c.csv"
    write_csv(p, ["a"], [np.array([1.0])])
    assert p.read_text().splitlines()[0] == "a"
    with pytest.raises(ValueError):
        write_csv(p, ["a", "b"], [np.array([1.0])])
    with pytest.raises(ValueError):
        write_csv(p, ["a", "b"], [np.array([1.0]), np.array([1.0, 2.0])])


def test_write_csv_full_float_precision(tmp_path):
    p = tmp_path / "c.csv"
    x = 0.1 + 0.2
    write_csv(p, ["v"], [np.array([x])])
    assert float(p.read_text().splitlines()[1]) == x


def test_done_marker(tmp_path):
    p = tmp_path / "x.done"
    write_done_marker(p)
    assert p.read_text() == "done\n"


def test_save_trajectory_csv_schema(tmp_path):
    obj = make_objective("bilinear", d=2)
    data = Dataset(np.zeros((3, 2)))
    spec = AlgorithmSpec("gda", parse_schedule("constant:0.1"))
    traj = run(spec, obj, data, T=3, w0=np.array([1.0, 0.0]))
    p = tmp_path / "traj.csv"
    save_trajectory_csv(traj, p, "deadbeef")
    lines = p.read_text().splitlines()
    assert lines[0] == "# config_hash=deadbeef"
    assert lines[1] == "t,w_0,w_1,theta_0,theta_1"
    assert len(lines) == 2 + 4  # t = 0..3


def test_render_curves_svg_rerun_deterministic(tmp_path):
    # element ids are salted with the filename, so re-rendering the same
    # figure to the same path must reproduce the bytes exactly
    xs = np.arange(50)
    ys = np.sin(xs / 5.0)
    p = tmp_path / "a.svg"
    render_curves_svg(p, xs, [("sin", ys, {"lw": 1.0})], title="t", ylabel="y")
    first = p.read_bytes()
    render_curves_svg(p, xs, [("sin", ys, {"lw": 1.0})], title="t", ylabel="y")
    assert first[:100].lstrip().startswith(b"<?xml")
    assert first == p.read_bytes()


def test_render_curves_svg_log_scale(tmp_path):
    xs = np.arange(1, 30)
    p = tmp_path / "log.svg"
    render_curves_svg(p, xs, [("g", np.exp(xs / 3.0), {})], title="", ylabel="",
                      logy=True)
    assert p.stat().st_size > 0
