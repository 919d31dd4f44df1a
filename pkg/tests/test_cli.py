import csv
import io
import json
from pathlib import Path

import pytest

from smock.agents.orchestrator import EXAMPLE32_KS, ExperimentOrchestrator
from smock.errors import DimensionMismatch, MissingSeed, SceneError, UnknownCommand, UnknownFamily
from smock.main import main
from smock.models.convergence import ConvergenceCurve, ConvergenceRow
from smock.services.scenes import load_patterns, parse_scene, scene_digest

SCENES = Path(__file__).resolve().parent.parent / "scenes"


def scene_text(name: str) -> str:
    return (SCENES / name).read_text()


def read_report(text: str):
    """(metadata, rows) of a CSV report."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_every_shipped_scene_parses():
    for path in sorted(SCENES.glob("*.json")):
        scene = parse_scene(path.read_text())
        assert scene.version == 1


def test_scene_rejections():
    """Test the validation failures of the scene reader"""
    with pytest.raises(SceneError):
        parse_scene('{"version": 1, "dimension": 1, "pattern": [], "basepoint": [NaN]}')
    with pytest.raises(SceneError):
        parse_scene('{"version": 1, "dimension": 1}')
    with pytest.raises(SceneError):
        parse_scene('{"version": 2, "dimension": 1, "pattern": []}')
    with pytest.raises(SceneError):
        parse_scene('{"version": 1, "dimension": 1, "pattern": [], "experiment": {"ks": [0]}}')
    with pytest.raises(UnknownFamily):
        parse_scene('{"version": 1, "dimension": 1, "family": {"name": "spiral"}}')
    with pytest.raises(DimensionMismatch):
        parse_scene('{"version": 1, "dimension": 2, "pattern": [{"kind": "ball", "center": [0], "radius": 1}]}')


def test_scene_error_paths():
    with pytest.raises(SceneError) as info:
        parse_scene('{"version": 1, "dimension": 1, "pattern": [], "experiment": {"R": -1}}')
    assert any(path == "experiment.R" for path, _ in info.value.errors)


def test_monte_carlo_seed_resolution():
    """Test that a Monte Carlo method takes the CLI seed, then the scene seed"""
    raw = json.loads(scene_text("example32_measure.json"))
    assert parse_scene(json.dumps(raw)).experiment.method.seed == 7
    assert parse_scene(json.dumps(raw), seed=99).experiment.method.seed == 99

    del raw["experiment"]["seed"]
    with pytest.raises(MissingSeed):
        parse_scene(json.dumps(raw))


def test_scene_digest_ignores_formatting():
    text = scene_text("two_balls.json")
    compact = json.dumps(json.loads(text), separators=(",", ":"))
    assert scene_digest(text) == scene_digest(compact)
    assert len(scene_digest(text)) == 64


def test_load_patterns():
    explicit = parse_scene(scene_text("two_balls.json"))
    assert [k for k, _ in load_patterns(explicit)] == [0]

    family = parse_scene(scene_text("example31_endpoints.json"))
    pairs = load_patterns(family)
    assert [k for k, _ in pairs] == list(range(1, 9))
    assert len(pairs[2][1].stitches) == 3


def test_orchestrator_unknown_command():
    scene = parse_scene(scene_text("two_balls.json"))
    with pytest.raises(UnknownCommand):
        ExperimentOrchestrator(scene).run("teleport")
    with pytest.raises(UnknownCommand):
        ExperimentOrchestrator().run("demo", "example99")


def test_cli_dist(capsys):
    """Test the dist command end to end"""
    code = main(["dist", "--scene", str(SCENES / "two_balls.json")])
    assert code == 0
    meta, rows = read_report(capsys.readouterr().out)
    assert meta["d_k_reading"] == "consecutive-distinct"
    assert meta["scene_sha256"] == scene_digest(scene_text("two_balls.json"))
    assert rows[0]["command"] == "dist"
    assert float(rows[0]["d"]) == pytest.approx(4.0)
    assert float(rows[0]["d0"]) == pytest.approx(8.0)
    assert float(rows[0]["d_oracle"]) == pytest.approx(4.0)
    assert float(rows[2]["d"]) == 0.0


def test_cli_measure_exact(capsys):
    code = main(["measure", "--scene", str(SCENES / "interval_stitches.json")])
    assert code == 0
    meta, rows = read_report(capsys.readouterr().out)
    assert meta["method"] == "exact1d"
    assert [float(r["volume"]) for r in rows] == pytest.approx([1.0, 3.0, 5.0])


def test_cli_gh_matrices(capsys):
    assert main(["gh", "--scene", str(SCENES / "gh_matrices.json")]) == 0
    _, rows = read_report(capsys.readouterr().out)
    assert float(rows[0]["gh_exact"]) == pytest.approx(0.5)
    assert float(rows[0]["gh_upper"]) >= 0.5


def test_cli_tangent(capsys):
    assert main(["tangent", "--scene", str(SCENES / "lattice_tangent.json")]) == 0
    meta, rows = read_report(capsys.readouterr().out)
    assert meta["x"] == "1 1/2"
    assert [r["lambda"] for r in rows] == ["2", "4", "8", "16", "32"]
    assert all(float(r["estimate"]) == pytest.approx(1.25) for r in rows)


def test_cli_local_bounds(capsys):
    assert main(["local-bounds", "--scene", str(SCENES / "example31_endpoints.json")]) == 0
    meta, _ = read_report(capsys.readouterr().out)
    assert meta["stabilized"] == "false"
    assert meta["failed_bound"] == "delta"


def test_cli_demo_example31(tmp_path, capsys):
    """Test the endpoint demo with file output and plot series"""
    out = tmp_path / "demo.csv"
    plots = tmp_path / "plots"
    assert main(["demo", "example31", "--out", str(out), "--plot-dir", str(plots)]) == 0
    assert capsys.readouterr().out == ""

    meta, rows = read_report(out.read_text())
    assert meta["command"] == "demo example31"
    assert len(rows) == 8
    points = [float(p) for p in meta["accumulation_points"].split()]
    assert points == pytest.approx([4 / 3, 5 / 3])
    assert (plots / "demo_example31_distance.dat").exists()


def test_cli_exit_codes(tmp_path):
    """Test that validation failures exit with 2"""
    assert main(["teleport", "--scene", str(SCENES / "two_balls.json")]) == 2
    assert main(["dist"]) == 2
    assert main(["dist", "--scene", str(tmp_path / "missing.json")]) == 2

    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "dimension": 1, "family": {"name": "spiral"}}')
    assert main(["dist", "--scene", str(bad)]) == 2


def test_cli_budget_is_enforced():
    assert main(["net", "--scene", str(SCENES / "two_balls.json"), "--budget", "10"]) == 2


BASEPOINT_SCENE = {
    "version": 1,
    "dimension": 1,
    "pattern": [{"kind": "segment", "id": 0, "a": [2], "b": [3]}],
    "window": {"min": [1], "max": [5]},
    "basepoint": [1.5],
    "experiment": {"pairs": [[[1.5], [4.5]], [[2.2], [2.8]]], "R": 0.4, "eps": 0.1},
}


def test_cli_window_without_the_origin(tmp_path, capsys):
    """Test dist and net on a scene whose window excludes the origin"""
    path = tmp_path / "offset.json"
    path.write_text(json.dumps(BASEPOINT_SCENE))

    assert main(["dist", "--scene", str(path)]) == 0
    _, rows = read_report(capsys.readouterr().out)
    assert float(rows[0]["d"]) == pytest.approx(2.0)
    assert float(rows[0]["d0"]) == pytest.approx(3.0)
    assert float(rows[1]["d"]) == 0.0

    assert main(["net", "--scene", str(path)]) == 0
    _, rows = read_report(capsys.readouterr().out)
    assert float(rows[0]["net_size"]) == 9

    at_origin = {key: value for key, value in BASEPOINT_SCENE.items() if key != "basepoint"}
    path.write_text(json.dumps(at_origin))
    assert main(["net", "--scene", str(path)]) == 2


def test_cli_measure_panel_is_reproducible(tmp_path):
    """Test two seeded runs of the five-bump panel write identical reports"""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    scene = str(SCENES / "example32_measure.json")
    assert main(["measure", "--scene", scene, "--out", str(first)]) == 0
    assert main(["measure", "--scene", scene, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()

    meta, rows = read_report(first.read_text())
    assert meta["method"] == "monte_carlo"
    assert sorted({r["k"] for r in rows}, key=int) == ["2", "4", "8", "16"]
    assert sorted({r["phi"] for r in rows}) == ["0", "1", "2", "3", "4"]


def test_cli_converge_reports_rises(capsys):
    """Test the convergence report lists the ks where gh_upper went up"""
    assert main(["converge", "--scene", str(SCENES / "example32_convergence.json")]) == 0
    meta, rows = read_report(capsys.readouterr().out)
    rises = meta["gh_upper_rises"]
    ks = [r["k"] for r in rows]
    assert rises == "none" or all(k in ks[1:] for k in rises.split())


def test_curve_report_flags_rising_upper_bounds():
    """Test that the ks where gh_upper goes up are named in the metadata"""
    uppers = {2: 0.9, 3: 0.7, 8: 0.3, 9: 0.35, 10: 0.3}
    curve = ConvergenceCurve(
        rows=[ConvergenceRow(k=k, R=2.0, gh_upper=u, gh_lower=0.0, net_eps=0.05) for k, u in uppers.items()]
    )
    report = ExperimentOrchestrator()._curve_report("converge", curve)
    assert report.metadata["gh_upper_rises"] == "9"
    assert EXAMPLE32_KS[:9] == list(range(2, 11))

    curve.rows.pop(3)
    assert ExperimentOrchestrator()._curve_report("converge", curve).metadata["gh_upper_rises"] == "none"
