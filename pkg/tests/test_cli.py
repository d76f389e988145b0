import json
import os

import numpy as np
import pytest

from coaction.checkpoint import load_checkpoint
from coaction.cli import main
from coaction.problems import get_problem


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """A tiny CLI training run shared by the command tests."""
    root = tmp_path_factory.mktemp("cli")
    cfg_path = root / "run.json"
    cfg_path.write_text(json.dumps({
        "tasks": ["zdt1", "re37"], "iterations": 6, "batch": 4, "seed": 0,
    }))
    ckpt_path = root / "model.ckpt"
    code = main(["train", "--config", str(cfg_path), "--out", str(ckpt_path)])
    assert code == 0
    return root, str(ckpt_path)


def test_train_writes_checkpoint_trace_and_plot(trained):
    root, ckpt = trained
    assert os.path.exists(ckpt)
    trace = json.loads((root / "model.ckpt.trace.json").read_text())
    assert len(trace["loss"]) == 6
    assert trace["config"]["batch"] == 4
    assert trace["config"]["lr"] == 2e-3  # defaults echoed
    assert set(trace["Q"]) == {"zdt1", "re37"}
    assert os.path.exists(root / "model_loss.png")


def test_eval_writes_report_and_figures(trained, tmp_path):
    _, ckpt = trained
    report = tmp_path / "report.json"
    code = main(["eval", "--ckpt", ckpt, "--report", str(report),
                 "--points", "40"])
    assert code == 0
    doc = json.loads(report.read_text())
    assert {t["task_id"] for t in doc["tasks"]} == {"zdt1", "re37"}
    for t in doc["tasks"]:
        assert np.isfinite(t["hv"]) and t["hv"] >= 0
    assert (tmp_path / "report_zdt1.png").exists()
    assert (tmp_path / "report_re37.png").exists()


def test_infer_prints_preference_json(trained, capsys):
    _, ckpt = trained
    code = main(["infer", "--ckpt", ckpt, "--task", "zdt1",
                 "--theta", "0.7854"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(out["lambda"], [0.70711, 0.70711], atol=1e-4)
    assert len(out["x"]) == 30
    assert len(out["f_raw"]) == 2
    assert len(out["f_norm"]) == 2


def test_infer_rejects_wrong_arity(trained, capsys):
    _, ckpt = trained
    code = main(["infer", "--ckpt", ckpt, "--task", "zdt1",
                 "--theta", "0.2,0.3"])
    assert code == 2


def test_export_csv_line_count_and_reeval(trained, tmp_path):
    _, ckpt = trained
    out = tmp_path / "front.csv"
    code = main(["export", "--ckpt", ckpt, "--format", "csv", "--out", str(out),
                 "--task", "zdt1", "--points", "100", "--no-plots"])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 101
    header = lines[0].split(",")
    assert header[:2] == ["task", "theta1"]
    assert header[2:].count("f1") == 1

    # re-parse x columns and re-evaluate: f columns must match
    x_cols = [i for i, h in enumerate(header) if h.startswith("x")]
    f_cols = [i for i, h in enumerate(header) if h.startswith("f")]
    problem = get_problem("zdt1")
    for line in lines[1:6]:
        cells = line.split(",")
        x = np.array([float(cells[i]) for i in x_cols if cells[i] != ""])
        f_norm = np.array([float(cells[i]) for i in f_cols if cells[i] != ""])
        raw = problem._raw_numpy(x[None, :])[0]
        renorm = (raw - problem.ideal) / (problem.nadir - problem.ideal)
        np.testing.assert_allclose(np.clip(renorm, 0, 3.5), f_norm, atol=1e-5)


def test_export_json_contains_all_tasks(trained, tmp_path):
    _, ckpt = trained
    out = tmp_path / "front.json"
    code = main(["export", "--ckpt", ckpt, "--format", "json", "--out",
                 str(out), "--points", "16", "--no-plots"])
    assert code == 0
    doc = json.loads(out.read_text())
    assert {d["task"] for d in doc} == {"zdt1", "re37"}


def test_compare_identical_reports_all_equal(trained, tmp_path, capsys):
    _, ckpt = trained
    report = tmp_path / "r.json"
    main(["eval", "--ckpt", ckpt, "--report", str(report), "--points", "20",
          "--no-plots"])
    capsys.readouterr()
    code = main(["compare", "--a", str(report), "--b", str(report),
                 "--alpha", "0.10"])
    assert code == 0
    out = capsys.readouterr().out
    rows = [l for l in out.strip().split("\n")[1:] if l]
    assert len(rows) == 6  # 2 tasks x 3 metrics
    for row in rows:
        assert "1.0000" in row and row.rstrip().endswith("=")


def test_compare_multirun_reports(tmp_path, capsys):
    def fake_run(hv_a):
        return {"tasks": [{"task_id": "zdt1", "hv": hv_a, "range": 1.5,
                           "sparsity": 0.5, "count_after_filter": 9,
                           "r_used": [3.5, 3.5]}]}

    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(json.dumps([fake_run(11.0 + 0.1 * i) for i in range(5)]))
    b.write_text(json.dumps([fake_run(10.0 + 0.1 * i) for i in range(5)]))
    code = main(["compare", "--a", str(a), "--b", str(b)])
    assert code == 0
    out = capsys.readouterr().out
    hv_row = [l for l in out.split("\n") if l.startswith("zdt1") and " hv" in l][0]
    assert "0.0625" in hv_row and "+" in hv_row


def test_missing_config_file_exits_nonzero(tmp_path):
    code = main(["train", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "x.ckpt")])
    assert code == 1


def test_bad_config_field_exits_two(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"tasks": ["zdt1"], "mystery": 1}))
    code = main(["train", "--config", str(cfg), "--out", str(tmp_path / "x.ckpt")])
    assert code == 2
