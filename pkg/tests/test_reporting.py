import json

from iit import nonlocality_scan, run, run_full, sweep
from iit.reporting import (
    NONLOCALITY_HEADER,
    SWEEP_HEADER,
    nonlocality_summary_text,
    render_nonlocality_figure,
    render_run_figure,
    render_sweep_figure,
    report_to_dict,
    run_summary_text,
    sweep_summary_text,
    write_nonlocality_csv,
    write_run_report,
    write_sweep_csv,
)

PINNED_SWEEP = (
    "param,gamma2,gamma3_effective,gamma3_oracle,gamma3_closed_form,"
    "expectation_with,expectation_without,delta,decision"
)
PINNED_NONLOCALITY = "beta2,gamma3,bob_expectation,alice_marginal_tv"


def test_csv_headers_are_pinned():
    assert SWEEP_HEADER == PINNED_SWEEP
    assert NONLOCALITY_HEADER == PINNED_NONLOCALITY


def test_sweep_csv_shape_and_values(tmp_path, tiny):
    rows = sweep(tiny, "g23", [1.0, 2.0])
    path = tmp_path / "sweep.csv"
    write_sweep_csv(str(path), rows)
    lines = path.read_text().splitlines()
    assert lines[0] == PINNED_SWEEP
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[0]) == 1.0
    assert float(first[1]) == rows[0].gamma2.real  # repr round-trips exactly
    assert first[-1] in ("yes", "no")


def test_nonlocality_csv_shape(tmp_path, tiny):
    res = nonlocality_scan(tiny, [0.25, 1.0])
    path = tmp_path / "nl.csv"
    write_nonlocality_csv(str(path), res)
    lines = path.read_text().splitlines()
    assert lines[0] == PINNED_NONLOCALITY
    assert len(lines) == 3
    assert float(lines[1].split(",")[0]) == 0.25


def test_report_envelope_layout(tmp_path, tiny):
    rep = run(tiny)
    path = tmp_path / "report.json"
    write_run_report(str(path), tiny, rep, seed=3)
    doc = json.loads(path.read_text())
    assert set(doc) == {"schema_version", "manifest", "config", "report"}
    assert doc["schema_version"] == 1
    assert doc["manifest"]["seed"] == 3
    block = doc["report"]
    for key in (
        "transport",
        "overlaps",
        "expectations",
        "decision",
        "recovery",
        "fidelity",
        "norm_audit",
        "grids",
        "notes",
    ):
        assert key in block
    # complex values are [re, im] pairs
    assert isinstance(block["overlaps"]["gamma2_normalized"], list)
    assert block["norm_audit"]["phi_plus"] is not None
    assert block["expectations"]["consistency_gap"] <= 1e-8


def test_report_blocks_are_deterministic(tmp_path, tiny):
    rep1 = run(tiny)
    rep2 = run(tiny)
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    write_run_report(str(p1), tiny, rep1)
    write_run_report(str(p2), tiny, rep2)
    d1 = json.loads(p1.read_text())
    d2 = json.loads(p2.read_text())
    # only the manifest may differ (timestamps); config and report are frozen
    assert json.dumps(d1["report"], sort_keys=True) == json.dumps(
        d2["report"], sort_keys=True
    )
    assert json.dumps(d1["config"], sort_keys=True) == json.dumps(
        d2["config"], sort_keys=True
    )


def test_summary_texts_cover_the_headlines(tiny):
    rep = run(tiny)
    text = run_summary_text(rep)
    for needle in ("delta", "gamma2", "gamma3", "decision", "norm", "layout:"):
        assert needle in text
    rows = sweep(tiny, "g23", [1.0])
    assert "sweep over g23" in sweep_summary_text("g23", rows)
    res = nonlocality_scan(tiny, [0.25])
    assert "nonlocality scan" in nonlocality_summary_text(res)


def test_figures_render_to_png(tmp_path, tiny):
    rep, art = run_full(tiny)
    p1 = render_run_figure(str(tmp_path), rep, art)
    rows = sweep(tiny, "g23", [1.0, 2.0])
    p2 = render_sweep_figure(str(tmp_path), "g23", rows)
    res = nonlocality_scan(tiny, [0.25, 1.0])
    p3 = render_nonlocality_figure(str(tmp_path), res)
    for p in (p1, p2, p3):
        data = open(p, "rb").read()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 5000


def test_report_dict_matches_selected_convention(tiny):
    rep = run(tiny)
    d = report_to_dict(rep)
    assert d["overlaps"]["gamma2_effective"] == d["overlaps"]["gamma2_normalized"]
    assert d["gamma_convention"] == "normalized"
    assert d["decision"]["decision_detected"] is True
