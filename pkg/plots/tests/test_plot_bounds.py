import csv
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from plot_bounds import SCHEMA, SchemaError, build_figure, main, read_frame

STRATEGIES = ("Measure", "SDP", "SDP&Measure")
SHOTS = (1e3, 1e4, 1e5, 1e6, 1e7)


def synth_csv(path, strategies=STRATEGIES, deltas=(0.003,), with_inf=True,
              purity=False):
    """Hand-rolled frame: bounds tighten with shots, plus inf-shot rows."""
    rows = []
    for si, strat in enumerate(strategies):
        for delta in deltas:
            for ni, n_tot in enumerate(SHOTS):
                for rep in range(5):
                    lb = -2.0 + 0.2 * si + 0.1 * ni + 0.001 * rep
                    ub = "" if purity else 2.0 - 0.2 * si - 0.1 * ni
                    rows.append([
                        "synthetic", strat, "%g" % n_tot, rep, delta,
                        1 - delta, lb, ub, "optimal", 0.1,
                    ])
            if with_inf:
                rows.append([
                    "synthetic", strat, "inf", 0, delta, 1 - delta,
                    -1.0 + 0.2 * si, "" if purity else 1.0 - 0.2 * si,
                    "optimal", 0.1,
                ])
    with open(path, "w", newline="") as fh:
        fh.write(f"# {SCHEMA}\n")
        w = csv.writer(fh)
        w.writerow(["scenario", "strategy", "n_tot", "repeat", "delta",
                    "confidence", "lb", "ub", "status", "wall_time"])
        w.writerows(rows)
    return path


def solid_lines(ax):
    return [l for l in ax.get_lines() if l.get_linestyle() == "-"]


def dashed_lines(ax):
    return [l for l in ax.get_lines() if l.get_linestyle() == "--"]


def test_three_strategy_smoke(tmp_path):
    csv_path = synth_csv(tmp_path / "r.csv")
    out = tmp_path / "fig.png"
    assert main(["--csv", str(csv_path), "--out", str(out)]) == 0
    assert out.stat().st_size > 0
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    fig = build_figure(read_frame(str(csv_path)))
    ax = fig.axes[0]
    # three lower/upper pairs and an asymptote pair per strategy
    assert len(solid_lines(ax)) == 6
    assert len(dashed_lines(ax)) == 6
    labels = [t.get_text() for t in ax.get_legend().get_texts()]
    assert sorted(labels) == sorted(STRATEGIES)
    assert ax.get_xscale() == "log"


def test_mean_aggregation(tmp_path):
    csv_path = synth_csv(tmp_path / "r.csv", strategies=("SDP",),
                         with_inf=False)
    fig = build_figure(read_frame(str(csv_path)))
    lb_line = solid_lines(fig.axes[0])[0]
    # repeats 0..4 contribute 0.001*rep each -> mean offset 0.002
    assert lb_line.get_ydata()[0] == pytest.approx(-2.0 + 0.002)
    assert list(lb_line.get_xdata()) == sorted(SHOTS)


def test_single_strategy_single_pair(tmp_path):
    csv_path = synth_csv(tmp_path / "r.csv", strategies=("Measure",))
    fig = build_figure(read_frame(str(csv_path)))
    ax = fig.axes[0]
    assert len(solid_lines(ax)) == 2
    assert [t.get_text() for t in ax.get_legend().get_texts()] == ["Measure"]


def test_confidence_grouping_lower_curves_only(tmp_path):
    csv_path = synth_csv(tmp_path / "r.csv", strategies=("SDP&Measure",),
                         deltas=(0.32, 0.05, 0.003), with_inf=False,
                         purity=True)
    fig = build_figure(read_frame(str(csv_path)), group_by="confidence")
    ax = fig.axes[0]
    # purity frames have empty ub, so one lower curve per confidence level
    assert len(solid_lines(ax)) == 3
    labels = [t.get_text() for t in ax.get_legend().get_texts()]
    assert labels == ["68.0% confidence", "95.0% confidence",
                      "99.7% confidence"]


def test_schema_tag_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# some-other-format/9\na,b\n1,2\n")
    with pytest.raises(SchemaError, match="expected"):
        read_frame(str(bad))
    assert main(["--csv", str(bad), "--out", str(tmp_path / "x.png")]) == 2


def test_missing_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(f"# {SCHEMA}\nscenario,strategy\ns,Measure\n")
    with pytest.raises(SchemaError, match="missing columns"):
        read_frame(str(bad))


def test_crossed_bounds_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    with open(bad, "w", newline="") as fh:
        fh.write(f"# {SCHEMA}\n")
        w = csv.writer(fh)
        w.writerow(["scenario", "strategy", "n_tot", "repeat", "delta",
                    "confidence", "lb", "ub", "status", "wall_time"])
        w.writerow(["s", "SDP", "100", 0, "", 1.0, 2.0, 1.0, "optimal", 0.1])
    with pytest.raises(SchemaError, match="lb > ub"):
        read_frame(str(bad))


def test_real_frame_roundtrip(tmp_path):
    """The solver package's own writer must satisfy this reader.

    This is the one place the two packages meet, and they meet only in
    the file: momentbound is imported here to produce a frame, never by
    plot_bounds itself.
    """
    momentbound = pytest.importorskip("momentbound.cli")
    doc = {
        "name": "roundtrip",
        "model": {"kind": "tfi2d", "rows": 1, "cols": 2},
        "objective": "energy",
        "strategies": ["Measure"],
        "measurement": {"kind": "objective_strings"},
        "shots": [100.0, "inf"],
        "repeats": 2,
        "seed": 3,
    }
    rows = momentbound.run_scenario(momentbound.config_from_dict(doc))
    csv_path = tmp_path / "real.csv"
    momentbound.write_csv(rows, str(csv_path))
    frame = read_frame(str(csv_path))
    assert len(frame) == len(rows)
    out = tmp_path / "real.png"
    fig = build_figure(frame)
    fig.savefig(out)
    assert out.stat().st_size > 0
