import csv
import json
import math

import pytest

from momentbound import cli, oracle, sdp
from momentbound.cli import (
    ConfigError,
    MeasurementSpec,
    Row,
    ScenarioConfig,
    config_from_dict,
    load_preset,
    run_scenario,
    summarize,
    write_csv,
)
from momentbound.models import build_tfi_2d


def tiny_energy_doc(**over):
    doc = {
        "name": "tiny",
        "model": {"kind": "tfi2d", "rows": 2, "cols": 2},
        "objective": "energy",
        "strategies": ["Measure", "SDP", "SDP&Measure"],
        "measurement": {"kind": "objective_strings"},
        "basis_size": 9,
        "shots": [400.0, 1600.0],
        "repeats": 2,
        "delta": 0.05,
        "seed": 13,
    }
    doc.update(over)
    return doc


class TestConfig:
    def test_defaults_and_shots_parse(self):
        cfg = config_from_dict({"name": "x", "model": {"kind": "tfi2d", "rows": 1,
                                                       "cols": 2},
                                "shots": ["inf", 100]})
        assert cfg.shots == [math.inf, 100.0]
        assert cfg.delta == 0.003

    @pytest.mark.parametrize(
        "patch",
        [
            {"strategies": ["SDP", "Magic"]},
            {"delta": 0.0},
            {"delta": 1.0},
            {"shots": []},
            {"shots": [0.5]},
            {"repeats": 0},
            {"objective": "entropy"},
            {"objective": "custom"},  # missing terms
            {"measurement": {"kind": "mystery"}},
            {"measurement": {"kind": "most_frequent_k"}},  # missing k
            {"measurement": {"kind": "custom"}},  # missing strings
            {"model": {"kind": "heisenberg"}},
        ],
    )
    def test_rejects_bad_config(self, patch):
        with pytest.raises(ConfigError):
            cfg = config_from_dict(tiny_energy_doc(**patch))
            cli.compile_scenario(cfg)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict(tiny_energy_doc(surprise=1))

    def test_heat_objective_needs_lindblad(self):
        with pytest.raises(ConfigError):
            cli.compile_scenario(
                config_from_dict(tiny_energy_doc(objective="heat_current"))
            )

    def test_presets_all_load(self):
        for name in (
            "heat-2x3", "energy-3x3", "dimer-50", "purity-3x3",
            "purity-confidence",
        ):
            cfg = load_preset(name)
            assert isinstance(cfg, ScenarioConfig)
        with pytest.raises(ConfigError):
            load_preset("nonexistent")

    def test_measurement_spec_validation(self):
        with pytest.raises(ConfigError):
            MeasurementSpec(kind="first_generated_k")
        spec = MeasurementSpec(kind="custom", strings=["Z1"])
        assert spec.label == ""


class TestRunScenario:
    def test_rows_deterministic_and_ordered(self):
        cfg = config_from_dict(tiny_energy_doc())
        rows = run_scenario(cfg)
        rows2 = run_scenario(cfg)
        strip = lambda r: (r.strategy, r.n_tot, r.repeat, r.delta, r.confidence,
                           r.lb, r.ub, r.status)
        assert [strip(r) for r in rows] == [strip(r) for r in rows2]
        assert len(rows) == 2 * 2 * 3  # shots x repeats x strategies
        for r in rows:
            if not math.isnan(r.lb) and not math.isnan(r.ub):
                assert r.lb <= r.ub + 1e-7

    def test_sdp_rows_have_full_confidence(self):
        rows = run_scenario(config_from_dict(tiny_energy_doc(strategies=["SDP"])))
        assert all(r.confidence == 1.0 and r.delta is None for r in rows)
        # one data-free solve replicated across the schedule
        assert len({(r.lb, r.ub) for r in rows}) == 1

    def test_combined_at_least_as_tight_as_parts(self):
        rows = run_scenario(config_from_dict(tiny_energy_doc()))
        by = {}
        for r in rows:
            by.setdefault(r.strategy.split(" ")[0], []).append(r)
        for both, single in zip(sorted(by["SDP&Measure"], key=lambda r: (r.n_tot, r.repeat)),
                                sorted(by["Measure"], key=lambda r: (r.n_tot, r.repeat))):
            assert both.lb >= single.lb - 1e-9
            assert both.ub <= single.ub + 1e-9
        sdp_lb = by["SDP"][0].lb
        sdp_ub = by["SDP"][0].ub
        for r in by["SDP&Measure"]:
            assert r.lb >= sdp_lb - 1e-9
            assert r.ub <= sdp_ub + 1e-9

    def test_infinite_shots_pin_objective(self):
        cfg = config_from_dict(
            tiny_energy_doc(strategies=["Measure"], shots=["inf"], repeats=1)
        )
        rows = run_scenario(cfg)
        e0, _ = oracle.exact_ground_state(build_tfi_2d(2, 2, g=1.0, J=1.0))
        assert len(rows) == 1
        assert rows[0].lb == pytest.approx(e0, abs=1e-9)
        assert rows[0].ub == pytest.approx(e0, abs=1e-9)
        assert rows[0].confidence == 1.0

    def test_worker_pool_merge_matches_sequential(self):
        doc = tiny_energy_doc()
        seq = run_scenario(config_from_dict(doc))
        par = run_scenario(config_from_dict(dict(doc, workers=2)))
        strip = lambda r: (r.strategy, r.n_tot, r.repeat, r.lb, r.ub, r.status)
        assert [strip(r) for r in seq] == [strip(r) for r in par]

    def test_undersized_budget_is_config_error(self):
        cfg = config_from_dict(tiny_energy_doc(shots=[4.0]))
        with pytest.raises(ConfigError):
            run_scenario(cfg)

    def test_purity_rows_have_no_upper(self):
        doc = tiny_energy_doc(
            objective="purity",
            strategies=["SDP&Measure"],
            measurement={"kind": "second_order_all"},
            basis_size=15,
            shots=[20000.0],
            repeats=1,
        )
        rows = run_scenario(config_from_dict(doc))
        assert len(rows) == 1
        assert math.isnan(rows[0].ub)
        assert 0.0 <= rows[0].lb <= 1.0


class TestCsvAndSummary:
    def rows(self):
        return [
            Row("s", "SDP", 100.0, 0, None, 1.0, -1.5, 1.5, "optimal", 0.1),
            Row("s", "Measure", 100.0, 0, 0.05, 0.95, -2.0, float("nan"),
                "optimal", 0.0),
        ]

    def test_write_and_read_back(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(self.rows(), str(path))
        text = path.read_text().splitlines()
        assert text[0] == f"# {cli.CSV_SCHEMA}"
        rd = csv.DictReader(text[1:])
        rows = list(rd)
        assert rows[0]["lb"] == "-1.5"
        assert rows[0]["delta"] == ""
        assert rows[1]["ub"] == ""  # nan prints as empty

    def test_summary_groups(self):
        doc = summarize(self.rows())
        assert doc["schema"] == "momentbound-summary/1"
        strategies = {g["strategy"] for g in doc["groups"]}
        assert strategies == {"SDP", "Measure"}
        m = [g for g in doc["groups"] if g["strategy"] == "Measure"][0]
        assert m["mean_ub"] is None


class TestMain:
    def test_bad_config_exits_2(self, capsys):
        assert cli.main(["bound-energy", "--config", "/does/not/exist.json"]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_missing_scenario_exits_2(self, capsys):
        # export-sdpa has no built-in template, so it demands a scenario
        assert cli.main(["export-sdpa"]) == 2
        assert cli.main(["sweep-shots", "--preset", "nope"]) == 2
        capsys.readouterr()

    def test_run_writes_csv_and_json(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_energy_doc(
            strategies=["SDP"], repeats=1, shots=[100.0])))
        out = tmp_path / "rows.csv"
        summ = tmp_path / "summary.json"
        rc = cli.main(["bound-energy", "--config", str(cfg_path),
                       "--out", str(out), "--json", str(summ)])
        assert rc == 0
        assert out.read_text().startswith(f"# {cli.CSV_SCHEMA}")
        doc = json.loads(summ.read_text())
        assert doc["groups"][0]["strategy"] == "SDP"

    def test_seed_override_changes_rows(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_energy_doc(
            strategies=["Measure"], repeats=1, shots=[400.0])))
        outs = []
        for seed in (1, 2):
            out = tmp_path / f"rows{seed}.csv"
            cli.main(["bound-energy", "--config", str(cfg_path), "--seed",
                      str(seed), "--out", str(out)])
            outs.append(out.read_text())
        assert outs[0] != outs[1]

    def test_export_subcommand_roundtrips(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_energy_doc(strategies=["SDP"])))
        out = tmp_path / "prob.dat-s"
        rc = cli.main(["export-sdpa", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        spr = sdp.parse_sdpa(str(out))
        res = sdp.solve_sdpa_problem(spr, solver="clarabel")
        assert res.ok

    def test_oracle_subcommand(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_energy_doc()))
        assert cli.main(["oracle", "--config", str(cfg_path)]) == 0
        out = capsys.readouterr().out
        e0, _ = oracle.exact_ground_state(build_tfi_2d(2, 2, g=1.0, J=1.0))
        assert "ground-state energy" in out
        assert f"{e0:.12g}" in out
