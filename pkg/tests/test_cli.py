"""End-to-end command-line workflows on small files."""

import json

import numpy as np
import pytest

import tabmark as tm
from tabmark.cli import main

FAST_PSO = ["--particles", "12", "--iterations", "15", "--stagnation", "8"]


@pytest.fixture
def data_csv(tmp_path):
    table = tm.make_table(rows=160, seed=3)
    path = tmp_path / "data.csv"
    tm.save_dataset(table, path)
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRank:
    def test_table_output(self, capsys, data_csv):
        code, out, _ = run(capsys, ["rank", "--in", data_csv,
                                    "--class-col", "class", "--id-col", "id"])
        assert code == 0
        assert "feature" in out and "f1" in out

    def test_json_percentages_sum_to_100(self, capsys, data_csv):
        code, out, _ = run(capsys, ["rank", "--in", data_csv, "--class-col",
                                    "class", "--id-col", "id", "--json"])
        assert code == 0
        payload = json.loads(out)
        total = sum(row["cp"] for row in payload["features"])
        assert total == pytest.approx(100.0, abs=1e-9)

    def test_missing_file_is_config_error(self, capsys, tmp_path):
        code, _, err = run(capsys, ["rank", "--in", str(tmp_path / "nope.csv"),
                                    "--class-col", "class"])
        assert code == 2
        assert "error" in json.loads(err)


class TestEmbedDecode:
    def embed(self, capsys, tmp_path, data_csv, extra=()):
        marked = str(tmp_path / "marked.csv")
        key = str(tmp_path / "key.json")
        argv = ["embed", "--in", data_csv, "--class-col", "class", "--id-col",
                "id", "--out", marked, "--key-out", key, "--length", "16",
                "--seed", "5", *FAST_PSO, *extra]
        code, out, err = run(capsys, argv)
        return code, marked, key, out, err

    def test_embed_then_decode_matches(self, capsys, tmp_path, data_csv):
        code, marked, key, _, _ = self.embed(capsys, tmp_path, data_csv)
        assert code == 0
        report = str(tmp_path / "report.json")
        code, out, _ = run(capsys, ["decode", "--in", marked, "--key", key,
                                    "--report", report, "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "match"
        assert payload["correlation"] == 1.0
        saved = json.loads(open(report).read())
        assert saved["bits"] == payload["bits"]

    def test_embed_writes_loadable_artifacts(self, capsys, tmp_path, data_csv):
        code, marked, key, _, _ = self.embed(capsys, tmp_path, data_csv)
        assert code == 0
        loaded_key = tm.load_key(key)
        loaded_marked = tm.load_dataset(marked, loaded_key.class_column,
                                        loaded_key.id_column)
        assert loaded_marked.row_count == 160
        result = tm.decode(loaded_marked, loaded_key)
        assert result.verdict == "match"

    def test_explicit_bits_shortcut(self, capsys, tmp_path, data_csv):
        code, marked, key, _, _ = self.embed(capsys, tmp_path, data_csv,
                                             extra=["--bits", "11001"])
        assert code == 0
        assert tm.load_key(key).bits == (1, 1, 0, 0, 1)

    def test_corrupted_suspect_exits_three(self, capsys, tmp_path, data_csv):
        code, marked, key, _, _ = self.embed(capsys, tmp_path, data_csv)
        assert code == 0
        loaded_key = tm.load_key(key)
        table = tm.load_dataset(marked, "class", "id")
        blown = table.replace_columns({
            name: table.column(name) * 10.0 for name in loaded_key.features})
        wrecked = str(tmp_path / "wrecked.csv")
        tm.save_dataset(blown, wrecked)
        code, out, _ = run(capsys, ["decode", "--in", wrecked, "--key", key,
                                    "--json"])
        assert code == 3
        assert json.loads(out)["verdict"] == "corrupted"

    def test_infeasible_constraints_exit_four(self, capsys, tmp_path, data_csv):
        marked = str(tmp_path / "m.csv")
        key = str(tmp_path / "k.json")
        code, out, err = run(capsys, [
            "embed", "--in", data_csv, "--class-col", "class", "--id-col", "id",
            "--out", marked, "--key-out", key, "--bits", "1111111111111111",
            "--mean-tol", "1e-15", *FAST_PSO])
        assert code == 4

    def test_idempotent_under_fixed_seed(self, capsys, tmp_path, data_csv):
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        dir_a.mkdir()
        dir_b.mkdir()
        _, marked_a, key_a, _, _ = self.embed(capsys, dir_a, data_csv)
        _, marked_b, key_b, _, _ = self.embed(capsys, dir_b, data_csv)
        assert open(marked_a).read() == open(marked_b).read()
        assert json.load(open(key_a)) == json.load(open(key_b))


class TestCreate:
    def test_params_written(self, capsys, tmp_path, data_csv):
        params = str(tmp_path / "params.json")
        code, out, _ = run(capsys, ["create", "--in", data_csv, "--class-col",
                                    "class", "--id-col", "id", "--seed", "5",
                                    "--params-out", params, *FAST_PSO, "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["feasible"] is True
        saved = json.load(open(params))
        assert saved["betas"] == payload["betas"]
        assert all(v > 0 for v in saved["betas"].values())


class TestAttackCommand:
    def test_sweep_report_and_curves(self, capsys, tmp_path, data_csv):
        marked = str(tmp_path / "marked.csv")
        key = str(tmp_path / "key.json")
        code, *_ = run(capsys, ["embed", "--in", data_csv, "--class-col",
                                "class", "--id-col", "id", "--out", marked,
                                "--key-out", key, "--seed", "5", *FAST_PSO])
        assert code == 0
        spec_file = tmp_path / "attacks.json"
        spec_file.write_text(json.dumps([
            {"kind": "delete", "alpha": 0.5, "seed": 1},
            {"kind": "duplicate_insert", "alpha": 1.0, "seed": 2},
        ]))
        report = str(tmp_path / "attack_report.json")
        curves = str(tmp_path / "curves.csv")
        code, out, _ = run(capsys, ["attack", "--in", marked, "--key", key,
                                    "--spec", str(spec_file), "--report",
                                    report, "--curves", curves, "--json"])
        assert code == 0
        payload = json.loads(out)
        assert [p["bit_accuracy"] for p in payload["points"]] == [1.0, 1.0]
        assert open(curves).read().startswith("kind,")
        assert json.load(open(report)) == payload


class TestReportCommand:
    def test_timing_report(self, capsys, tmp_path):
        out_file = str(tmp_path / "timing.json")
        code, out, _ = run(capsys, ["report", "--rows", "2000,4000",
                                    "--repeats", "2", "--out", out_file,
                                    "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["rows"] == [2000, 4000]
        assert payload["embed_fit"]["r_squared"] <= 1.0
        assert json.load(open(out_file)) == payload
