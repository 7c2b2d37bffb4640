"""Dataset loading, column statistics and constraint validation."""

import math

import numpy as np
import pytest

import tabmark as tm
from tabmark.errors import ConfigError, DataError


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadDataset:
    def test_basic_parse(self, tmp_path):
        src = write_csv(tmp_path / "d.csv",
                        "id,f1,f2,class\n1,1.5,2.0,yes\n2,2.5,3.0,no\n3,3.5,4.0,yes\n")
        d = tm.load_dataset(src, "class", "id")
        assert d.row_count == 3
        assert d.feature_count == 2
        assert d.features == ("f1", "f2")
        assert d.ids == ("1", "2", "3")
        assert d.labels == ("yes", "no", "yes")
        assert d.column("f1").tolist() == [1.5, 2.5, 3.5]

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        src = write_csv(tmp_path / "d.csv",
                        "id,f1,f2,class\n1,abc,2.0,yes\n2,2.5,3.0,no\n")
        with pytest.raises(DataError, match=r"row 2.*column f1"):
            tm.load_dataset(src, "class", "id")

    def test_duplicate_ids_rejected(self, tmp_path):
        src = write_csv(tmp_path / "d.csv",
                        "id,f1,class\n1,1.0,yes\n1,2.0,no\n")
        with pytest.raises(DataError, match="duplicate row id"):
            tm.load_dataset(src, "class", "id")

    def test_synthesized_ids(self, tmp_path):
        src = write_csv(tmp_path / "d.csv", "f1,class\n1.0,yes\n2.0,no\n")
        d = tm.load_dataset(src, "class")
        assert d.ids == ("0", "1")
        assert d.header == ("id", "f1", "class")

    def test_empty_file_rejected(self, tmp_path):
        src = write_csv(tmp_path / "d.csv", "")
        with pytest.raises(DataError, match="empty"):
            tm.load_dataset(src, "class", "id")

    def test_missing_and_duplicate_columns(self, tmp_path):
        src = write_csv(tmp_path / "d.csv", "id,f1,class\n1,1.0,yes\n")
        with pytest.raises(DataError, match="missing class column"):
            tm.load_dataset(src, "target", "id")
        dup = write_csv(tmp_path / "e.csv", "id,f1,f1,class\n1,1.0,2.0,yes\n")
        with pytest.raises(DataError, match="duplicate column names"):
            tm.load_dataset(dup, "class", "id")

    def test_non_finite_rejected(self, tmp_path):
        src = write_csv(tmp_path / "d.csv", "id,f1,class\n1,inf,yes\n2,1.0,no\n")
        with pytest.raises(DataError, match="non-finite"):
            tm.load_dataset(src, "class", "id")

    def test_round_trip_save_load(self, tmp_path, small_table):
        out = tmp_path / "round.csv"
        tm.save_dataset(small_table, out)
        back = tm.load_dataset(out, "class", "id")
        assert back.header == small_table.header
        assert back.ids == small_table.ids
        assert back.labels == small_table.labels
        assert np.array_equal(back.matrix, small_table.matrix)


class TestColumnStats:
    def make(self, values):
        ids = tuple(str(i) for i in range(len(values)))
        labels = ("x",) * len(values)
        return tm.Dataset(("id", "f", "class"), "id", "class", ("f",), ids,
                          labels, np.asarray(values, float).reshape(-1, 1))

    def test_direct_formula_values(self):
        # mean/population stddev/normalized extremes; stddev of {1,2,3}
        # is sqrt(2/3), an independent closed form
        s = tm.column_stats(self.make([1.0, 2.0, 3.0]), "f", 0.0, 10.0)
        assert s.mean == pytest.approx(2.0)
        assert s.std == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)
        assert s.minimum == 1.0 and s.maximum == 3.0
        assert s.v_min == pytest.approx(0.1)
        assert s.v_max == pytest.approx(0.3)

    def test_constant_column(self):
        s = tm.column_stats(self.make([5.0, 5.0]), "f", 0.0, 10.0)
        assert s.std == 0.0
        assert s.v_min == s.v_max == 0.5

    def test_values_at_norm_bounds(self):
        s = tm.column_stats(self.make([0.0, 10.0]), "f", 0.0, 10.0)
        assert s.v_min == 0.0 and s.v_max == 1.0

    def test_bad_norm_range(self):
        with pytest.raises(ConfigError):
            tm.column_stats(self.make([1.0]), "f", 5.0, 5.0)

    def test_unknown_feature(self):
        with pytest.raises(DataError):
            tm.column_stats(self.make([1.0]), "nope", 0.0, 1.0)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        values = rng.uniform(1.0, 50.0, size=40)
        base = tm.column_stats(self.make(values), "f", 0.0, 60.0)
        for _ in range(5):
            shuffled = rng.permutation(values)
            s = tm.column_stats(self.make(shuffled), "f", 0.0, 60.0)
            # summation order may differ, so compare to float tolerance
            assert s.mean == pytest.approx(base.mean, rel=1e-12)
            assert s.std == pytest.approx(base.std, rel=1e-12)
            assert (s.minimum, s.maximum) == (base.minimum, base.maximum)
            assert (s.v_min, s.v_max) == (base.v_min, base.v_max)

    def test_normalized_extremes_stay_in_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            values = rng.uniform(-100.0, 100.0, size=10)
            s = tm.column_stats(self.make(values), "f", -50.0, 50.0)
            assert 0.0 <= s.v_min <= s.v_max <= 1.0


class TestValidateConstraints:
    def test_identity_passes_with_zero_deltas(self, small_table):
        bins = tm.BinningSpec.equal_width(small_table)
        cp = tm.classification_potential(small_table, bins)
        report = tm.validate_constraints(small_table, small_table,
                                         tm.UsabilityConstraints(), cp, cp)
        assert report.passed
        assert all(c.cp_delta == 0.0 and c.mean_rel == 0.0 and c.std_rel == 0.0
                   for c in report.checks)

    def test_max_violation_names_feature(self, small_table):
        bins = tm.BinningSpec.equal_width(small_table)
        cp = tm.classification_potential(small_table, bins)
        bumped = small_table.column("f3").copy()
        bumped[5] = bumped.max() * 2.0
        marked = small_table.replace_columns({"f3": bumped})
        cp_marked = tm.classification_potential(marked, bins, clip=True)
        report = tm.validate_constraints(small_table, marked,
                                         tm.UsabilityConstraints(), cp,
                                         cp_marked)
        assert not report.passed
        assert "f3" in report.failing_features()

    def test_schema_and_id_mismatch_rejected(self, small_table):
        bins = tm.BinningSpec.equal_width(small_table)
        cp = tm.classification_potential(small_table, bins)
        fewer = small_table.take_rows(range(small_table.row_count - 1))
        with pytest.raises(DataError, match="row-id set"):
            tm.validate_constraints(small_table, fewer,
                                    tm.UsabilityConstraints(), cp, cp)

    def test_embed_output_passes(self, small_table):
        result = tm.encode(small_table, tm.EncodeOptions(
            seed=5, swarm=tm.SwarmConfig(particles=20, iterations=25, seed=5)))
        assert result.feasible
        assert result.constraint_report.passed
        h = tm.UsabilityConstraints()
        for check in result.constraint_report.checks:
            assert check.cp_delta <= h.cp_tolerance
            assert check.min_ok and check.max_ok

    def test_report_json_round_trip(self, small_table):
        import json
        bins = tm.BinningSpec.equal_width(small_table)
        cp = tm.classification_potential(small_table, bins)
        report = tm.validate_constraints(small_table, small_table,
                                         tm.UsabilityConstraints(), cp, cp)
        payload = json.loads(report.to_json())
        assert payload["passed"] is True
        assert len(payload["features"]) == small_table.feature_count


class TestDatasetInvariants:
    def test_immutable_matrix(self, small_table):
        with pytest.raises(ValueError):
            small_table.matrix[0, 0] = 99.0

    def test_fresh_ids_never_collide(self):
        existing = {"0", "1", "ins0", "ins2"}
        out = tm.store.fresh_ids(existing, 4)
        assert len(out) == 4
        assert not set(out) & existing
        assert len(set(out)) == 4
