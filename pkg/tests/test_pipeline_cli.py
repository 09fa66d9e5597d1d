import csv
import json

import pytest

from kecsm.cli import main
from kecsm.core import MetricInstance
from kecsm.instances import (
    InstanceFormatError,
    euclidean_instance,
    load_instance,
    parse_matrix_json,
    parse_tsplib_euc2d,
    random_closure_instance,
)
from kecsm.pipeline import (
    CSV_COLUMNS,
    ExperimentReport,
    derived_seed,
    run_baseline,
    run_batch,
    run_pipeline,
    summary_path_for,
    write_records,
    write_summary,
)


class TestLoadInstance:
    def test_matrix_json_roundtrip(self, tmp_path):
        path = tmp_path / "inst.json"
        path.write_text('{"n": 2, "k": 3, "costs": [[0, 5], [5, 0]]}')
        inst = load_instance(str(path), "matrix-json")
        assert inst.n == 2 and inst.k == 3
        assert inst.cost[0, 1] == 5

    def test_tsplib_345(self):
        text = "\n".join([
            "NAME: tiny",
            "TYPE: TSP",
            "DIMENSION: 3",
            "EDGE_WEIGHT_TYPE: EUC_2D",
            "NODE_COORD_SECTION",
            "1 0 0",
            "2 3 4",
            "3 0 8",
            "EOF",
        ])
        inst = parse_tsplib_euc2d(text, k=2)
        assert inst.cost[0, 1] == pytest.approx(5.0)
        assert inst.cost[0, 2] == pytest.approx(8.0)

    def test_tsplib_requires_k(self):
        with pytest.raises(InstanceFormatError, match="--k"):
            parse_tsplib_euc2d("NODE_COORD_SECTION\n1 0 0\n2 1 0\nEOF", k=None)

    def test_non_metric_rejected_with_first_violation(self):
        text = '{"n": 3, "k": 2, "costs": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}'
        with pytest.raises(InstanceFormatError, match="triangle"):
            parse_matrix_json(text)

    def test_closure_flag_repairs(self):
        text = '{"n": 3, "k": 2, "costs": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}'
        inst = parse_matrix_json(text, closure=True)
        assert inst.cost[0, 2] == pytest.approx(2.0)

    def test_tsplib_rounding_can_break_triangle_inequality(self):
        # nearest-integer costs: 0.49 -> 0 twice but 0.98 -> 1
        text = "\n".join([
            "DIMENSION: 3",
            "EDGE_WEIGHT_TYPE: EUC_2D",
            "NODE_COORD_SECTION",
            "1 0 0",
            "2 0.49 0",
            "3 0.98 0",
            "EOF",
        ])
        with pytest.raises(InstanceFormatError, match="--closure"):
            parse_tsplib_euc2d(text, k=2)
        inst = parse_tsplib_euc2d(text, k=2, closure=True)
        assert inst.cost[0, 2] == pytest.approx(0.0)

    def test_bad_json_rejected(self):
        with pytest.raises(InstanceFormatError, match="invalid JSON"):
            parse_matrix_json("{nope")

    def test_unknown_format(self, tmp_path):
        path = tmp_path / "x"
        path.write_text("")
        with pytest.raises(InstanceFormatError, match="unknown format"):
            load_instance(str(path), "csv")


class TestRunPipeline:
    def test_triangle_k2_ratio_bound(self, triangle_unit):
        result = run_pipeline(triangle_unit, seed=1)
        assert result.record.connected
        assert result.record.ratio_lp <= 2.0

    def test_two_vertices_k6_total(self):
        inst = MetricInstance(n=2, cost=[[0, 5], [5, 0]], k=6)
        result = run_pipeline(inst, seed=123)
        t, b = result.record.t, result.record.b
        assert result.record.total == pytest.approx((2 * t + 2 * b) * 5.0)
        assert result.record.connected

    def test_repeatable_record(self):
        inst = euclidean_instance(7, 4, seed=5)
        a = run_pipeline(inst, seed=9).record
        b = run_pipeline(inst, seed=9).record
        assert a.as_row()[:-1] == b.as_row()[:-1]  # everything but wall time

    def test_ratio_opt_populated_when_requested(self):
        inst = euclidean_instance(4, 2, seed=3)
        rec = run_pipeline(inst, seed=0, with_opt=True).record
        assert rec.ratio_opt is not None
        assert rec.ratio_opt >= 1 - 1e-9

    def test_split_vertex_choice_is_robust(self):
        inst = euclidean_instance(6, 4, seed=12)
        for v in range(inst.n):
            result = run_pipeline(inst, seed=2, split_vertex=v)
            assert result.record.connected
            assert result.split_graph.u0 == v


class TestRunBatch:
    def test_grid_shape_and_order(self):
        report = run_batch("euclidean", n=6, instances=2, k_values=[2, 4],
                           trials=2, seed_base=10)
        assert len(report.records) == 8
        assert all(r.connected for r in report.records)
        keys = [(r.instance_id, r.k, r.seed) for r in report.records]
        assert keys == sorted(keys)

    def test_empty_k_list_rejected(self):
        with pytest.raises(ValueError, match="nothing to run"):
            run_batch("euclidean", n=6, instances=1, k_values=[], trials=1, seed_base=0)

    def test_aggregates_keyed_by_k(self):
        report = run_batch("random-closure", n=6, instances=1, k_values=[2, 3],
                           trials=2, seed_base=4)
        agg = report.aggregates()
        assert set(agg) == {2, 3}
        assert agg[2]["runs"] == 2
        assert agg[2]["connectivity_failures"] == 0
        assert agg[2]["mean_ratio_lp"] >= 1 - 1e-9

    def test_derived_seed_stable(self):
        assert derived_seed(1, 2, 3, 4) == derived_seed(1, 2, 3, 4)
        assert derived_seed(1, 2, 3, 4) != derived_seed(1, 2, 3, 5)


class TestBaselines:
    def test_naive_mst_double_triangle(self, triangle_unit):
        rec = run_baseline(triangle_unit, "naive-mst-double")
        assert rec.total == pytest.approx(4.0)  # doubled two-edge tree
        assert rec.connected

    def test_naive_always_connected(self):
        for seed in range(3):
            inst = euclidean_instance(7, 5, seed=seed)
            assert run_baseline(inst, "naive-mst-double").connected

    def test_karger_integral_solution_needs_no_repair(self):
        inst = MetricInstance(n=2, cost=[[0, 5], [5, 0]], k=4)
        rec = run_baseline(inst, "karger-independent", seed=3)
        assert rec.total == pytest.approx(20.0)
        assert rec.b == 0
        assert rec.connected

    def test_karger_repairs_until_connected(self):
        inst = random_closure_instance(8, 6, seed=2)
        rec = run_baseline(inst, "karger-independent", seed=5)
        assert rec.connected

    def test_unknown_baseline(self, triangle_unit):
        with pytest.raises(ValueError, match="unknown baseline"):
            run_baseline(triangle_unit, "magic")


class TestReports:
    def test_csv_columns_exact(self, tmp_path):
        report = run_batch("euclidean", n=5, instances=1, k_values=[2], trials=1, seed_base=0)
        path = tmp_path / "out.csv"
        write_records(report.records, str(path))
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == [
            "instance_id", "n", "k", "alpha", "t", "b", "seed", "lp_cost",
            "cost_tstar", "cost_b", "cost_f", "total", "ratio_lp", "ratio_opt",
            "connected", "augments", "ms",
        ]
        assert len(rows) == 2

    def test_csv_append_only(self, tmp_path):
        report = run_batch("euclidean", n=5, instances=1, k_values=[2], trials=1, seed_base=0)
        path = tmp_path / "out.csv"
        write_records(report.records, str(path))
        write_records(report.records, str(path))
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 3  # one header, two data rows

    def test_summary_json(self, tmp_path):
        report = run_batch("euclidean", n=5, instances=1, k_values=[2, 3], trials=1, seed_base=0)
        path = tmp_path / "out.csv"
        write_summary(report, summary_path_for(str(path)))
        payload = json.loads((tmp_path / "out.summary.json").read_text())
        assert set(payload) == {"2", "3"}
        assert payload["2"]["connectivity_failures"] == 0


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    inst = euclidean_instance(6, 3, seed=8)
    path.write_text(json.dumps({"n": 6, "k": 3, "costs": inst.cost.tolist()}))
    return str(path)


class TestCli:
    def test_solve_exit_zero(self, instance_file, tmp_path, capsys):
        out_csv = str(tmp_path / "run.csv")
        sol = str(tmp_path / "sol.json")
        code = main(["solve", "--input", instance_file, "--seed", "3",
                     "--emit", out_csv, "--emit-solution", sol])
        assert code == 0
        assert "connected=True" in capsys.readouterr().out
        assert (tmp_path / "run.csv").exists()
        payload = json.loads((tmp_path / "sol.json").read_text())
        assert payload["k"] == 3

    def test_verify_roundtrip(self, instance_file, tmp_path, capsys):
        sol = str(tmp_path / "sol.json")
        assert main(["solve", "--input", instance_file, "--emit-solution", sol]) == 0
        assert main(["verify", "--input", instance_file, "--solution", sol]) == 0
        out = capsys.readouterr().out
        assert "passes=True" in out

    def test_verify_detects_deficiency(self, instance_file, tmp_path):
        sol = tmp_path / "bad.json"
        sol.write_text(json.dumps({"edges": [[0, 1, 1], [1, 2, 1], [2, 3, 1],
                                             [3, 4, 1], [4, 5, 1]]}))
        assert main(["verify", "--input", instance_file, "--solution", str(sol)]) == 2

    def test_lp_command(self, instance_file, capsys):
        assert main(["lp", "--input", instance_file]) == 0
        assert "objective=" in capsys.readouterr().out

    def test_oracle_command(self, tmp_path, capsys):
        path = tmp_path / "tiny.json"
        path.write_text('{"n": 3, "k": 2, "costs": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]}')
        assert main(["oracle", "--input", str(path)]) == 0
        assert "opt_cost=3" in capsys.readouterr().out

    def test_sample_command(self, instance_file, capsys):
        assert main(["sample", "--input", instance_file, "--trials", "5"]) == 0
        assert "sampled 5 trees" in capsys.readouterr().out

    def test_batch_emits_reports(self, tmp_path, capsys):
        out_csv = str(tmp_path / "batch.csv")
        code = main(["batch", "--family", "euclidean", "--n", "5", "--instances", "1",
                     "--k", "2,3", "--trials", "2", "--seed", "7", "--emit", out_csv])
        assert code == 0
        assert (tmp_path / "batch.csv").exists()
        assert (tmp_path / "batch.summary.json").exists()

    def test_baseline_command(self, instance_file, capsys):
        assert main(["baseline", "--input", instance_file, "--which", "naive-mst-double"]) == 0
        assert "naive-mst-double" in capsys.readouterr().out

    def test_missing_file_is_input_error(self, tmp_path):
        assert main(["solve", "--input", str(tmp_path / "nope.json")]) == 3

    def test_bad_k_list_is_input_error(self):
        assert main(["batch", "--k", "2,x"]) == 3

    def test_usage_error_is_input_error(self):
        assert main(["batch"]) == 3  # --k required

    def test_non_metric_is_input_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 3, "k": 2, "costs": [[0, 1, 9], [1, 0, 1], [9, 1, 0]]}')
        assert main(["solve", "--input", str(path)]) == 3

    def test_non_convergence_is_exit_four(self, instance_file, monkeypatch):
        from kecsm import cli
        from kecsm.lp import LPNotConvergedError, LPReport

        def boom(inst, **kwargs):
            raise LPNotConvergedError(
                "LP did not converge",
                LPReport(objective=0.0, iterations=1, cuts_added=0, separation_slack=float("nan")),
            )

        monkeypatch.setattr(cli, "run_pipeline", lambda *a, **kw: boom(None))
        assert main(["solve", "--input", instance_file]) == 4

    def test_determinism_identical_csv(self, instance_file, tmp_path):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        for out in (a, b):
            assert main(["solve", "--input", instance_file, "--seed", "11",
                         "--emit", out]) == 0
        rows_a = list(csv.reader(open(a)))
        rows_b = list(csv.reader(open(b)))
        # all numeric columns identical except wall-clock ms
        assert rows_a[1][:-1] == rows_b[1][:-1]
