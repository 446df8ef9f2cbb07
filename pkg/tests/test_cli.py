"""Command-line interface, exercised in-process through main()."""

import json

import pytest

from shrinkcut import (
    build_mdkp_qubo,
    graph_from_json,
    merge_steps_from_jsonl,
    model_from_json,
    qubo_to_maxcut,
)
from shrinkcut.cli import load_config_file, main

MDKP_TEXT = "3 1 12\n5 7 4\n2 3 4\n5\n"
TRIANGLE_TEXT = "3\n1 2\n1 3\n2 3\n"


@pytest.fixture
def mdkp_file(tmp_path):
    path = tmp_path / "knap.txt"
    path.write_text(MDKP_TEXT)
    return path


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.txt"
    path.write_text(TRIANGLE_TEXT)
    return path


def test_build_qubo_writes_the_worked_model(mdkp_file, tmp_path, mdkp_tiny):
    out = tmp_path / "model.json"
    code = main(
        ["build-qubo", "--kind", "mdkp", "--instance", str(mdkp_file), "--out", str(out)]
    )
    assert code == 0
    model = model_from_json(out.read_text())
    assert model == build_mdkp_qubo(mdkp_tiny, P=70.0)


def test_build_qubo_use_slack_flag_adds_slack_bits(mdkp_file, tmp_path):
    out = tmp_path / "model.json"
    code = main(
        [
            "build-qubo",
            "--kind",
            "mdkp",
            "--instance",
            str(mdkp_file),
            "--use-slack",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert model_from_json(out.read_text()).n_vars == 5


def test_build_qubo_requires_kind_and_instance(mdkp_file):
    with pytest.raises(SystemExit) as excinfo:
        main(["build-qubo", "--instance", str(mdkp_file)])
    assert excinfo.value.code == 2


def test_to_maxcut_from_a_model_file(mdkp_file, tmp_path, mdkp_tiny):
    model_path = tmp_path / "model.json"
    main(["build-qubo", "--kind", "mdkp", "--instance", str(mdkp_file), "--out", str(model_path)])
    out = tmp_path / "graph.json"
    code = main(["to-maxcut", "--model", str(model_path), "--out", str(out)])
    assert code == 0
    graph = graph_from_json(out.read_text())
    assert graph == qubo_to_maxcut(build_mdkp_qubo(mdkp_tiny, P=70.0))


def test_to_maxcut_straight_from_an_instance(triangle_file, tmp_path):
    out = tmp_path / "graph.json"
    code = main(["to-maxcut", "--kind", "mis", "--instance", str(triangle_file), "--out", str(out)])
    assert code == 0
    assert graph_from_json(out.read_text()).n_nodes == 4


def test_shrink_writes_reduced_graph_and_merge_log(triangle_file, tmp_path):
    out = tmp_path / "reduced.json"
    steps = tmp_path / "steps.jsonl"
    code = main(
        [
            "shrink",
            "--kind",
            "mis",
            "--instance",
            str(triangle_file),
            "--k",
            "2",
            "--steps-out",
            str(steps),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    reduced = graph_from_json(out.read_text())
    assert reduced.n_nodes == 2
    log = merge_steps_from_jsonl(steps.read_text())
    assert len(log) == 2
    assert [s.order for s in log] == [1, 2]


def test_shrink_accepts_a_graph_file(tmp_path, triangle_file):
    graph_path = tmp_path / "graph.json"
    main(["to-maxcut", "--kind", "mis", "--instance", str(triangle_file), "--out", str(graph_path)])
    out = tmp_path / "reduced.json"
    code = main(["shrink", "--graph", str(graph_path), "--k", "3", "--out", str(out)])
    assert code == 0
    assert graph_from_json(out.read_text()).n_nodes == 3


def test_shrink_rejects_both_k_and_alpha(triangle_file):
    with pytest.raises(SystemExit) as excinfo:
        main(
            [
                "shrink",
                "--kind",
                "mis",
                "--instance",
                str(triangle_file),
                "--k",
                "2",
                "--alpha",
                "0.5",
            ]
        )
    assert excinfo.value.code == 2


def test_solve_exact_reports_the_known_optimum(mdkp_file, tmp_path):
    model_path = tmp_path / "model.json"
    main(["build-qubo", "--kind", "mdkp", "--instance", str(mdkp_file), "--out", str(model_path)])
    out = tmp_path / "solution.json"
    code = main(
        ["solve", "--model", str(model_path), "--backend", "exact", "--name", "knap", "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc == {"instance": "knap", "bits": [1, 1, 0], "energy": -12.0}


def test_solve_sa_is_deterministic_across_invocations(mdkp_file, tmp_path):
    model_path = tmp_path / "model.json"
    main(["build-qubo", "--kind", "mdkp", "--instance", str(mdkp_file), "--out", str(model_path)])
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = main(
            [
                "solve",
                "--model",
                str(model_path),
                "--backend",
                "sa",
                "--seed",
                "4",
                "--sweeps",
                "80",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        outputs.append(out.read_text())
    assert outputs[0] == outputs[1]


def test_pipeline_exit_zero_and_report_json(mdkp_file, tmp_path):
    out = tmp_path / "report.json"
    code = main(
        ["pipeline", "--kind", "mdkp", "--instance", str(mdkp_file), "--seed", "0", "--out", str(out)]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["final_objective"] == 12.0
    assert payload["feasible_after"] is True
    assert payload["gap_pct"] == 0.0


def test_pipeline_exits_one_when_infeasible_and_repair_disabled(tmp_path):
    # a feather-light penalty makes overpacking optimal for the raw QUBO
    instance = tmp_path / "loose.txt"
    instance.write_text("2 1 0\n10 10\n1 1\n1\n")
    code = main(
        [
            "pipeline",
            "--kind",
            "mdkp",
            "--instance",
            str(instance),
            "--penalty-multiplier",
            "0.01",
            "--no-repair",
            "--no-local-search",
            "--out",
            str(tmp_path / "report.json"),
        ]
    )
    assert code == 1
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["feasible_before_repair"] is False
    assert payload["feasible_after"] is False


def test_pipeline_repairs_the_same_case_by_default(tmp_path):
    instance = tmp_path / "loose.txt"
    instance.write_text("2 1 0\n10 10\n1 1\n1\n")
    out = tmp_path / "report.json"
    code = main(
        [
            "pipeline",
            "--kind",
            "mdkp",
            "--instance",
            str(instance),
            "--penalty-multiplier",
            "0.01",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["feasible_before_repair"] is False
    assert payload["feasible_after"] is True
    assert payload["repair_iterations"] >= 1


def test_pipeline_config_file_defaults_and_flag_overrides(mdkp_file, tmp_path):
    config = tmp_path / "defaults.cfg"
    config.write_text(
        "# solver defaults\nlam = 0.5\nbackend = sa\nsa_sweeps = 300\nseed = 9\n"
    )
    out = tmp_path / "report.json"
    code = main(
        [
            "pipeline",
            "--kind",
            "mdkp",
            "--instance",
            str(mdkp_file),
            "--config",
            str(config),
            "--lambda",
            "2.0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    echoed = json.loads(out.read_text())["config"]
    assert echoed["lam"] == 2.0  # explicit flag beats the file
    assert echoed["backend"] == "sa"
    assert echoed["sa_sweeps"] == 300
    assert echoed["seed"] == 9


def test_load_config_file_rejects_unknown_keys(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("coolness = 11\n")
    with pytest.raises(ValueError, match="unknown config key"):
        load_config_file(config)
    assert main(["pipeline", "--kind", "mis", "--instance", "x", "--config", str(config)]) == 2


def test_load_config_file_coercion(tmp_path):
    config = tmp_path / "ok.cfg"
    config.write_text("use_slack = true\nk = 4\nalpha = 0.25\nname = demo\nsdp_rank = none\n")
    assert load_config_file(config) == {
        "use_slack": True,
        "k": 4,
        "alpha": 0.25,
        "name": "demo",
        "sdp_rank": None,
    }


def test_bench_csv_is_byte_identical_across_runs(mdkp_file, triangle_file, tmp_path):
    args = [
        "bench",
        "--instances",
        f"mdkp:{mdkp_file}",
        f"mis:{triangle_file}",
        "--strategies",
        "1/2",
        "adaptive",
        "--backend",
        "exact",
        "--seed",
        "3",
    ]
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().strip().split("\n")
    assert len(lines) == 5
    assert lines[0].startswith("Instance,Strategy,ConstraintAware")


def test_bench_reports_failures_with_exit_one(mdkp_file, tmp_path, capsys):
    code = main(
        [
            "bench",
            "--instances",
            "mdkp:/nonexistent.txt",
            f"mdkp:{mdkp_file}",
            "--strategies",
            "1/2",
            "--out",
            str(tmp_path / "bench.csv"),
        ]
    )
    assert code == 1
    assert "bench: nonexistent/1/2" in capsys.readouterr().err


def test_bench_rejects_malformed_instance_specs(mdkp_file):
    with pytest.raises(SystemExit) as excinfo:
        main(["bench", "--instances", "just-a-path.txt"])
    assert excinfo.value.code == 2


def test_verify_accepts_and_rejects_solutions(triangle_file, tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"instance": "triangle", "bits": [1, 0, 0]}))
    assert (
        main(["verify", "--kind", "mis", "--instance", str(triangle_file), "--solution", str(good)])
        == 0
    )
    assert "feasible" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"instance": "triangle", "bits": [1, 1, 0]}))
    assert (
        main(["verify", "--kind", "mis", "--instance", str(triangle_file), "--solution", str(bad)])
        == 1
    )
    assert "both endpoints selected" in capsys.readouterr().out


def test_repair_round_trips_through_verify(triangle_file, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"instance": "triangle", "bits": [1, 1, 1]}))
    fixed = tmp_path / "fixed.json"
    code = main(
        [
            "repair",
            "--kind",
            "mis",
            "--instance",
            str(triangle_file),
            "--solution",
            str(broken),
            "--out",
            str(fixed),
        ]
    )
    assert code == 0
    doc = json.loads(fixed.read_text())
    assert sum(doc["bits"]) >= 1
    assert (
        main(["verify", "--kind", "mis", "--instance", str(triangle_file), "--solution", str(fixed)])
        == 0
    )


def test_malformed_solution_json_exits_two(triangle_file, tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"instance": "triangle"}))
    code = main(
        ["verify", "--kind", "mis", "--instance", str(triangle_file), "--solution", str(broken)]
    )
    assert code == 2
    assert "shrinkcut:" in capsys.readouterr().err


def test_parse_errors_exit_two(tmp_path, capsys):
    mangled = tmp_path / "mangled.txt"
    mangled.write_text("3 1\n")
    code = main(["build-qubo", "--kind", "mdkp", "--instance", str(mangled)])
    assert code == 2
    assert "shrinkcut:" in capsys.readouterr().err
