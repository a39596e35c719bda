import io
import json

import pytest

from reorglab.cli import (
    EXIT_GUARD,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_VALIDATION,
    ParseError,
    ValidationError,
    bundled_scenarios,
    list_scenarios,
    main,
    render_report,
    run_scenario,
)

BUNDLED = [
    "dag-thm81",
    "extended-spne",
    "overhead-grid",
    "pool-simple-table7",
    "quantify-appendixB",
    "selfish-table8",
    "simple-table1",
    "strong-simple-table2",
    "tendermint-anchor",
    "tendermint-withholding",
]


def bundled(name: str) -> io.StringIO:
    return io.StringIO(bundled_scenarios()[name])


def test_bundled_set_complete():
    assert sorted(bundled_scenarios()) == BUNDLED


def test_list_scenarios_sorted():
    names = [name for name, _ in list_scenarios()]
    assert names == sorted(names) == BUNDLED


def test_list_includes_user_dir(tmp_path):
    (tmp_path / "my-scenario.json").write_text(
        json.dumps({"scenario": "my-scenario", "game": {"kind": "overhead"}})
    )
    names = [name for name, _ in list_scenarios(str(tmp_path))]
    assert "my-scenario" in names
    assert names == sorted(names)


def test_list_with_empty_user_dir(tmp_path):
    names = [name for name, _ in list_scenarios(str(tmp_path))]
    assert names == BUNDLED


def test_trace_summary_carries_payoffs(tmp_path):
    trace_path = tmp_path / "trace.jsonl"
    run_scenario(bundled("simple-table1"), trace_path=str(trace_path))
    summary = json.loads(trace_path.read_text().strip().splitlines()[-1])
    assert summary["payoffs"]  # settled per-validator amounts ride the trace


def test_simple_table1_report():
    report = run_scenario(bundled("simple-table1"))
    matrix = report["results"][0]["matrix"]["cells"]
    assert matrix == {"succeed/C": "1", "succeed/NC": "0", "fail/C": "0", "fail/NC": "0"}
    nash_checks = [r for r in report["results"] if r["check"] == "nash"]
    assert all(r["equilibrium"]["verdict"] == "nash" for r in nash_checks)


def test_failed_attack_still_reports(tmp_path):
    doc = {
        "scenario": "losing-selfish",
        "game": {
            "kind": "selfish-mining", "committee_size": 10, "boost": 4,
            "n_adversarial_slots": 2, "n_non_adversarial_slots": 3,
            "allow_condition_violation": True,
        },
        "checks": [{"type": "outcome", "profile": "compliant-all"}],
    }
    # the run completes with success false, exit code stays 0
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path)]) == EXIT_OK
    report = run_scenario(str(path))
    assert report["results"][0]["outcome"]["success"] is False


def test_malformed_file_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == EXIT_PARSE
    with pytest.raises(ParseError):
        run_scenario(str(path))


def test_unknown_key_exit_3(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"scenario": "x", "game": {"kind": "overhead"}, "bogus": 1}))
    assert main(["run", str(path)]) == EXIT_VALIDATION
    with pytest.raises(ValidationError):
        run_scenario(str(path))


def test_bad_game_kind_exit_3(tmp_path):
    path = tmp_path / "bad-kind.json"
    path.write_text(json.dumps({"scenario": "x", "game": {"kind": "sample", "committee_size": 4}}))
    assert main(["run", str(path)]) == EXIT_VALIDATION


def test_semantically_invalid_game_exit_3(tmp_path):
    # a pool filling the whole committee is a config error, not a crash
    path = tmp_path / "bad-pool.json"
    path.write_text(
        json.dumps(
            {
                "scenario": "x",
                "game": {
                    "kind": "simple", "committee_size": 4, "boost": 2,
                    "pool": {"members_per_slot": 4},
                },
                "checks": [{"type": "outcome"}],
            }
        )
    )
    assert main(["run", str(path)]) == EXIT_VALIDATION


def test_explosion_guard_exit_4(tmp_path):
    path = tmp_path / "big.json"
    doc = json.loads(bundled_scenarios()["simple-table1"])
    path.write_text(json.dumps(doc))
    assert main(["run", str(path), "--max-joint-actions", "2"]) == EXIT_GUARD


def test_report_round_trip_identical():
    for name in BUNDLED:
        a = render_report(run_scenario(bundled(name)), "json")
        b = render_report(run_scenario(bundled(name)), "json")
        assert a == b, name


def test_trace_export(tmp_path):
    trace_path = tmp_path / "trace.jsonl"
    run_scenario(bundled("simple-table1"), trace_path=str(trace_path))
    lines = trace_path.read_text().strip().splitlines()
    assert all(json.loads(line) for line in lines)
    assert json.loads(lines[-1])["kind"] == "summary"


def test_seed_recorded():
    report = run_scenario(bundled("simple-table1"), seed_override=42)
    assert report["seed"] == 42


def test_profile_overrides(tmp_path):
    # a defecting last leader on top of the compliant base profile must
    # surface as a profitable deviation in the SPNE check
    doc = {
        "scenario": "extended-defect-leader-2",
        "game": {"kind": "extended", "committee_size": 4, "boost": 2, "horizon": 2},
        "checks": [
            {
                "type": "spne",
                "profile": {
                    "base": "compliant-all",
                    "overrides": [{"slot": 2, "role": "leader", "action": "NC"}],
                },
            }
        ],
    }
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    report = run_scenario(str(path))
    entry = report["results"][0]
    assert entry["profile"] == "compliant-all+overrides"
    assert entry["equilibrium"]["verdict"] == "not-equilibrium"
    assert any(d["gain"] == "1" for d in entry["equilibrium"]["deviations"])


def test_profile_override_validation(tmp_path):
    doc = {
        "scenario": "bad-override",
        "game": {"kind": "extended", "committee_size": 4, "boost": 2, "horizon": 2},
        "checks": [
            {
                "type": "outcome",
                "profile": {
                    "base": "compliant-all",
                    "overrides": [{"slot": 9, "role": "leader", "action": "NC"}],
                },
            }
        ],
    }
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path)]) == EXIT_VALIDATION


def test_output_key_writes_report(tmp_path):
    out_path = tmp_path / "report.json"
    doc = json.loads(bundled_scenarios()["overhead-grid"])
    doc["output"] = {"path": str(out_path), "format": "json"}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    run_scenario(str(path))
    written = json.loads(out_path.read_text())
    assert written["scenario"] == "overhead-grid"


def test_cli_run_bundled_by_id(capsys):
    assert main(["run", "simple-table1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "succeed/C" in out


def test_cli_json_format(capsys):
    assert main(["run", "overhead-grid", "--format", "json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["scenario"] == "overhead-grid"


def test_cli_overhead_subcommand(capsys):
    assert main(["overhead", "--n-agg", "16"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "33216" in out and "12544" in out


def test_batch_runs_directory(tmp_path, capsys):
    for name in ("simple-table1", "overhead-grid"):
        (tmp_path / f"{name}.json").write_text(bundled_scenarios()[name])
    assert main(["batch", str(tmp_path), "--jobs", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "simple-table1" in out and "overhead-grid" in out


def test_tendermint_scenarios_via_cli():
    report = run_scenario(bundled("tendermint-withholding"))
    result = report["results"][0]
    assert result["stalled_rounds"] == 2
    assert result["payoff_per_nonhonest"] == "2"
    report = run_scenario(bundled("tendermint-anchor"))
    assert report["results"][0]["first_finalized_round"] == 1


def test_quantify_scenario_via_cli():
    report = run_scenario(bundled("quantify-appendixB"))
    gain = report["results"][0]["attack_gain"]
    assert gain["delta_eth"] == pytest.approx(0.0711, rel=0.02)
