"""End-to-end checks of the command-line surface.

These drive main() with argv lists and real files in tmp_path, asserting
exit codes, output formats, the stderr config/seed echo, determinism, and
that inputs are never modified.  Numeric behavior is covered per module;
here the question is whether the wiring between files and functions holds.
"""

import json
from fractions import Fraction

import pytest

from sdlab.cli import main
from sdlab.posterior import attacker_model_to_json
from sdlab.tabulate import TableSpec, table_to_json, tabulate
from sdlab.worldmodel import (
    BlockSpec,
    PopulationSpec,
    _schema_to_json,
    population_spec_to_json,
    read_microdata_csv,
    write_microdata_csv,
)

from helpers import SMALL_SCHEMA, attacker_for, dataset, model_knowing, person


def _population_file(tmp_path, seed=7):
    w = Fraction(1, SMALL_SCHEMA.cells)
    spec = PopulationSpec(
        schema=SMALL_SCHEMA,
        blocks=(BlockSpec("b0", 6, "r0"), BlockSpec("b1", 4, "r1")),
        attribute_distribution=(w,) * SMALL_SCHEMA.cells,
        seed=seed,
    )
    path = tmp_path / "population.json"
    path.write_text(population_spec_to_json(spec), encoding="utf-8")
    return path


def _write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


RACE_TABLE = {"name": "race-by-block", "group_by": "block", "margin": ["race"], "age_bins": None}


def test_pipeline_generate_tabulate_protect_risk(tmp_path, capsys):
    pop = _population_file(tmp_path)
    data_csv = tmp_path / "world.csv"
    assert main(["generate", "--population", str(pop), "--out", str(data_csv)]) == 0
    err = capsys.readouterr().err
    assert "sdlab config:" in err
    assert "sdlab seed: 7" in err
    pop_bytes = pop.read_bytes()
    data_bytes = data_csv.read_bytes()

    geo = _write_json(tmp_path, "geo.json", {"b0": "r0", "b1": "r1"})
    table_spec = _write_json(tmp_path, "table.json", RACE_TABLE)
    argv = [
        "tabulate",
        "--data", str(data_csv),
        "--geography", str(geo),
        "--table", str(table_spec),
        "--format", "csv",
    ]
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "geo,race,count"
    assert len(lines) == 1 + 4  # 2 blocks x 2 race levels, zeros included
    assert sum(int(row.rsplit(",", 1)[1]) for row in lines[1:]) == 10

    mech = _write_json(
        tmp_path,
        "mechanism.json",
        {"kind": "GeometricNoise", "seed": 5, "alpha": "1/2", "sensitivity": 1},
    )
    targets = _write_json(tmp_path, "targets.json", [{"type": "table", **RACE_TABLE}])
    release = tmp_path / "release.json"
    argv = [
        "protect",
        "--data", str(data_csv),
        "--geography", str(geo),
        "--mechanism", str(mech),
        "--targets", str(targets),
        "--out", str(release),
    ]
    assert main(argv) == 0
    assert "sdlab seed: 5" in capsys.readouterr().err

    persons = read_microdata_csv(data_csv.read_text(encoding="utf-8")).persons
    attacker = attacker_for(
        persons,
        geography={"b0": "r0", "b1": "r1"}.items(),
        models=tuple(model_knowing(p, unknown="sensitive") for p in persons),
    )
    attacker_path = tmp_path / "attacker.json"
    attacker_path.write_text(attacker_model_to_json(attacker), encoding="utf-8")
    argv = [
        "risk",
        "--method", "cf-bayes",
        "--release", str(release),
        "--attacker", str(attacker_path),
        "--data", str(data_csv),
        "--geography", str(geo),
        "--person", persons[0].id,
        "--value", "1",
    ]
    assert main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["methodology"] == "counterfactual_bayes"
    assert doc["report"]["applicable"] is True
    assert doc["privacy_loss"]["e_epsilon"] == "2"  # alpha 1/2, sensitivity 1

    # nothing along the way may touch the inputs
    assert pop.read_bytes() == pop_bytes
    assert data_csv.read_bytes() == data_bytes


def test_tabulate_output_is_byte_stable(tmp_path, capsys):
    pop = _population_file(tmp_path)
    data_csv = tmp_path / "world.csv"
    main(["generate", "--population", str(pop), "--out", str(data_csv)])
    table_spec = _write_json(tmp_path, "table.json", RACE_TABLE)
    runs = []
    for _ in range(2):
        assert main(["tabulate", "--data", str(data_csv), "--table", str(table_spec)]) == 0
        runs.append(capsys.readouterr().out)
    assert runs[0] == runs[1]
    json.loads(runs[0])


def test_scenario_run_all_passes_and_repeats_identically(capsys):
    outputs = []
    for _ in range(2):
        assert main(["scenario", "run-all"]) == 0
        captured = capsys.readouterr()
        assert "sdlab config:" in captured.err
        outputs.append(captured.out)
    assert outputs[0] == outputs[1]
    assert "yes" in outputs[0]


def test_scenario_run_single(capsys):
    assert main(["scenario", "run", "uninformative"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scenario"] == "uninformative"
    assert doc["verdicts"] == doc["expected"]


def test_scenario_unknown_name_is_data_error(capsys):
    assert main(["scenario", "run", "nonsense"]) == 1
    assert "sdlab: error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--population", "x.json", "--bogus"])
    assert exc.value.code == 2


def test_missing_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_missing_input_file_is_data_error(tmp_path, capsys):
    assert main(["generate", "--population", str(tmp_path / "absent.json")]) == 1
    assert "sdlab: error" in capsys.readouterr().err


def test_reconstruct_full_cross_tab_pins_everything(tmp_path, capsys):
    persons = (
        person("p0", "b0", sex=0, race=0),
        person("p1", "b0", sex=1, race=1),
        person("p2", "b0", sex=1, race=1),
    )
    data = dataset(persons)
    table = tabulate(
        data,
        TableSpec(
            name="full",
            group_by="block",
            margin=("sex", "age_bin", "race", "ethnicity"),
            age_bins=SMALL_SCHEMA.age_bins,
        ),
    )
    schema = _write_json(tmp_path, "schema.json", _schema_to_json(SMALL_SCHEMA))
    geo = _write_json(tmp_path, "geo.json", {"b0": "r0"})
    table_path = tmp_path / "table.json"
    table_path.write_text(table_to_json(table), encoding="utf-8")
    argv = [
        "reconstruct",
        "--schema", str(schema),
        "--geography", str(geo),
        "--table", str(table_path),
        "--list-solutions",
    ]
    assert main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["solution_count"] == 1
    assert doc["count_is_exact"] is True
    assert all(row["pinned"] for row in doc["variability"])
    assert len(doc["solutions"]) == 1
    assert sum(doc["solutions"][0]) == len(persons)


def test_reident_csv_and_confirmation(tmp_path, capsys):
    known = dataset((person("k0", "b0", sex=0, race=0), person("k1", "b0", sex=1, race=1)))
    candidates = dataset(
        (
            person("c0", "b0", sex=0, race=0, sensitive=1),
            person("c1", "b0", sex=1, race=1, sensitive=0),
            person("c2", "b0", sex=1, race=0, sensitive=0),
        )
    )
    known_path = tmp_path / "known.csv"
    known_path.write_text(write_microdata_csv(known), encoding="utf-8")
    cand_path = tmp_path / "candidates.csv"
    cand_path.write_text(write_microdata_csv(candidates), encoding="utf-8")
    key = _write_json(tmp_path, "key.json", {"attributes": ["sex", "race"]})
    argv = [
        "reident",
        "--known", str(known_path),
        "--candidates", str(cand_path),
        "--key", str(key),
    ]
    assert main(argv + ["--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "known_id,candidate_id",
        "k0,c0",
        "k1,c1",
    ]
    # confirmation looks the true person up by the attacker's id, so the
    # known file doubles as the confidential truth here
    assert main(argv + ["--truth", str(known_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["matched"] == 2
    assert doc["match_rate"] == "1"
    assert doc["confirmation"]["precision"] == "1"
    assert doc["group_rates"]


def test_critique_pct_reports_sentinels_and_exact_strings(tmp_path, capsys):
    pairs = tmp_path / "pairs.csv"
    pairs.write_text("before,after\n0,0\n0,5\n3,1\n", encoding="utf-8")
    assert main(["critique", "pct", "--pairs", str(pairs)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["both_zero_fraction"] == "1/3"
    by_pair = {(r["before"], r["after"]): r for r in doc["rows"]}
    assert by_pair[(0, 0)] == {"before": 0, "after": 0, "arc": "no-change", "naive": "undefined"}
    assert by_pair[(0, 5)]["arc"] == "200"
    assert by_pair[(3, 1)]["arc"] == "-100"
    assert by_pair[(3, 1)]["naive"] == "-200/3"


def test_critique_rvr_rows_account_for_every_trial(tmp_path, capsys):
    persons = tuple(
        person(f"p{i}", "b0" if i < 6 else "b1", sex=i % 2, race=0) for i in range(10)
    )
    data_path = tmp_path / "truth.csv"
    data_path.write_text(write_microdata_csv(dataset(persons)), encoding="utf-8")
    argv = [
        "critique",
        "rvr",
        "--data", str(data_path),
        "--strategy", "constant",
        "--combo", "0,0",
        "--attributes", "sex,race",
        "--trials", "200",
        "--seed", "3",
    ]
    assert main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["trials"] == 200
    assert sum(r["hits"] + r["misses"] for r in doc["rows"]) == 200
    Fraction(doc["analytic_hit_rate"])
    assert doc["hits"] == sum(r["hits"] for r in doc["rows"])
