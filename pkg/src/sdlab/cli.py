"""Command-line front end: deterministic, file-based workflows.

Every subcommand reads and writes the package's documented formats
(microdata CSV, JSON for specs, releases, reports).  Outputs are
byte-stable for fixed inputs and seed; the resolved configuration,
including the seed, is echoed to stderr so runs can be reproduced from
logs alone.

Exit codes: 0 success, 1 data or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import critiques, scenarios
from .mechanisms import (
    Release,
    Table,
    _target_from_json,
    apply,
    mechanism_spec_from_json,
    release_from_json,
    release_to_json,
)
from .posterior import attacker_model_from_json
from .rational import format_fraction, parse_fraction
from .reconstruct import (
    build_constraints,
    constraint_system_to_json,
    solve_all,
    variability_report,
)
from .reident import KeySpec, confirm_matches, group_rates, match_one_to_one
from .risk import (
    counterfactual_bayes,
    counterfactual_dataset,
    counterfactual_freq,
    abs_risk_with_linking,
    abs_risk_without_linking,
    invariant_counterfactual,
    prior_to_posterior,
    risk_report_to_json_obj,
)
from .tabulate import invariant_totals, table_from_json, table_spec_from_json_obj, table_to_json, tabulate
from .worldmodel import (
    Dataset,
    _age_bins_from_json,
    _schema_from_json,
    generate,
    population_spec_from_json,
    read_microdata_csv,
    with_imputed,
    write_microdata_csv,
)

__all__ = ["main"]


def _echo_config(command: str, args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    cfg["command"] = command
    print(f"sdlab config: {json.dumps(cfg, sort_keys=True, default=str)}", file=sys.stderr)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_dataset(path: str, geography_path: str | None) -> Dataset:
    geography = None
    if geography_path is not None:
        geography = json.loads(_read_text(geography_path))
    return read_microdata_csv(_read_text(path), geography)


def _json_doc(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --- subcommand bodies ---------------------------------------------------------


def _cmd_generate(args: argparse.Namespace) -> int:
    spec = population_spec_from_json(_read_text(args.population))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    print(f"sdlab seed: {spec.seed}", file=sys.stderr)
    data = generate(spec)
    if args.impute is not None:
        data = with_imputed(data, parse_fraction(args.impute), spec.seed)
    _write_out(write_microdata_csv(data), args.out)
    return 0


def _table_csv(table: Table) -> str:
    import csv
    import io

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["geo", *table.spec.margin, "count"])
    for geo, margin, count in table.cells:
        writer.writerow([geo, *margin, "" if count is None else count])
    return out.getvalue()


def _cmd_tabulate(args: argparse.Namespace) -> int:
    data = _load_dataset(args.data, args.geography)
    spec = table_spec_from_json_obj(json.loads(_read_text(args.table)))
    table = tabulate(data, spec)
    _write_out(_table_csv(table) if args.format == "csv" else table_to_json(table), args.out)
    return 0


def _cmd_protect(args: argparse.Namespace) -> int:
    data = _load_dataset(args.data, args.geography)
    spec = mechanism_spec_from_json(json.loads(_read_text(args.mechanism)))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    print(f"sdlab seed: {spec.seed}", file=sys.stderr)
    targets = ()
    if args.targets is not None:
        targets = tuple(_target_from_json(t) for t in json.loads(_read_text(args.targets)))
    release = apply(data, spec, targets)
    _write_out(release_to_json(release), args.out)
    return 0


def _release_tables(paths: list[str]) -> list[Table]:
    tables = []
    for path in paths:
        release = release_from_json(_read_text(path))
        tables.extend(p for p in release.products if isinstance(p, Table))
    return tables


def _cmd_reconstruct(args: argparse.Namespace) -> int:
    schema = _schema_from_json(json.loads(_read_text(args.schema)))
    geography = tuple(json.loads(_read_text(args.geography)).items())
    tables = []
    for path in args.table or []:
        tables.append(table_from_json(_read_text(path)))
    tables.extend(_release_tables(args.release or []))
    if not tables:
        raise ValueError("reconstruct needs at least one table or release")
    invariants = None
    if args.invariants is not None:
        invariants = invariant_totals(_load_dataset(args.invariants, None))
    system = build_constraints(schema, geography, tables, invariants)
    if args.system_out is not None:
        Path(args.system_out).write_text(constraint_system_to_json(system), encoding="utf-8")
    found = solve_all(system)
    summary = variability_report(system, found)
    doc = {
        "variables": [[b, c] for b, c in system.variables],
        "equations": len(system.equations),
        "solution_count": found.count,
        "count_is_exact": found.count_is_exact,
        "variability": [
            {"block": s.block, "cell": s.cell, "low": s.low, "high": s.high, "pinned": s.pinned}
            for s in summary
        ],
    }
    if args.list_solutions:
        doc["solutions"] = [list(s) for s in found.solutions]
    if args.format == "csv":
        import csv
        import io

        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["block", "cell", "low", "high", "pinned"])
        for s in summary:
            writer.writerow([s.block, s.cell, s.low, s.high, s.pinned])
        _write_out(out.getvalue(), args.out)
    else:
        _write_out(_json_doc(doc), args.out)
    return 0


def _key_from_json(obj: dict) -> KeySpec:
    return KeySpec(
        attributes=tuple(obj["attributes"]),
        age_rule=obj.get("age_rule", "exact"),
        age_bins=None if obj.get("age_bins") is None else _age_bins_from_json(obj["age_bins"]),
    )


def _cmd_reident(args: argparse.Namespace) -> int:
    known = _load_dataset(args.known, args.geography)
    candidates = _load_dataset(args.candidates, args.geography)
    key = _key_from_json(json.loads(_read_text(args.key)))
    result = match_one_to_one(known, candidates, key)
    if args.format == "csv":
        import csv
        import io

        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["known_id", "candidate_id"])
        for pair in result.pairs:
            writer.writerow([pair.known_id, pair.candidate_id])
        _write_out(out.getvalue(), args.out)
        return 0
    doc = {
        "matched": result.matched,
        "known_total": result.known_total,
        "candidate_total": result.candidate_total,
        "match_rate": format_fraction(result.match_rate),
        "pairs": [[p.known_id, p.candidate_id] for p in result.pairs],
    }
    if args.truth is not None:
        truth = _load_dataset(args.truth, args.geography)
        report = confirm_matches(result, candidates, truth, key)
        doc["confirmation"] = {
            "confirmed": len(report.confirmed),
            "confirmed_pairs": [[p.known_id, p.candidate_id] for p in report.confirmed],
            "putative": report.putative,
            "data_defined_only": report.data_defined_only,
            "precision": None if report.precision is None else format_fraction(report.precision),
        }
        doc["group_rates"] = [
            {
                "size_range": list(g.size_range),
                "homogeneity_range": [format_fraction(h) for h in g.homogeneity_range],
                "population": g.population,
                "putative": g.putative,
                "confirmed": g.confirmed,
            }
            for g in group_rates(result, report, truth)
        ]
    _write_out(_json_doc(doc), args.out)
    return 0


def _privacy_loss_obj(release: Release):
    loss = release.privacy_loss
    if loss is None:
        return None
    return {
        "e_epsilon": format_fraction(loss.ratio_bound),
        "epsilon": loss.epsilon,
        "alpha": format_fraction(loss.alpha),
        "sensitivity": loss.sensitivity,
    }


def _cmd_risk(args: argparse.Namespace) -> int:
    release = release_from_json(_read_text(args.release))
    value = parse_fraction(args.value) if "/" in args.value else int(args.value)
    if args.method in ("abs-link", "abs", "prior-posterior", "cf-bayes") and args.attacker is None:
        raise ValueError(f"method {args.method} needs --attacker")
    if args.method in ("cf-bayes", "cf-freq", "invariant-cf") and args.data is None:
        raise ValueError(f"method {args.method} needs --data")
    if args.method in ("abs-link", "abs", "prior-posterior"):
        attacker = attacker_model_from_json(_read_text(args.attacker))
        if args.method == "abs-link":
            report = abs_risk_with_linking(attacker, release, args.person, value, args.attribute)
        elif args.method == "abs":
            report = abs_risk_without_linking(attacker, release, args.person, value, args.attribute)
        else:
            report = prior_to_posterior(
                attacker, release, args.person, value, args.attribute, mode=args.mode or "diff"
            )
    elif args.method == "cf-bayes":
        attacker = attacker_model_from_json(_read_text(args.attacker))
        data = _load_dataset(args.data, args.geography)
        mode = args.mode or "realized"
        report = counterfactual_bayes(
            attacker,
            data,
            release.mechanism,
            release.targets,
            args.person,
            value,
            args.attribute,
            convention=args.convention,
            mode=mode,
            release=release if mode == "realized" else None,
        )
    elif args.method == "cf-freq":
        data = _load_dataset(args.data, args.geography)
        cf = counterfactual_dataset(data, args.person, args.convention)
        curve = counterfactual_freq(release.mechanism, release.targets, data, cf)
        if args.format == "csv":
            _write_out(curve.to_csv(), args.out)
        else:
            doc = {
                "points": [[format_fraction(a), format_fraction(p)] for a, p in curve.points],
                "ratio_bound": None
                if curve.ratio_bound is None
                else format_fraction(curve.ratio_bound),
                "privacy_loss": _privacy_loss_obj(release),
            }
            _write_out(_json_doc(doc), args.out)
        return 0
    elif args.method == "invariant-cf":
        data = _load_dataset(args.data, args.geography)
        report = invariant_counterfactual(data, release.mechanism, release.targets, args.person)
    else:
        raise ValueError(f"unknown risk method {args.method!r}")
    doc = {"report": risk_report_to_json_obj(report), "privacy_loss": _privacy_loss_obj(release)}
    _write_out(_json_doc(doc), args.out)
    return 0


def _cmd_scenario(args: argparse.Namespace) -> int:
    if args.action == "run-all":
        verdicts = scenarios.run_all(args.seed)
        if args.format == "json":
            _write_out(scenarios.verdicts_to_json(verdicts), args.out)
        else:
            _write_out(scenarios.render_grid(verdicts), args.out)
        bad = scenarios.mismatches(verdicts)
        if bad:
            print(f"verdict mismatch in: {', '.join(bad)}", file=sys.stderr)
            return 1
        return 0
    if args.name not in scenarios.SCENARIO_ORDER:
        raise ValueError(
            f"unknown scenario {args.name!r}; choose from {', '.join(scenarios.SCENARIO_ORDER)}"
        )
    verdict = scenarios._RUNNERS[args.name](args.seed)
    _write_out(_json_doc(scenarios.scenario_verdict_to_json_obj(verdict)), args.out)
    return 0 if verdict.matches_expected else 1


def _strategy_from_args(args: argparse.Namespace):
    attributes = tuple(args.attributes.split(","))
    if args.strategy == "constant":
        if args.combo is None:
            raise ValueError("constant strategy needs --combo")
        combo = tuple(int(v) for v in args.combo.split(","))
        if len(combo) != len(attributes):
            raise ValueError("--combo length must match --attributes")
        return critiques.ConstantGuess(combo, attributes)
    if args.strategy == "proportional":
        return critiques.ProportionalToPopulation(attributes)
    return critiques.UniformOverCombos(attributes)


def _sentinel_str(value) -> str:
    if value is critiques.NO_CHANGE:
        return "no-change"
    if value is critiques.UNDEFINED:
        return "undefined"
    return format_fraction(value)


def _cmd_critique(args: argparse.Namespace) -> int:
    if args.procedure == "pct":
        import csv
        import io

        rows = list(csv.DictReader(_read_text(args.pairs).splitlines()))
        pairs = [(int(r["before"]), int(r["after"])) for r in rows]
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["before", "after", "arc_pct_change", "naive_pct_change"])
        for before, after in pairs:
            writer.writerow(
                [
                    before,
                    after,
                    _sentinel_str(critiques.arc_pct_change(before, after)),
                    _sentinel_str(critiques.naive_pct_change(before, after)),
                ]
            )
        if args.format == "csv":
            _write_out(out.getvalue(), args.out)
        else:
            doc = {
                "both_zero_fraction": format_fraction(critiques.both_zero_fraction(pairs)),
                "rows": [
                    {
                        "before": b,
                        "after": a,
                        "arc": _sentinel_str(critiques.arc_pct_change(b, a)),
                        "naive": _sentinel_str(critiques.naive_pct_change(b, a)),
                    }
                    for b, a in pairs
                ],
            }
            _write_out(_json_doc(doc), args.out)
        return 0

    truth = _load_dataset(args.data, args.geography)
    if args.procedure == "rvr":
        strategy = _strategy_from_args(args)
        result = critiques.rvr_simulate(truth, strategy, args.trials, args.seed)
        if args.format == "csv":
            _write_out(critiques.rvr_rows_to_csv(result), args.out)
        else:
            doc = {
                "trials": result.trials,
                "hits": result.hits,
                "hit_rate": format_fraction(result.hit_rate),
                "analytic_hit_rate": format_fraction(critiques.rvr_analytic(truth, strategy)),
                "rows": [
                    {"block": r.block, "population": r.population, "hits": r.hits, "misses": r.misses}
                    for r in result.rows
                ],
            }
            _write_out(_json_doc(doc), args.out)
        return 0
    if args.procedure == "degenerate":
        attributes = tuple(args.attributes.split(","))
        ex = critiques.degenerate_exhibit(truth, args.trials, args.seed, attributes)
        doc = {
            "combo": list(ex.combo),
            "attributes": list(ex.attributes),
            "trials": ex.trials,
            "analytic_hit_rate": format_fraction(ex.analytic_hit_rate),
            "simulated_hit_rate": format_fraction(ex.simulated_hit_rate),
            "one_to_one_matches": ex.one_to_one_matches,
            "one_to_one_rate": format_fraction(ex.one_to_one_rate),
        }
        _write_out(_json_doc(doc), args.out)
        return 0
    if args.procedure == "modal":
        report = critiques.modal_baseline(truth, args.min_block)
        doc = {
            "population": report.population,
            "correct": report.correct,
            "accuracy": format_fraction(report.accuracy),
            "nonmodal_population": report.nonmodal_population,
            "nonmodal_correct": report.nonmodal_correct,
            "block_modes": [
                {"block": b, "combo": list(c), "share": format_fraction(s)}
                for b, c, s in report.block_modes
            ],
        }
        _write_out(_json_doc(doc), args.out)
        return 0
    report = critiques.loo_gap(truth, args.min_block)
    doc = {
        "population": report.population,
        "modal_correct": report.modal_correct,
        "loo_correct": report.loo_correct,
        "modal_accuracy": format_fraction(report.modal_accuracy),
        "loo_accuracy": format_fraction(report.loo_accuracy),
        "gap": format_fraction(report.gap),
    }
    _write_out(_json_doc(doc), args.out)
    return 0


# --- argument wiring -------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt: bool = True) -> None:
        p.add_argument("--out", help="output path (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("generate", help="materialize a synthetic world from a population spec")
    p.add_argument("--population", required=True, help="population spec JSON")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--impute", help="blank-then-impute this fraction of persons, e.g. 1/10")
    common(p, fmt=False)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("tabulate", help="count persons per geography and margin")
    p.add_argument("--data", required=True, help="microdata CSV")
    p.add_argument("--geography", help="block-to-region JSON")
    p.add_argument("--table", required=True, help="table spec JSON")
    common(p)
    p.set_defaults(func=_cmd_tabulate)

    p = sub.add_parser("protect", help="run a mechanism over targets and write the release")
    p.add_argument("--data", required=True)
    p.add_argument("--geography")
    p.add_argument("--mechanism", required=True, help="mechanism spec JSON")
    p.add_argument("--targets", help="JSON list of table/microdata targets")
    p.add_argument("--seed", type=int, help="override the mechanism seed")
    common(p, fmt=False)
    p.set_defaults(func=_cmd_protect)

    p = sub.add_parser("reconstruct", help="enumerate all worlds consistent with released tables")
    p.add_argument("--schema", required=True, help="schema JSON")
    p.add_argument("--geography", required=True, help="block-to-region JSON")
    p.add_argument("--release", action="append", help="release JSON (tables are extracted)")
    p.add_argument("--table", action="append", help="table JSON")
    p.add_argument("--invariants", help="microdata CSV to take exact block invariants from")
    p.add_argument("--list-solutions", action="store_true")
    p.add_argument("--system-out", help="also write the constraint system JSON here")
    common(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("reident", help="one-to-one matching and confirmation against truth")
    p.add_argument("--known", required=True, help="attacker-known microdata CSV")
    p.add_argument("--candidates", required=True, help="candidate microdata CSV")
    p.add_argument("--geography")
    p.add_argument("--key", required=True, help="key spec JSON")
    p.add_argument("--truth", help="confidential microdata CSV for confirmation")
    common(p)
    p.set_defaults(func=_cmd_reident)

    p = sub.add_parser("risk", help="score a release under one methodology")
    p.add_argument(
        "--method",
        required=True,
        choices=("abs-link", "abs", "prior-posterior", "cf-bayes", "cf-freq", "invariant-cf"),
    )
    p.add_argument("--release", required=True, help="release JSON")
    p.add_argument("--attacker", help="attacker model JSON")
    p.add_argument("--data", help="confidential microdata CSV (counterfactual methods)")
    p.add_argument("--geography")
    p.add_argument("--person", required=True)
    p.add_argument("--value", default="1")
    p.add_argument("--attribute", default="sensitive")
    p.add_argument("--mode", help="diff|ratio or average|realized, per method")
    p.add_argument("--convention", choices=("removal", "blank"), default="removal")
    common(p)
    p.set_defaults(func=_cmd_risk)

    p = sub.add_parser("scenario", help="run the stress scenarios")
    action = p.add_subparsers(dest="action", required=True)
    pa = action.add_parser("run-all", help="all scenarios; nonzero exit on any verdict mismatch")
    pa.add_argument("--seed", type=int, default=42)
    pa.add_argument("--format", choices=("text", "json"), default="text")
    pa.add_argument("--out")
    pa.set_defaults(func=_cmd_scenario)
    pr = action.add_parser("run", help="one scenario by name")
    pr.add_argument("name")
    pr.add_argument("--seed", type=int, default=42)
    pr.add_argument("--out")
    pr.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("critique", help="baseline and hygiene procedures")
    p.add_argument("procedure", choices=("rvr", "degenerate", "modal", "loo", "pct"))
    p.add_argument("--data", help="truth microdata CSV")
    p.add_argument("--geography")
    p.add_argument("--pairs", help="before/after CSV for pct")
    p.add_argument("--strategy", choices=("constant", "proportional", "uniform"), default="constant")
    p.add_argument("--combo", help="comma-separated values for the constant guess")
    p.add_argument("--attributes", default="race,ethnicity")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-block", type=int, default=5)
    common(p)
    p.set_defaults(func=_cmd_critique)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _echo_config(args.command, args)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as err:
        print(f"sdlab: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
