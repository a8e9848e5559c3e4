"""Command-line surface for the full pipeline.

    gen             generate train splits and the uniform test set
    render          turn a dataset into natural-language prompts
    export-finetune chat-format training files with assistant turns
    ask             collect responses from configured endpoints
    mock-ask        collect responses from built-in mock models
    repair          rewrite a response file through a repair policy
    grade           grade one model's responses against the dataset
    ensemble        grade all answer-combination strategies over several models
    sweep           valid-answer ratio curves over a threshold grid
    plot            plot-ready wide CSVs and an optional chart

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from .client import PromptItem, ResponseCache, batch_ask, read_response_file
from .config import ConfigError, RunConfig, load_run_config
from .ensemble import evaluate_strategies
from .generate import (
    GenerationConfig,
    gen_dataset,
    ground_truth_answer,
    instance_from_dict,
    instance_to_dict,
    partition_rules,
)
from .grading import grade_overall, label_record
from .jsonl import file_digest, read_jsonl, write_jsonl
from .mock import mock_ask, parse_mock_spec
from .render import build_prompt, render_problem
from .repair import ModelRepair, as_policy, repair_text
from .sweep import (
    EmptyInputError,
    compute_curves,
    curves_from_csv,
    curves_to_csv,
    extract_curve,
    plot_chart,
    write_plot_data,
)
from .templates import load_templates


class UsageError(Exception):
    """Bad command line; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


GRADE_COLUMNS = (
    "id", "model", "strategy", "stream", "source_step1", "source_step2",
    "step1", "step2", "inter_step", "conformity", "ground_truth", "final",
    "parse_ok", "repaired", "fallback_keys",
)


def _report_row(instance_id: str, strategy: str, stream: str, source, report) -> dict:
    if source is None:
        model = ""
    elif source[0] == source[1]:
        model = source[0]
    else:
        model = f"{source[0]}+{source[1]}"
    return {
        "id": instance_id,
        "model": model,
        "strategy": strategy,
        "stream": stream,
        "source_step1": source[0] if source else "",
        "source_step2": source[1] if source else "",
        "step1": report.step1,
        "step2": report.step2,
        "inter_step": report.inter_step,
        "conformity": report.conformity,
        "ground_truth": report.ground_truth,
        "final": report.final,
        "parse_ok": report.parse_ok,
        "repaired": report.repaired,
        "fallback_keys": report.fallback_keys,
    }


def _rows_to_csv(rows: Sequence[dict], path: Path) -> None:
    import csv

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=GRADE_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in GRADE_COLUMNS})


def _render_seed(master_seed: int, instance_id: str) -> int:
    return random.Random(f"{master_seed}:{instance_id}").getrandbits(63)


def _repair_policy(name: str, endpoint_path: Optional[str]):
    if name == "model":
        if not endpoint_path:
            raise ConfigError("repair policy 'model' needs --repair-endpoint")
        from .config import load_endpoint

        return ModelRepair(load_endpoint(endpoint_path))
    return as_policy(None if name == "none" else name)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    seed = args.seed if args.seed is not None else cfg.master_seed
    out_dir = Path(args.out_dir or cfg.out_dir)
    gen_cfg = GenerationConfig(base_capacity=cfg.base_capacity)
    master = random.Random(seed)
    split_seed = master.randrange(2**63)
    if cfg.split_patterns is not None:
        from .generate import RuleSplit
        from .nal import RulePattern

        split = RuleSplit(
            tuple(tuple(RulePattern.from_key(k) for k in subset) for subset in cfg.split_patterns)
        )
    else:
        split = partition_rules(split_seed, cfg.splits)
    train_seeds = [master.randrange(2**63) for _ in range(cfg.splits)]
    test_seed = master.randrange(2**63)

    write_jsonl(
        out_dir / "splits.jsonl",
        [{"subset": i + 1, "patterns": [p.key for p in subset]} for i, subset in enumerate(split.subsets)],
    )
    for i, subset in enumerate(split.subsets, start=1):
        sub_cfg = GenerationConfig(
            allowed_patterns=subset, base_capacity=cfg.base_capacity
        )
        instances = gen_dataset(train_seeds[i - 1], cfg.train_size, sub_cfg)
        write_jsonl(
            out_dir / f"train-{i}.jsonl",
            (instance_to_dict(inst, f"train{i}-{j:04d}") for j, inst in enumerate(instances)),
        )
    test = gen_dataset(test_seed, cfg.test_size, gen_cfg, uniform=True)
    write_jsonl(
        out_dir / "test.jsonl",
        (instance_to_dict(inst, f"test-{j:04d}") for j, inst in enumerate(test)),
    )
    print(f"wrote {cfg.splits} train files of {cfg.train_size} and test.jsonl of {cfg.test_size} to {out_dir}")
    return 0


def _load_dataset(path: str) -> list[dict]:
    records = list(read_jsonl(path))
    if not records:
        raise ConfigError(f"dataset {path} is empty")
    return records


def _templates_for(args):
    path = args.templates
    if path is None and getattr(args, "config", None):
        path = load_run_config(args.config).templates
    return load_templates(path)


def cmd_render(args) -> int:
    templates = _templates_for(args)
    records = _load_dataset(args.dataset)
    rows = []
    for record in records:
        inst = instance_from_dict(record)
        render_seed = _render_seed(args.seed, record["id"])
        problem = render_problem(inst, templates, render_seed, instance_id=record["id"])
        rows.append(
            {
                "id": record["id"],
                "render_seed": render_seed,
                "premises": list(problem.premises),
                "question": problem.question,
                "messages": build_prompt(problem),
            }
        )
    write_jsonl(args.out, rows)
    print(f"rendered {len(rows)} problems to {args.out}")
    return 0


def cmd_export_finetune(args) -> int:
    templates = _templates_for(args)
    records = _load_dataset(args.dataset)
    rows = []
    for record in records:
        inst = instance_from_dict(record)
        render_seed = _render_seed(args.seed, record["id"])
        problem = render_problem(inst, templates, render_seed, instance_id=record["id"])
        rows.append({"messages": build_prompt(problem, answer=ground_truth_answer(inst))})
    write_jsonl(args.out, rows)
    print(f"exported {len(rows)} training examples to {args.out}")
    return 0


def cmd_ask(args) -> int:
    cfg = load_run_config(args.config)
    if not cfg.endpoints:
        raise ConfigError("field 'endpoints' is empty; nothing to ask")
    rendered = list(read_jsonl(args.rendered))
    if not rendered:
        raise ConfigError(f"rendered file {args.rendered} is empty")
    digest = file_digest(args.rendered)
    prompts = [PromptItem(r["id"], tuple(r["messages"])) for r in rendered]
    out_dir = Path(args.out_dir or cfg.out_dir)
    cache = ResponseCache(args.cache_dir) if args.cache_dir else None
    for endpoint in cfg.endpoints:
        out_path = out_dir / f"responses-{endpoint.model}.jsonl"
        batch_ask(prompts, endpoint, out_path, cache=cache, dataset_digest=digest)
        print(f"collected {len(prompts)} responses for {endpoint.model} into {out_path}")
    return 0


def cmd_mock_ask(args) -> int:
    records = _load_dataset(args.dataset)
    digest = file_digest(args.dataset)
    out_dir = Path(args.out_dir)
    if not args.spec:
        raise ConfigError("at least one --spec is required")
    for i, spec in enumerate(args.spec, start=1):
        mock = parse_mock_spec(spec, default_index=i)
        out_path = out_dir / f"responses-{mock.model_id}.jsonl"
        mock_ask(records, mock, out_path, dataset_digest=digest)
        print(f"mock {mock.model_id} ({mock.kind}) answered {len(records)} instances into {out_path}")
    return 0


def cmd_repair(args) -> int:
    policy = _repair_policy(args.policy, args.repair_endpoint)
    manifest, rows = read_response_file(args.responses)
    out_rows: list[dict] = []
    if manifest:
        manifest = dict(manifest)
        manifest["repair_policy"] = args.policy
        out_rows.append(manifest)
    changed = 0
    for row in rows.values():
        row = dict(row)
        text = row.get("text")
        if isinstance(text, str):
            repaired = repair_text(text, policy)
            row["repair_applied"] = repaired != text
            changed += row["repair_applied"]
            row["text"] = repaired
        out_rows.append(row)
    write_jsonl(args.out, out_rows)
    print(f"repaired {changed} of {len(rows)} responses into {args.out}")
    return 0


def _labels_by_id(records: Sequence[dict]):
    labels = {}
    capacities = {}
    for record in records:
        inst = instance_from_dict(record)
        labels[record["id"]] = label_record(inst.target)
        capacities[record["id"]] = record.get("base_capacity", 8)
    return labels, capacities


def cmd_grade(args) -> int:
    records = _load_dataset(args.dataset)
    labels, capacities = _labels_by_id(records)
    manifest, responses = read_response_file(args.responses)
    model = (manifest or {}).get("endpoint", {}).get("model") or next(
        (r.get("model") for r in responses.values()), "model"
    )
    policy = _repair_policy(args.repair, args.repair_endpoint)
    streams = [("raw", None)] + ([("repaired", policy)] if policy is not None else [])
    rows = []
    for record in records:
        instance_id = record["id"]
        text = (responses.get(instance_id) or {}).get("text") or ""
        for stream, stream_policy in streams:
            report = grade_overall(
                text,
                label=labels[instance_id],
                repair_policy=stream_policy,
                capacity=capacities[instance_id],
            )
            rows.append(_report_row(instance_id, model, stream, (model, model), report))
    write_jsonl(args.out, rows)
    if args.csv:
        _rows_to_csv(rows, Path(args.csv))
    print(f"graded {len(records)} instances for {model} into {args.out}")
    return 0


def cmd_ensemble(args) -> int:
    records = _load_dataset(args.dataset)
    labels, capacities = _labels_by_id(records)
    rosters = []
    for path in args.responses:
        manifest, by_id = read_response_file(path)
        model = (manifest or {}).get("endpoint", {}).get("model") or next(
            (r.get("model") for r in by_id.values()), Path(path).stem
        )
        rosters.append((model, by_id))
    policy = _repair_policy(args.repair, args.repair_endpoint)
    rows = []
    for record in records:
        instance_id = record["id"]
        responses = {
            model: ((by_id.get(instance_id) or {}).get("text") or "")
            for model, by_id in rosters
        }
        outcomes = evaluate_strategies(
            responses,
            label=labels[instance_id],
            repair_policy=policy,
            metric=args.metric,
            capacity=capacities[instance_id],
        )
        for outcome in outcomes:
            row = _report_row(instance_id, outcome.strategy, outcome.stream, outcome.source, outcome.report)
            row["metric"] = outcome.metric
            rows.append(row)
    write_jsonl(args.out, rows)
    if args.csv:
        _rows_to_csv(rows, Path(args.csv))
    print(f"evaluated {len(rosters)} models over {len(records)} instances into {args.out}")
    return 0


def _parse_thresholds(text: Optional[str]):
    if not text:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --thresholds: {exc}") from exc


def cmd_sweep(args) -> int:
    rows = list(read_jsonl(args.rows))
    try:
        curves = compute_curves(rows, _parse_thresholds(args.thresholds))
    except EmptyInputError as exc:
        raise ConfigError(str(exc)) from exc
    curves_to_csv(curves, args.out)
    print(f"swept {len(curves)} curves into {args.out}")
    return 0


def cmd_plot(args) -> int:
    if args.compare:
        entries = []
        for item in args.compare:
            if "=" not in item:
                raise UsageError(f"--compare entries must be label=curves.csv, got {item!r}")
            label, path = item.split("=", 1)
            curves = curves_from_csv(path)
            curve = extract_curve(curves, args.strategy, args.repaired)
            entries.append(
                type(curve)(strategy=label, repaired=curve.repaired, points=curve.points, n=curve.n)
            )
        write_plot_data(entries, args.out)
        if args.chart:
            plot_chart(entries, args.chart, title=f"{args.strategy} comparison")
        print(f"wrote comparison data for {len(entries)} rosters to {args.out}")
        return 0
    curves = curves_from_csv(args.curves)
    write_plot_data(curves, args.out)
    if args.chart:
        plot_chart(curves, args.chart)
    print(f"wrote plot data for {len(curves)} curves to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nalbench", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate train splits and the test set")
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out-dir", help="output directory (overrides config)")
    p.set_defaults(func=cmd_gen)

    for name, func in (("render", cmd_render), ("export-finetune", cmd_export_finetune)):
        p = sub.add_parser(name)
        p.add_argument("--dataset", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0, help="render seed")
        p.add_argument("--templates", help="template JSON path (packaged defaults otherwise)")
        p.add_argument("--config", help="run config; its templates field applies when --templates is absent")
        p.set_defaults(func=func)

    p = sub.add_parser("ask", help="collect responses from configured endpoints")
    p.add_argument("--rendered", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--cache-dir")
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("mock-ask", help="collect responses from mock models")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--spec", action="append", default=[],
                   help="mock spec, e.g. id=mock1,kind=subset,patterns=sub+obj|sim+sim,f_delta=0.25")
    p.set_defaults(func=cmd_mock_ask)

    p = sub.add_parser("repair", help="rewrite a response file through a repair policy")
    p.add_argument("--responses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--policy", default="deterministic", choices=["none", "deterministic", "model"])
    p.add_argument("--repair-endpoint", help="endpoint JSON for the model policy")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("grade", help="grade one model's responses")
    p.add_argument("--dataset", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--repair", default="deterministic", choices=["none", "deterministic", "model"])
    p.add_argument("--repair-endpoint")
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("ensemble", help="grade all answer-combination strategies")
    p.add_argument("--dataset", required=True)
    p.add_argument("--responses", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--metric", default="conformity", choices=["conformity", "final"])
    p.add_argument("--repair", default="deterministic", choices=["none", "deterministic", "model"])
    p.add_argument("--repair-endpoint")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("sweep", help="valid-answer ratio curves")
    p.add_argument("--rows", required=True, help="grade rows JSONL")
    p.add_argument("--out", required=True, help="curves CSV")
    p.add_argument("--thresholds", help="comma-separated grid (default 0.1..0.9 step 0.05)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="plot-ready data files and optional chart")
    p.add_argument("--curves", help="curves CSV from sweep")
    p.add_argument("--out", required=True, help="wide plot data CSV")
    p.add_argument("--chart", help="optional rendered chart path (needs matplotlib)")
    p.add_argument("--compare", action="append", default=[],
                   help="label=curves.csv; plot one strategy across rosters")
    p.add_argument("--strategy", default="mb9", help="strategy for --compare mode")
    p.add_argument("--repaired", action="store_true", help="use the repaired stream in --compare mode")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.func is cmd_plot and not args.compare and not args.curves:
            raise UsageError("plot needs --curves (or --compare entries)")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
