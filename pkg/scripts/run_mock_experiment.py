#!/usr/bin/env python3
"""Full benchmark pipeline on built-in mock models, no live endpoint needed.

Three mocks are each competent on one third of the rule patterns (they echo
the ground truth there and shift result frequencies by 0.25 elsewhere), and
each sometimes emits broken JSON.  The run produces, under --out-dir:

    test.jsonl            the generated benchmark instances
    responses-*.jsonl     one response file per mock
    strategies.jsonl/.csv per-instance grades for m1..m3, mb3, mb9
    curves.csv            valid-answer ratios over the threshold grid
    plotdata.csv          wide per-curve columns for plotting
    curves.png            rendered chart (if matplotlib is installed)

Selection uses the final grade, so the per-instance ordering
mb9 >= mb3 >= max(m1, m2, m3) holds by construction; the printed table
shows the resulting pointwise curve dominance.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from nalbench.cli import _report_row, _rows_to_csv
from nalbench.ensemble import evaluate_strategies
from nalbench.generate import gen_dataset, instance_to_dict, partition_rules
from nalbench.grading import label_record
from nalbench.jsonl import file_digest, write_jsonl
from nalbench.mock import MockModel, mock_ask
from nalbench.generate import instance_from_dict
from nalbench.sweep import compute_curves, curves_to_csv, plot_chart, write_plot_data


def build_mocks(seed: int, break_rate: float) -> list[MockModel]:
    split = partition_rules(seed, 3)
    return [
        MockModel(
            model_id=f"expert{i}",
            kind="subset",
            f_delta=0.25,
            break_rate=break_rate,
            competent_patterns=tuple(p.key for p in subset),
            seed=seed + i,
        )
        for i, subset in enumerate(split.subsets, start=1)
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=39)
    parser.add_argument("--size", type=int, default=100, help="test-set size")
    parser.add_argument("--break-rate", type=float, default=0.15,
                        help="probability a mock emits truncated JSON")
    parser.add_argument("--out-dir", default="out-mock")
    parser.add_argument("--no-chart", action="store_true")
    args = parser.parse_args(argv)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    instances = gen_dataset(args.seed, args.size, uniform=True)
    records = [instance_to_dict(inst, f"test-{i:04d}") for i, inst in enumerate(instances)]
    dataset_path = write_jsonl(out_dir / "test.jsonl", records)
    digest = file_digest(dataset_path)
    print(f"generated {len(records)} instances -> {dataset_path}")

    mocks = build_mocks(args.seed, args.break_rate)
    for mock in mocks:
        path = mock_ask(records, mock, out_dir / f"responses-{mock.model_id}.jsonl", dataset_digest=digest)
        print(f"{mock.model_id}: competent on {', '.join(mock.competent_patterns)} -> {path}")

    rows = []
    for record in records:
        inst = instance_from_dict(record)
        responses = {mock.model_id: mock.respond(record) for mock in mocks}
        for outcome in evaluate_strategies(
            responses,
            label=label_record(inst.target),
            repair_policy="deterministic",
            metric="final",
            capacity=record.get("base_capacity", 8),
        ):
            rows.append(_report_row(record["id"], outcome.strategy, outcome.stream, outcome.source, outcome.report))
    write_jsonl(out_dir / "strategies.jsonl", rows)
    _rows_to_csv(rows, out_dir / "strategies.csv")

    curves = compute_curves(rows)
    curves_to_csv(curves, out_dir / "curves.csv")
    write_plot_data(curves, out_dir / "plotdata.csv")

    print("\nvalid-answer ratios (raw stream):")
    grid = [t for t, _ in curves[0].points]
    header = "threshold " + " ".join(f"{t:5.2f}" for t in grid)
    print(header)
    for curve in curves:
        if curve.repaired:
            continue
        values = " ".join(f"{r:5.2f}" for r in curve.ratios())
        print(f"{curve.strategy:>9} {values}")

    if not args.no_chart:
        try:
            chart = plot_chart(curves, out_dir / "curves.png", title="mock-model combination strategies")
            print(f"\nchart -> {chart}")
        except RuntimeError as exc:
            print(f"\nchart skipped: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
