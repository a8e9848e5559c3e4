"""Threshold sweeps over final grades, and plot-ready curve exports.

A strategy curve reports, per threshold t, the fraction of instances whose
final grade is at least t (inclusive, so a threshold below every grade
gives ratio 1.0).  Curves are grouped by strategy and by parsing stream
(raw vs repaired) so repaired results can be drawn dashed next to the raw
solids.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

DEFAULT_THRESHOLD_START = 0.1
DEFAULT_THRESHOLD_STOP = 0.9
DEFAULT_THRESHOLD_STEP = 0.05


class EmptyInputError(ValueError):
    """No rows to sweep."""


def default_thresholds() -> tuple[float, ...]:
    n = round((DEFAULT_THRESHOLD_STOP - DEFAULT_THRESHOLD_START) / DEFAULT_THRESHOLD_STEP)
    return tuple(round(DEFAULT_THRESHOLD_START + i * DEFAULT_THRESHOLD_STEP, 10) for i in range(n + 1))


def validate_thresholds(thresholds: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(float(t) for t in thresholds)
    if not grid:
        raise ValueError("threshold grid must be non-empty")
    for t in grid:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"threshold out of [0, 1]: {t}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("threshold grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class StrategyCurve:
    strategy: str
    repaired: bool
    points: tuple[tuple[float, float], ...]  # (threshold, valid ratio)
    n: int

    def ratios(self) -> tuple[float, ...]:
        return tuple(r for _, r in self.points)

    def is_non_increasing(self) -> bool:
        ratios = self.ratios()
        return all(b <= a for a, b in zip(ratios, ratios[1:]))


def compute_curves(
    rows: Iterable[Mapping],
    thresholds: Optional[Sequence[float]] = None,
) -> list[StrategyCurve]:
    """Valid-answer ratio curves from grade rows.

    Rows need ``strategy``, ``stream`` and a numeric ``final``; parse
    failures carry the floor grade, so every row counts.
    """
    grid = validate_thresholds(thresholds if thresholds is not None else default_thresholds())
    groups: dict[tuple[str, bool], list[float]] = defaultdict(list)
    for row in rows:
        final = row.get("final")
        if final is None:
            raise ValueError(f"row lacks a final grade: {dict(row)}")
        groups[(row["strategy"], row.get("stream", "raw") == "repaired")].append(float(final))
    if not groups:
        raise EmptyInputError("no grade rows supplied")
    curves = []
    for (strategy, repaired), finals in sorted(groups.items()):
        n = len(finals)
        points = tuple((t, sum(1 for g in finals if g >= t) / n) for t in grid)
        curves.append(StrategyCurve(strategy, repaired, points, n))
    return curves


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

CURVE_COLUMNS = ("strategy", "repaired", "threshold", "ratio", "n")


def curves_to_csv(curves: Sequence[StrategyCurve], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CURVE_COLUMNS)
        for curve in curves:
            for threshold, ratio in curve.points:
                writer.writerow([curve.strategy, int(curve.repaired), threshold, ratio, curve.n])
    return path


def curves_from_csv(path: str | Path) -> list[StrategyCurve]:
    groups: dict[tuple[str, bool], list[tuple[float, float]]] = defaultdict(list)
    sizes: dict[tuple[str, bool], int] = {}
    with Path(path).open("r", newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            key = (row["strategy"], row["repaired"] == "1")
            groups[key].append((float(row["threshold"]), float(row["ratio"])))
            sizes[key] = int(row["n"])
    return [
        StrategyCurve(strategy, repaired, tuple(sorted(points)), sizes[(strategy, repaired)])
        for (strategy, repaired), points in sorted(groups.items())
    ]


def write_plot_data(curves: Sequence[StrategyCurve], path: str | Path) -> Path:
    """Wide columnar form: one threshold column, one column per curve.

    Repaired streams get a ``_repaired`` suffix; this is the file a plotting
    layer (or a spreadsheet) consumes directly.
    """
    if not curves:
        raise EmptyInputError("no curves to write")
    grid = [t for t, _ in curves[0].points]
    for curve in curves:
        if [t for t, _ in curve.points] != grid:
            raise ValueError("curves use different threshold grids")
    names = [c.strategy + ("_repaired" if c.repaired else "") for c in curves]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["threshold"] + names)
        for i, t in enumerate(grid):
            writer.writerow([t] + [curve.points[i][1] for curve in curves])
    return path


def extract_curve(curves: Sequence[StrategyCurve], strategy: str, repaired: bool) -> StrategyCurve:
    for curve in curves:
        if curve.strategy == strategy and curve.repaired == repaired:
            return curve
    raise KeyError(f"no curve for strategy={strategy!r} repaired={repaired}")


def plot_chart(
    curves: Sequence[StrategyCurve],
    path: str | Path,
    title: str = "",
) -> Path:
    """Optional static chart: solid for raw, dashed for repaired streams."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("chart rendering needs matplotlib (install extra 'plots')") from exc
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors: dict[str, object] = {}
    for curve in curves:
        xs = [t for t, _ in curve.points]
        ys = [r for _, r in curve.points]
        color = colors.get(curve.strategy)
        line, = ax.plot(
            xs,
            ys,
            linestyle="--" if curve.repaired else "-",
            color=color,
            label=curve.strategy + (" (repaired)" if curve.repaired else ""),
        )
        colors.setdefault(curve.strategy, line.get_color())
    ax.set_xlabel("threshold")
    ax.set_ylabel("valid-answer ratio")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
