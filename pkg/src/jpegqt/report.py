"""Factorial result tables: rows are (dataset, condition), columns are
(model, training) pairs, and the best value per row is marked within each
model family (highest for F1/IoU, lowest for the false-positive rate).
"""

from __future__ import annotations

from dataclasses import dataclass

from jpegqt.errors import ConflictingDuplicateRuns
from jpegqt.metrics import MetricsReport

CONDITION_ORDER = {"orig": 0, "std": 1, "real": 2}

_METRIC_ATTR = {"f1": "mean_f1", "iou": "mean_iou", "fpr": "mean_fpr"}


@dataclass(frozen=True)
class RunResult:
    """One evaluated cell: a model variant scored on one dataset and condition."""

    model: str
    training: str
    dataset: str
    condition: str
    report: object  # MetricsReport or a plain float for the chosen metric

    def value(self, metric: str) -> float:
        if isinstance(self.report, MetricsReport):
            v = getattr(self.report, _METRIC_ATTR[metric])
            if v is None:
                raise ValueError(f"run {self.key()} has no {metric} mean")
            return float(v)
        return float(self.report)

    def key(self):
        return (self.model, self.training, self.dataset, self.condition)


@dataclass
class FactorialTable:
    metric: str
    columns: list   # of (model, training)
    row_keys: list  # of (dataset, condition)
    cells: dict     # (dataset, condition, model, training) -> float
    best: set       # cell keys marked best-in-family

    def format_value(self, v: float) -> str:
        return f"{v:.2e}" if self.metric == "fpr" else f"{v:.3f}"

    def to_csv(self) -> str:
        header = ["dataset", "condition"] + [f"{m}:{t}" for m, t in self.columns]
        lines = [",".join(header)]
        for dataset, condition in self.row_keys:
            cells = [dataset, condition]
            for model, training in self.columns:
                key = (dataset, condition, model, training)
                if key in self.cells:
                    mark = "*" if key in self.best else ""
                    cells.append(self.format_value(self.cells[key]) + mark)
                else:
                    cells.append("")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        header = ["dataset", "cond"] + [f"{m}:{t}" for m, t in self.columns]
        rows = [header]
        for dataset, condition in self.row_keys:
            row = [dataset, condition]
            for model, training in self.columns:
                key = (dataset, condition, model, training)
                if key in self.cells:
                    text = self.format_value(self.cells[key])
                    row.append(f"[{text}]" if key in self.best else f" {text} ")
                else:
                    row.append("")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        out = []
        for i, row in enumerate(rows):
            out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
            if i == 0:
                out.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
        note = "best per row within each model family" + (
            " (lowest)" if self.metric == "fpr" else " (highest)")
        out.append(note)
        return "\n".join(out) + "\n"


def factorial_report(runs, metric: str = "f1") -> FactorialTable:
    """Assemble runs into the factorial layout with best-in-family marking.

    Duplicate runs with identical values collapse silently; a contradicting
    duplicate raises ConflictingDuplicateRuns.
    """
    if metric not in _METRIC_ATTR:
        raise ValueError(f"metric must be one of {sorted(_METRIC_ATTR)}, got {metric!r}")
    if not runs:
        raise ValueError("at least one run is required")

    cells = {}
    for run in runs:
        dataset, condition = run.dataset, run.condition
        key = (dataset, condition, run.model, run.training)
        value = run.value(metric)
        if key in cells and cells[key] != value:
            raise ConflictingDuplicateRuns(
                f"{key} reported both {cells[key]} and {value}")
        cells[key] = value

    columns = sorted({(k[2], k[3]) for k in cells})
    row_keys = sorted({(k[0], k[1]) for k in cells},
                      key=lambda rk: (rk[0], CONDITION_ORDER.get(rk[1], 99), rk[1]))

    best = set()
    prefer_low = metric == "fpr"
    for dataset, condition in row_keys:
        families = {}
        for model, training in columns:
            key = (dataset, condition, model, training)
            if key in cells:
                families.setdefault(model, []).append((key, cells[key]))
        for model, entries in families.items():
            target = min(v for _, v in entries) if prefer_low else max(v for _, v in entries)
            best.update(key for key, v in entries if v == target)

    return FactorialTable(metric, columns, row_keys, cells, best)
