"""Segmentation metrics: IoU, recall, precision over mask pairs.

Aggregates are micro-averaged (counts summed before dividing); a macro
(per-image mean) mode is available for comparison. A pair where both
masks are empty counts as perfect so collar-free frames do not poison
averages; the report says how often that convention fired.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .labeler import DatasetManifest
from .types import BinaryMask


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)

    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricValues:
    iou: float
    recall: float
    precision: float


@dataclass(frozen=True)
class MetricReport:
    overall: MetricValues
    counts: ConfusionCounts
    pairs: int
    empty_pairs: int
    per_garment: dict[str, MetricValues] = field(default_factory=dict)
    macro: MetricValues | None = None

    def to_dict(self) -> dict:
        doc = {
            "iou": self.overall.iou,
            "recall": self.overall.recall,
            "precision": self.overall.precision,
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp,
                       "fn": self.counts.fn, "tn": self.counts.tn},
            "pairs": self.pairs,
            "empty_pairs": self.empty_pairs,
            "averaging": "micro",
        }
        if self.per_garment:
            doc["per_garment"] = {
                g: {"iou": m.iou, "recall": m.recall, "precision": m.precision}
                for g, m in self.per_garment.items()}
        if self.macro is not None:
            doc["macro"] = {"iou": self.macro.iou, "recall": self.macro.recall,
                            "precision": self.macro.precision}
        return doc

    def to_table(self) -> str:
        """Aligned text table, one column per garment plus the overall."""
        columns = ["overall"] + sorted(self.per_garment)
        values = {"overall": self.overall, **self.per_garment}
        name_w = max(len("Precision"), *(len(c) for c in columns))
        header = " ".join(["{:<10}".format("")] + [f"{c:>{name_w}}" for c in columns])
        lines = [header]
        for label, attr in (("Recall", "recall"), ("Precision", "precision"), ("IoU", "iou")):
            row = [f"{label:<10}"] + [f"{getattr(values[c], attr):>{name_w}.3f}" for c in columns]
            lines.append(" ".join(row))
        return "\n".join(lines)


def confusion(pred: BinaryMask, gt: BinaryMask) -> ConfusionCounts:
    """Per-pixel confusion counts with collar as the positive class."""
    if not pred.matches(gt):
        raise ValueError(f"prediction {pred.height}x{pred.width} does not match "
                         f"ground truth {gt.height}x{gt.width}")
    p, g = pred.bits, gt.bits
    return ConfusionCounts(
        tp=int(np.sum(p & g)),
        fp=int(np.sum(p & ~g)),
        fn=int(np.sum(~p & g)),
        tn=int(np.sum(~p & ~g)),
    )


def metrics(c: ConfusionCounts) -> MetricValues:
    """IoU, recall, precision; a zero denominator scores 1.0 (empty-empty
    convention)."""

    def ratio(num: int, denom: int) -> float:
        return num / denom if denom > 0 else 1.0

    return MetricValues(
        iou=ratio(c.tp, c.tp + c.fp + c.fn),
        recall=ratio(c.tp, c.tp + c.fn),
        precision=ratio(c.tp, c.tp + c.fp),
    )


def prediction_path(pred_dir, entry) -> Path:
    """Prediction mask for a manifest entry: same file name, under pred_dir
    (and the garment subdirectory when the entry has one)."""
    pred_dir = Path(pred_dir)
    name = Path(entry.mask).name
    if entry.garment:
        candidate = pred_dir / entry.garment / name
        if candidate.exists():
            return candidate
    return pred_dir / name


def evaluate_set(manifest: DatasetManifest, pred_dir,
                 include_macro: bool = False) -> MetricReport:
    """Micro-averaged metrics over every manifest entry, with a per-garment
    breakdown when entries carry garment ids."""
    missing = [str(prediction_path(pred_dir, e)) for e in manifest.entries
               if not prediction_path(pred_dir, e).exists()]
    if missing:
        raise FileNotFoundError(
            f"{len(missing)} prediction masks missing, e.g. {missing[:3]}")
    if not manifest.entries:
        raise ValueError("manifest has no entries")

    total = ConfusionCounts(0, 0, 0, 0)
    by_garment: dict[str, ConfusionCounts] = {}
    per_pair: list[MetricValues] = []
    empty_pairs = 0
    for entry in manifest.entries:
        gt = fileio.load_mask(entry.mask)
        pred = fileio.load_mask(prediction_path(pred_dir, entry))
        c = confusion(pred, gt)
        total = total + c
        if c.tp + c.fp + c.fn == 0:
            empty_pairs += 1
        if entry.garment:
            by_garment[entry.garment] = by_garment.get(entry.garment,
                                                       ConfusionCounts(0, 0, 0, 0)) + c
        if include_macro:
            per_pair.append(metrics(c))

    macro = None
    if include_macro:
        macro = MetricValues(
            iou=float(np.mean([m.iou for m in per_pair])),
            recall=float(np.mean([m.recall for m in per_pair])),
            precision=float(np.mean([m.precision for m in per_pair])),
        )
    return MetricReport(
        overall=metrics(total),
        counts=total,
        pairs=len(manifest.entries),
        empty_pairs=empty_pairs,
        per_garment={g: metrics(c) for g, c in sorted(by_garment.items())},
        macro=macro,
    )
