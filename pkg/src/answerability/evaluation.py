"""Accuracy and pairwise McNemar significance over aligned predictions.

Predictions and labels must align on instance identity; instances that
are labeled but unpredicted are an error rather than silently skipped,
since imputation would corrupt both accuracy and discordant-pair counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Exact binomial p-values below this many discordant pairs, the
# continuity-corrected chi-square approximation above.
EXACT_MCNEMAR_CUTOFF = 25

# Canonical Table-2-style row order; unknown configs follow alphabetically.
CONFIG_ORDER = ("max-max", "max-mean", "mean-max", "mean-mean")


class IdentityMismatchError(Exception):
    """Prediction and label identities do not align."""

    def __init__(self, missing, extra=()):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        parts = []
        if self.missing:
            parts.append(f"{len(self.missing)} labeled instance(s) without predictions "
                         f"(first: {self.missing[:5]})")
        if self.extra:
            parts.append(f"{len(self.extra)} predicted instance(s) without labels "
                         f"(first: {self.extra[:5]})")
        super().__init__("; ".join(parts))


@dataclass(frozen=True)
class EvalReport:
    level: str
    config: str
    n_instances: int
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int

    def to_obj(self) -> dict:
        return {
            "level": self.level,
            "config": self.config,
            "n_instances": self.n_instances,
            "accuracy": self.accuracy,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
        }


@dataclass(frozen=True)
class McNemarResult:
    b: int
    c: int
    statistic: float
    p_value: float
    significant_at_0_05: bool

    def to_obj(self) -> dict:
        return {
            "b": self.b,
            "c": self.c,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "significant_at_0.05": self.significant_at_0_05,
        }


def _check_alignment(predictions, labels):
    missing = set(labels) - set(predictions)
    extra = set(predictions) - set(labels)
    if missing or extra:
        raise IdentityMismatchError(missing, extra)


def accuracy(predictions: dict, labels: dict, level: str = "", config: str = "") -> EvalReport:
    """Exact confusion counts and accuracy over aligned binary maps."""
    _check_alignment(predictions, labels)
    tp = fp = tn = fn = 0
    for key, y in labels.items():
        p = predictions[key]
        if p not in (0, 1) or y not in (0, 1):
            raise ValueError(f"non-binary prediction or label for {key!r}: {p!r} vs {y!r}")
        if p == 1 and y == 1:
            tp += 1
        elif p == 1 and y == 0:
            fp += 1
        elif p == 0 and y == 0:
            tn += 1
        else:
            fn += 1
    n = len(labels)
    if n == 0:
        raise ValueError("no instances to evaluate")
    return EvalReport(level, config, n, (tp + tn) / n, tp, fp, tn, fn)


def exact_binomial_p(b: int, c: int) -> float:
    """Two-sided exact p under Bin(b+c, 1/2): doubled smaller tail, capped at 1."""
    n = b + c
    if n == 0:
        return 1.0
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1)) / 2 ** n
    return min(1.0, 2.0 * tail)


def chi_square_p(statistic: float) -> float:
    """Survival function of chi-square with 1 degree of freedom."""
    return math.erfc(math.sqrt(statistic / 2.0))


def mcnemar_from_counts(b: int, c: int) -> McNemarResult:
    """McNemar's test from discordant-pair counts.

    Exact binomial when b + c <= 25 (statistic reported as the smaller
    count), continuity-corrected chi-square with 1 dof otherwise. The
    correction is truncated at zero so that b == c yields statistic 0
    and p = 1, matching the exact branch instead of overshooting.
    """
    if b < 0 or c < 0:
        raise ValueError(f"discordant counts must be non-negative, got b={b}, c={c}")
    n = b + c
    if n <= EXACT_MCNEMAR_CUTOFF:
        statistic = float(min(b, c))
        p = exact_binomial_p(b, c)
    else:
        statistic = max(0, abs(b - c) - 1) ** 2 / n
        p = chi_square_p(statistic)
    return McNemarResult(b, c, statistic, p, p < 0.05)


def mcnemar(predictions_a: dict, predictions_b: dict, labels: dict) -> McNemarResult:
    """Pairwise McNemar over two classifiers' aligned predictions."""
    _check_alignment(predictions_a, labels)
    _check_alignment(predictions_b, labels)
    b = c = 0
    for key, y in labels.items():
        a_correct = predictions_a[key] == y
        b_correct = predictions_b[key] == y
        if a_correct and not b_correct:
            b += 1
        elif b_correct and not a_correct:
            c += 1
    return mcnemar_from_counts(b, c)


def _config_sort_key(config: str):
    try:
        return (0, CONFIG_ORDER.index(config))
    except ValueError:
        return (1, config)


def report(entries, labels_by_level) -> tuple[dict, str]:
    """Accuracy table plus all pairwise McNemar tests per level.

    ``entries`` is a list of (level, config, predictions dict);
    ``labels_by_level`` maps level name to its labels dict. Returns the
    machine-readable report object and an aligned text rendering.
    """
    levels = []
    for level in sorted({lv for lv, _, _ in entries},
                        key=lambda lv: ("sentence", "passage", "ranking").index(lv)
                        if lv in ("sentence", "passage", "ranking") else 99):
        level_entries = sorted(
            [(cfg, preds) for lv, cfg, preds in entries if lv == level],
            key=lambda cp: _config_sort_key(cp[0]),
        )
        labels = labels_by_level[level]
        rows = [accuracy(preds, labels, level, cfg).to_obj() for cfg, preds in level_entries]
        pairs = []
        for i in range(len(level_entries)):
            for j in range(i + 1, len(level_entries)):
                cfg_a, preds_a = level_entries[i]
                cfg_b, preds_b = level_entries[j]
                result = mcnemar(preds_a, preds_b, labels)
                pairs.append({"config_a": cfg_a, "config_b": cfg_b, **result.to_obj()})
        levels.append({"level": level, "rows": rows, "mcnemar": pairs})
    report_obj = {"levels": levels}
    return report_obj, render_text_report(report_obj)


def render_text_report(report_obj: dict) -> str:
    lines = []
    for block in report_obj["levels"]:
        lines.append(f"== {block['level']} level ==")
        header = f"{'config':<16} {'n':>7} {'accuracy':>9} {'tp':>6} {'fp':>6} {'tn':>6} {'fn':>6}"
        lines.append(header)
        lines.append("-" * len(header))
        for row in block["rows"]:
            lines.append(
                f"{row['config']:<16} {row['n_instances']:>7} "
                f"{row['accuracy']:>9.3f} {row['tp']:>6} {row['fp']:>6} "
                f"{row['tn']:>6} {row['fn']:>6}"
            )
        if block["mcnemar"]:
            lines.append("")
            lines.append("McNemar pairwise (p < 0.05 marked *):")
            for pair in block["mcnemar"]:
                marker = "*" if pair["significant_at_0.05"] else " "
                lines.append(
                    f"  {marker} {pair['config_a']} vs {pair['config_b']}: "
                    f"discordant=({pair['b']},{pair['c']}) "
                    f"statistic={pair['statistic']:.4f} p={pair['p_value']:.4f}"
                )
        lines.append("")
    return "\n".join(lines)
