"""Multiclass metrics over verdicts and lambda sweeps.

Macro F1 averages over the dataset's full label set, so a label that never
occurs contributes 0.  The sweep computes each pair's alignment precision
and cosine similarity once and re-applies only the cheap blend/threshold
arithmetic per lambda, which is guaranteed (and tested) to agree with an
independent single-lambda run.
"""

from __future__ import annotations

from dataclasses import dataclass

from .entailment import combined_score, th1
from .errors import ConfigError, DatasetError
from .ingest import ClaimRecord
from .similarity import SimilarityBackend, cosine
from .smatch import AlignConfig, smatch_precision
from .verdict import VerdictLabel, aggregate, label_set, pair_seed, th2


@dataclass(frozen=True)
class EvaluationReport:
    dataset: str
    lam: float
    accuracy: float
    per_label_f1: dict[str, float]
    macro_f1: float
    confusion: dict[str, dict[str, int]]
    n_claims: int


def score_predictions(gold: list[VerdictLabel],
                      pred: list[VerdictLabel],
                      lam: float = 0.0) -> EvaluationReport:
    """Accuracy, per-label F1, macro F1 and the confusion matrix."""
    if len(gold) != len(pred):
        raise DatasetError(
            f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    if not gold:
        raise DatasetError("cannot score an empty prediction set")
    dataset = gold[0].dataset
    for label in (*gold, *pred):
        if label.dataset != dataset:
            raise DatasetError("mixed dataset tags in scoring input")
    labels = label_set(dataset)
    confusion = {g: {p: 0 for p in labels} for g in labels}
    for g, p in zip(gold, pred):
        confusion[g.value][p.value] += 1
    correct = sum(confusion[l][l] for l in labels)
    per_label_f1 = {}
    for l in labels:
        tp = confusion[l][l]
        gold_n = sum(confusion[l].values())
        pred_n = sum(confusion[g][l] for g in labels)
        precision = tp / pred_n if pred_n else 0.0
        recall = tp / gold_n if gold_n else 0.0
        per_label_f1[l] = (2 * precision * recall / (precision + recall)
                           if precision + recall else 0.0)
    macro = sum(per_label_f1.values()) / len(labels)
    return EvaluationReport(dataset=dataset, lam=lam,
                            accuracy=correct / len(gold),
                            per_label_f1=per_label_f1, macro_f1=macro,
                            confusion=confusion, n_claims=len(gold))


@dataclass(frozen=True)
class _PairComponents:
    evidence_id: str
    smatch_p: float
    cosine_sim: float


def precompute_pair_components(records: list[ClaimRecord],
                               backend: SimilarityBackend,
                               cfg: AlignConfig = AlignConfig(),
                               seed: int = 0) -> dict[str, list[_PairComponents]]:
    """One alignment + one cosine per (claim, evidence) pair, reusable
    across lambda values."""
    from dataclasses import replace
    components: dict[str, list[_PairComponents]] = {}
    for record in records:
        usable = [ev for ev in record.evidence if ev.kind != "boolean"]
        rows = []
        for ev in usable:
            if record.claim_graph is None or ev.graph is None:
                raise DatasetError(
                    f"claim {record.claim_id!r} / evidence {ev.evidence_id!r}: "
                    "AMR graph not joined")
            pcfg = replace(cfg, seed=pair_seed(seed, record.claim_id, ev.evidence_id))
            alignment = smatch_precision(ev.graph, record.claim_graph, pcfg)
            sim = cosine(backend.embed(ev.text), backend.embed(record.claim_text))
            rows.append(_PairComponents(ev.evidence_id, alignment.precision, sim))
        components[record.claim_id] = rows
    return components


def predictions_at_lambda(records: list[ClaimRecord],
                          components: dict[str, list[_PairComponents]],
                          lam: float,
                          empty_evidence: str = "error") -> list[VerdictLabel]:
    pred = []
    for record in records:
        rows = components[record.claim_id]
        if not rows:
            if empty_evidence == "label-N":
                pred.append(VerdictLabel("N", record.dataset))
                continue
            raise DatasetError(
                f"claim {record.claim_id!r} has no usable evidence after filtering")
        decisions = [th1(combined_score(lam, row.smatch_p, row.cosine_sim))
                     for row in rows]
        pred.append(th2(aggregate(decisions), record.dataset))
    return pred


def lambda_sweep(records: list[ClaimRecord], lambdas: list[float],
                 backend: SimilarityBackend,
                 cfg: AlignConfig = AlignConfig(), seed: int = 0,
                 empty_evidence: str = "error") -> list[EvaluationReport]:
    """One report per lambda over the same precomputed pair components."""
    if not lambdas:
        raise ConfigError("lambda sweep needs at least one value")
    for lam in lambdas:
        if not 0.0 <= lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {lam}")
    components = precompute_pair_components(records, backend, cfg, seed)
    gold = [r.gold_label for r in records]
    reports = []
    for lam in lambdas:
        pred = predictions_at_lambda(records, components, lam, empty_evidence)
        report = score_predictions(gold, pred, lam=lam)
        reports.append(report)
    return reports


def sweep_range(spec: str) -> list[float]:
    """Parse a ``start:stop:step`` sweep spec into a lambda list."""
    try:
        start_s, stop_s, step_s = spec.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise ConfigError(f"bad sweep spec {spec!r}, expected start:stop:step")
    if step <= 0:
        raise ConfigError("sweep step must be positive")
    values = []
    k = 0
    while True:
        v = round(start + k * step, 12)
        if v > stop + 1e-12:
            break
        values.append(min(v, 1.0))
        k += 1
    return values


def report_markdown(reports: list[EvaluationReport]) -> str:
    """Render sweep reports as one markdown table: a row per lambda,
    columns for per-label F1, macro F1 and accuracy."""
    if not reports:
        return ""
    labels = label_set(reports[0].dataset)
    header = ["lambda", *labels, "Macro F1", "Acc."]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "---|" * len(header)]
    for r in reports:
        cells = [f"{r.lam:g}"]
        cells += [f"{r.per_label_f1[l]:.2f}" for l in labels]
        cells += [f"{r.macro_f1:.2f}", f"{r.accuracy:.2f}"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
