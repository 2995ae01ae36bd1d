"""Per-claim verdicts: aggregate pair decisions and threshold-classify.

The mean decision e over a claim's evidence is kept as an exact rational so
comparisons against the classification boundaries (0.1 and 0.5) never flip
through floating-point noise.  The two datasets use different label maps:

    3-way:  S when e >= 0.1;  N when -0.1 < e < 0.1;  R when e <= -0.1
    4-way:  S when e >= 0.5;  C when 0.1 < e < 0.5;
            N when -0.1 <= e <= 0.1;  C when -0.5 < e < -0.1;
            R when e <= -0.5

Note the middle band is open in the 3-way map and closed in the 4-way map;
both are applied literally.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Rational

from .entailment import EntailmentScore, nli_pair
from .errors import ConfigError, DatasetError
from .similarity import SimilarityBackend
from .smatch import AlignConfig

FEVER = "fever"
AVERITEC = "averitec"

FEVER_LABELS = ("S", "R", "N")
AVERITEC_LABELS = ("S", "R", "N", "C")

_TENTH = Fraction(1, 10)
_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class VerdictLabel:
    value: str
    dataset: str

    def __post_init__(self):
        allowed = label_set(self.dataset)
        if self.value not in allowed:
            raise ConfigError(
                f"label {self.value!r} not valid for dataset {self.dataset!r} "
                f"(allowed: {allowed})")


def label_set(dataset: str) -> tuple[str, ...]:
    if dataset == FEVER:
        return FEVER_LABELS
    if dataset == AVERITEC:
        return AVERITEC_LABELS
    raise ConfigError(f"unknown dataset {dataset!r}")


@dataclass(frozen=True)
class PairScore:
    evidence_id: str
    score: EntailmentScore


@dataclass(frozen=True)
class ClaimVerdict:
    claim_id: str
    e_value: Fraction
    label: VerdictLabel
    per_evidence: tuple[PairScore, ...]


def _as_fraction(e) -> Fraction:
    if isinstance(e, Rational):
        return Fraction(e)
    return Fraction(float(e))  # exact binary value of the float


def aggregate(decisions) -> Fraction:
    """Arithmetic mean of +-1 decisions, as an exact rational."""
    decisions = list(decisions)
    if not decisions:
        raise DatasetError("cannot aggregate an empty decision list")
    if any(d not in (1, -1) for d in decisions):
        raise ConfigError(f"decisions must be +1 or -1, got {decisions}")
    return Fraction(sum(decisions), len(decisions))


def th2_fever(e) -> VerdictLabel:
    e = _as_fraction(e)
    if e >= _TENTH:
        return VerdictLabel("S", FEVER)
    if e <= -_TENTH:
        return VerdictLabel("R", FEVER)
    return VerdictLabel("N", FEVER)


def th2_averitec(e) -> VerdictLabel:
    e = _as_fraction(e)
    if e >= _HALF:
        return VerdictLabel("S", AVERITEC)
    if e <= -_HALF:
        return VerdictLabel("R", AVERITEC)
    if -_TENTH <= e <= _TENTH:
        return VerdictLabel("N", AVERITEC)
    return VerdictLabel("C", AVERITEC)


def th2(e, dataset: str) -> VerdictLabel:
    if dataset == FEVER:
        return th2_fever(e)
    if dataset == AVERITEC:
        return th2_averitec(e)
    raise ConfigError(f"unknown dataset {dataset!r}")


def pair_seed(global_seed: int, claim_id: str, evidence_id: str) -> int:
    """Stable per-pair alignment seed, so parallel runs match serial ones."""
    return zlib.crc32(f"{global_seed}:{claim_id}:{evidence_id}".encode("utf-8"))


def verify_claim(record, lam: float, backend: SimilarityBackend,
                 cfg: AlignConfig = AlignConfig(), seed: int = 0,
                 empty_evidence: str = "error") -> ClaimVerdict:
    """Score every evidence pair of *record*, aggregate, and classify.

    *record* is a :class:`amrex.ingest.ClaimRecord` with graphs joined.
    Boolean evidence never reaches this point; if filtering left no usable
    evidence the *empty_evidence* policy decides between a hard error and
    an N verdict.
    """
    usable = [ev for ev in record.evidence if ev.kind != "boolean"]
    if not usable:
        if empty_evidence == "label-N":
            return ClaimVerdict(claim_id=record.claim_id, e_value=Fraction(0),
                                label=VerdictLabel("N", record.dataset),
                                per_evidence=())
        raise DatasetError(
            f"claim {record.claim_id!r} has no usable evidence after filtering")
    if record.claim_graph is None:
        raise DatasetError(f"claim {record.claim_id!r} has no AMR")
    pairs = []
    for ev in usable:
        if ev.graph is None:
            raise DatasetError(
                f"evidence {ev.evidence_id!r} of claim {record.claim_id!r} has no AMR")
        pcfg = replace(cfg, seed=pair_seed(seed, record.claim_id, ev.evidence_id))
        score = nli_pair(ev.text, ev.graph, record.claim_text,
                         record.claim_graph, lam, backend, pcfg)
        pairs.append(PairScore(evidence_id=ev.evidence_id, score=score))
    e = aggregate([p.score.decision for p in pairs])
    return ClaimVerdict(claim_id=record.claim_id, e_value=e,
                        label=th2(e, record.dataset),
                        per_evidence=tuple(pairs))
