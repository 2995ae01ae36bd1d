"""Command-line entry point.

Subcommands: parse, smatch, score-pair, verify, evaluate, ingest, explain.
Exit codes: 0 success, 1 domain error (bad label, missing AMR, ...),
2 usage error.  Diagnostics go to stderr; data goes to stdout or files.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import evaluation, explain, ingest
from .config import RunConfig, apply_env, effective_config_lines, load_config_file
from .entailment import nli_pair
from .errors import AmrexError
from .graph import extract_triples, parse_penman, serialize_penman
from .similarity import backend_from_spec
from .smatch import AlignConfig, align_hill_climb
from .verdict import verify_claim


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="weight of the structural score in [0, 1]")
    p.add_argument("--backend", default=None,
                   help="similarity backend: test[:dim=N], file:<path>, service:<url>")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-top", action="store_true",
                   help="exclude the top triple from alignment scoring")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker pool size; 1 forces serial execution")


def _build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        load_config_file(cfg, args.config)
    apply_env(cfg)
    for attr, key in (("dataset", "dataset"), ("lam", "lam"),
                      ("backend", "backend"), ("restarts", "restarts"),
                      ("seed", "seed"), ("jobs", "jobs"),
                      ("empty_evidence", "empty_evidence"),
                      ("question_mode", "question_mode")):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "no_top", False):
        cfg.include_top = False
    return cfg


def _align_config(cfg: RunConfig) -> AlignConfig:
    return AlignConfig(restarts=cfg.restarts, seed=cfg.seed,
                       include_top=cfg.include_top)


def _print_header(cfg: RunConfig) -> None:
    for line in effective_config_lines(cfg):
        print(line, file=sys.stderr)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_parse(args) -> int:
    graph = parse_penman(_read(args.infile))
    if args.json:
        print(json.dumps({
            "root": graph.root,
            "nodes": dict(graph.nodes),
            "edges": [list(e) for e in graph.edges],
            "attributes": [list(a) for a in graph.attributes],
            "triples": [list(t) for t in extract_triples(graph)],
        }))
    else:
        print(serialize_penman(graph))
    return 0


def cmd_smatch(args) -> int:
    cfg = _build_config(args)
    _print_header(cfg)
    premise = parse_penman(_read(args.premise))
    hypothesis = parse_penman(_read(args.hypothesis))
    result = align_hill_climb(premise, hypothesis, restarts=cfg.restarts,
                              seed=cfg.seed, include_top=cfg.include_top)
    if args.json:
        print(json.dumps({
            "precision": result.precision, "recall": result.recall,
            "f1": result.f1, "matched": result.matched,
            "mapping": [list(p) for p in result.mapping.pairs],
        }))
    else:
        for hv, pv in result.mapping.pairs:
            print(f"{hv}({hypothesis.nodes[hv]}) --> {pv}({premise.nodes[pv]})")
        print(f"precision: {result.precision:.4f}  recall: {result.recall:.4f}  "
              f"f1: {result.f1:.4f}  matched: {result.matched}")
    return 0


def cmd_score_pair(args) -> int:
    cfg = _build_config(args)
    _print_header(cfg)
    backend = backend_from_spec(cfg.backend)
    claim_graph = parse_penman(_read(args.claim_amr))
    evidence_graph = parse_penman(_read(args.evidence_amr))
    score = nli_pair(args.evidence_text, evidence_graph,
                     args.claim_text, claim_graph,
                     cfg.resolved_lambda(), backend, _align_config(cfg))
    payload = {
        "lambda": score.lam, "smatch_p": score.smatch_p,
        "cosine": score.cosine_sim, "f": score.f_value,
        "decision": score.decision,
        "mapping": [list(p) for p in score.mapping.pairs],
    }
    if args.json:
        print(json.dumps(payload))
    else:
        bundle = explain.build_bundle(claim_graph, evidence_graph,
                                      args.claim_text, args.evidence_text, score)
        print(explain.render_text(bundle))
    return 0


def _verify_records(cfg: RunConfig, claims_path: str, amrs_path: str):
    records = ingest.load_claims(claims_path, cfg.dataset,
                                 question_mode=cfg.question_mode)
    bundle = ingest.load_amr_bundle(amrs_path)
    return ingest.join_amrs(records, bundle, strict=True)


def _verdict_json(v) -> str:
    return json.dumps({
        "claim_id": v.claim_id,
        "label": v.label.value,
        "e": float(v.e_value),
        "pairs": [
            {"evidence_id": p.evidence_id, "f": p.score.f_value,
             "smatch_p": p.score.smatch_p, "cosine": p.score.cosine_sim,
             "decision": p.score.decision}
            for p in v.per_evidence
        ],
    })


def cmd_verify(args) -> int:
    cfg = _build_config(args)
    _print_header(cfg)
    records = _verify_records(cfg, args.claims, args.amrs)
    backend = backend_from_spec(cfg.backend)
    lam = cfg.resolved_lambda()
    align_cfg = _align_config(cfg)

    def run_one(record):
        return verify_claim(record, lam, backend, align_cfg, seed=cfg.seed,
                            empty_evidence=cfg.empty_evidence)

    jobs = cfg.resolved_jobs()
    if jobs == 1:
        verdicts = [run_one(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(run_one, records))

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for v in verdicts:
            out.write(_verdict_json(v) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_evaluate(args) -> int:
    cfg = _build_config(args)
    _print_header(cfg)
    records = _verify_records(cfg, args.claims, args.amrs)
    backend = backend_from_spec(cfg.backend)
    lambdas = (evaluation.sweep_range(args.sweep) if args.sweep
               else [cfg.resolved_lambda()])
    reports = evaluation.lambda_sweep(records, lambdas, backend,
                                      _align_config(cfg), seed=cfg.seed,
                                      empty_evidence=cfg.empty_evidence)
    if args.report:
        import os
        os.makedirs(args.report, exist_ok=True)
        for r in reports:
            path = os.path.join(args.report, f"report_lambda_{r.lam:g}.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({
                    "dataset": r.dataset, "lambda": r.lam,
                    "accuracy": r.accuracy, "per_label_f1": r.per_label_f1,
                    "macro_f1": r.macro_f1, "confusion": r.confusion,
                    "n_claims": r.n_claims,
                }, fh, indent=2)
        table = os.path.join(args.report, "summary.md")
        with open(table, "w", encoding="utf-8") as fh:
            fh.write(evaluation.report_markdown(reports))
    else:
        print(evaluation.report_markdown(reports), end="")
    return 0


def cmd_ingest(args) -> int:
    cfg = _build_config(args)
    _print_header(cfg)
    records = ingest.load_claims(args.infile, cfg.dataset,
                                 question_mode=cfg.question_mode)
    if args.out:
        ingest.write_normalized(records, args.out)
    if args.stats or not args.out:
        counts = ingest.label_counts(records)
        reference = ingest.REFERENCE_LABEL_COUNTS.get(cfg.dataset, {})
        print(f"claims: {len(records)}")
        for label, n in counts.items():
            ref = reference.get(label)
            flag = "" if ref is None or ref == n else f"  (reference: {ref})"
            print(f"{label}: {n}{flag}")
    return 0


def _parse_pair_selector(spec: str) -> tuple[str, str, str]:
    path, sep, rest = spec.partition("#")
    claim_id, sep2, evidence_id = rest.partition("/")
    if not sep or not sep2 or not path or not claim_id or not evidence_id:
        raise AmrexError(
            f"bad --pair selector {spec!r}; expected <verdicts.jsonl>#<claim_id>/<evidence_id>")
    return path, claim_id, evidence_id


def cmd_explain(args) -> int:
    cfg = _build_config(args)
    _print_header(cfg)
    verdict_path, claim_id, evidence_id = _parse_pair_selector(args.pair)
    label = None
    with open(verdict_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                if row["claim_id"] == claim_id:
                    label = row["label"]
                    break
    if label is None:
        raise AmrexError(f"claim {claim_id!r} not found in {verdict_path}")
    records = _verify_records(cfg, args.claims, args.amrs)
    record = next((r for r in records if r.claim_id == claim_id), None)
    if record is None:
        raise AmrexError(f"claim {claim_id!r} not found in {args.claims}")
    item = next((ev for ev in record.evidence if ev.evidence_id == evidence_id), None)
    if item is None:
        raise AmrexError(f"evidence {evidence_id!r} not found for claim {claim_id!r}")

    from .verdict import pair_seed
    backend = backend_from_spec(cfg.backend)
    align_cfg = replace(_align_config(cfg),
                        seed=pair_seed(cfg.seed, claim_id, evidence_id))
    score = nli_pair(item.text, item.graph, record.claim_text,
                     record.claim_graph, cfg.resolved_lambda(), backend, align_cfg)
    bundle = explain.build_bundle(record.claim_graph, item.graph,
                                  record.claim_text, item.text, score, label=label)
    if args.format == "markdown":
        print(explain.render_markdown(bundle))
    elif args.format == "prompt":
        print(explain.build_prompt(bundle))
    else:
        print(explain.render_text(bundle))
    if args.generate:
        if not args.service:
            raise AmrexError("--generate requires --service <url>")
        print(explain.generate_explanation(explain.build_prompt(bundle), args.service))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amrex",
        description="Deterministic, explainable fact verification over AMR graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and re-serialize a Penman file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("smatch", help="align two AMR files")
    p.add_argument("--premise", required=True)
    p.add_argument("--hypothesis", required=True)
    p.add_argument("--json", action="store_true")
    _common_flags(p)
    p.set_defaults(func=cmd_smatch)

    p = sub.add_parser("score-pair", help="score one claim/evidence pair")
    p.add_argument("--claim-amr", required=True)
    p.add_argument("--evidence-amr", required=True)
    p.add_argument("--claim-text", required=True)
    p.add_argument("--evidence-text", required=True)
    p.add_argument("--json", action="store_true")
    _common_flags(p)
    p.set_defaults(func=cmd_score_pair)

    p = sub.add_parser("verify", help="verdicts for a claims file")
    p.add_argument("--dataset", required=True, choices=["fever", "averitec"])
    p.add_argument("--claims", required=True)
    p.add_argument("--amrs", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--empty-evidence", dest="empty_evidence",
                   choices=["error", "label-N"], default=None)
    p.add_argument("--question-mode", dest="question_mode",
                   choices=["answer-only", "question-plus-answer"], default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evaluate", help="metrics, optionally over a lambda sweep")
    p.add_argument("--dataset", required=True, choices=["fever", "averitec"])
    p.add_argument("--claims", required=True)
    p.add_argument("--amrs", required=True)
    p.add_argument("--sweep", default=None, help="lambda sweep start:stop:step")
    p.add_argument("--report", default=None, help="directory for JSON/markdown reports")
    p.add_argument("--empty-evidence", dest="empty_evidence",
                   choices=["error", "label-N"], default=None)
    p.add_argument("--question-mode", dest="question_mode",
                   choices=["answer-only", "question-plus-answer"], default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ingest", help="normalize a dataset file and print stats")
    p.add_argument("--dataset", required=True, choices=["fever", "averitec"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--stats", action="store_true")
    p.add_argument("--question-mode", dest="question_mode",
                   choices=["answer-only", "question-plus-answer"], default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("explain", help="render the node-mapping justification of a scored pair")
    p.add_argument("--pair", required=True,
                   help="<verdicts.jsonl>#<claim_id>/<evidence_id>")
    p.add_argument("--dataset", required=True, choices=["fever", "averitec"])
    p.add_argument("--claims", required=True)
    p.add_argument("--amrs", required=True)
    p.add_argument("--format", choices=["text", "markdown", "prompt"], default="text")
    p.add_argument("--generate", action="store_true")
    p.add_argument("--service", default=None, help="generation service URL")
    p.add_argument("--question-mode", dest="question_mode",
                   choices=["answer-only", "question-plus-answer"], default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_explain)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AmrexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
