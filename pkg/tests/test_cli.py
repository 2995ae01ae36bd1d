import json

import pytest

from amrex.cli import dispatch
from amrex.config import RunConfig, apply_env, load_config_file
from amrex.errors import ConfigError
from amrex.graph import parse_penman

from _fixtures import (MARNIE_CLAIM, MARNIE_EVIDENCE, RABIES_CLAIM,
                       RABIES_EVIDENCE, RABIES_MAPPING)


@pytest.fixture
def fever_files(tmp_path):
    """A three-claim dataset plus a matching AMR bundle."""
    claims = [
        {"claim_id": "c-marnie", "claim": "a film was directed",
         "label": "SUPPORTS",
         "evidence": [{"id": "e-marnie", "text": "the director made the film"}]},
        {"claim_id": "c-rabies", "claim": "a disease can ride",
         "label": "REFUTES",
         "evidence": [{"id": "e-rabies", "text": "vaccination prevents it"}]},
    ]
    claims_path = tmp_path / "claims.jsonl"
    claims_path.write_text("".join(json.dumps(r) + "\n" for r in claims))
    amrs = [
        {"id": "c-marnie", "penman": MARNIE_CLAIM},
        {"id": "e-marnie", "penman": MARNIE_EVIDENCE},
        {"id": "c-rabies", "penman": RABIES_CLAIM},
        {"id": "e-rabies", "penman": RABIES_EVIDENCE},
    ]
    amrs_path = tmp_path / "amrs.jsonl"
    amrs_path.write_text("".join(json.dumps(r) + "\n" for r in amrs))
    return str(claims_path), str(amrs_path)


def test_parse_round_trip(tmp_path, capsys):
    src = tmp_path / "g.amr"
    src.write_text(MARNIE_CLAIM)
    assert dispatch(["parse", "--in", str(src)]) == 0
    out = capsys.readouterr().out.strip()
    assert parse_penman(out) == parse_penman(MARNIE_CLAIM)


def test_parse_json_output(tmp_path, capsys):
    src = tmp_path / "g.amr"
    src.write_text(MARNIE_CLAIM)
    assert dispatch(["parse", "--in", str(src), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["root"] == "a0"
    assert payload["nodes"]["a0"] == "film"
    assert ["top", "a0", "", "film"] in payload["triples"]


def test_parse_error_exit_code_1(tmp_path, capsys):
    src = tmp_path / "bad.amr"
    src.write_text("(x/a :mod")
    assert dispatch(["parse", "--in", str(src)]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exit_code_2(capsys):
    with pytest.raises(SystemExit) as exc:
        dispatch(["verify", "--dataset", "fever"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        dispatch(["no-such-command"])
    assert exc.value.code == 2


def test_smatch_text_output(tmp_path, capsys):
    prem = tmp_path / "prem.amr"
    prem.write_text(RABIES_EVIDENCE)
    hyp = tmp_path / "hyp.amr"
    hyp.write_text(RABIES_CLAIM)
    assert dispatch(["smatch", "--premise", str(prem),
                     "--hypothesis", str(hyp), "--no-top"]) == 0
    captured = capsys.readouterr()
    for hv, pv in RABIES_MAPPING:
        assert f"{hv}(" in captured.out and f"--> {pv}(" in captured.out
    assert "precision: 0.4286" in captured.out
    assert "include_top = False" in captured.err


def test_smatch_json_output(tmp_path, capsys):
    prem = tmp_path / "prem.amr"
    prem.write_text(MARNIE_EVIDENCE)
    hyp = tmp_path / "hyp.amr"
    hyp.write_text(MARNIE_CLAIM)
    assert dispatch(["smatch", "--premise", str(prem),
                     "--hypothesis", str(hyp), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["precision"] == 0.75
    assert payload["matched"] == 6


def test_score_pair_json(tmp_path, capsys):
    claim = tmp_path / "claim.amr"
    claim.write_text(MARNIE_CLAIM)
    evidence = tmp_path / "evidence.amr"
    evidence.write_text(MARNIE_EVIDENCE)
    assert dispatch(["score-pair", "--claim-amr", str(claim),
                     "--evidence-amr", str(evidence),
                     "--claim-text", "a film was directed",
                     "--evidence-text", "the director made the film",
                     "--lambda", "1.0", "--backend", "test:dim=32",
                     "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["smatch_p"] == 0.75
    assert payload["f"] == 0.75
    assert payload["decision"] == 1


def test_verify_writes_jsonl(fever_files, tmp_path, capsys):
    claims, amrs = fever_files
    out = tmp_path / "verdicts.jsonl"
    assert dispatch(["verify", "--dataset", "fever", "--claims", claims,
                     "--amrs", amrs, "--backend", "test:dim=64",
                     "--out", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["claim_id"] for r in rows] == ["c-marnie", "c-rabies"]
    for row in rows:
        assert row["label"] in {"S", "R", "N"}
        assert row["pairs"][0]["decision"] in (-1, 1)
    assert "dataset = fever" in capsys.readouterr().err


def test_verify_parallel_matches_serial_byte_for_byte(fever_files, tmp_path):
    claims, amrs = fever_files
    serial = tmp_path / "serial.jsonl"
    parallel = tmp_path / "parallel.jsonl"
    base = ["verify", "--dataset", "fever", "--claims", claims,
            "--amrs", amrs, "--backend", "test:dim=64", "--seed", "11"]
    assert dispatch(base + ["--jobs", "1", "--out", str(serial)]) == 0
    assert dispatch(base + ["--jobs", "8", "--out", str(parallel)]) == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_verify_missing_amr_is_domain_error(fever_files, tmp_path, capsys):
    claims, amrs = fever_files
    pruned = tmp_path / "pruned.jsonl"
    rows = [json.loads(l) for l in open(amrs)][:-1]
    pruned.write_text("".join(json.dumps(r) + "\n" for r in rows))
    assert dispatch(["verify", "--dataset", "fever", "--claims", claims,
                     "--amrs", str(pruned), "--backend", "test"]) == 1
    assert "e-rabies" in capsys.readouterr().err


def test_evaluate_sweep_report_dir(fever_files, tmp_path, capsys):
    claims, amrs = fever_files
    report_dir = tmp_path / "reports"
    assert dispatch(["evaluate", "--dataset", "fever", "--claims", claims,
                     "--amrs", amrs, "--backend", "test:dim=64",
                     "--sweep", "0:1:0.5", "--report", str(report_dir)]) == 0
    files = sorted(p.name for p in report_dir.iterdir())
    assert files == ["report_lambda_0.5.json", "report_lambda_0.json",
                     "report_lambda_1.json", "summary.md"]
    payload = json.loads((report_dir / "report_lambda_1.json").read_text())
    assert payload["n_claims"] == 2
    assert set(payload["per_label_f1"]) == {"S", "R", "N"}
    summary = (report_dir / "summary.md").read_text()
    assert summary.count("\n") == 5  # header + separator + three lambda rows


def test_evaluate_stdout_table(fever_files, capsys):
    claims, amrs = fever_files
    assert dispatch(["evaluate", "--dataset", "fever", "--claims", claims,
                     "--amrs", amrs, "--backend", "test:dim=64",
                     "--lambda", "1.0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("| lambda |")


def test_ingest_stats_and_normalize(fever_files, tmp_path, capsys):
    claims, _ = fever_files
    out = tmp_path / "normalized.jsonl"
    assert dispatch(["ingest", "--dataset", "fever", "--in", claims,
                     "--out", str(out), "--stats"]) == 0
    stats = capsys.readouterr().out
    assert "claims: 2" in stats
    assert "(reference: 3281)" in stats  # differing counts are flagged, not fatal
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert rows[0]["claim_id"] == "c-marnie"


def test_explain_text_and_prompt(fever_files, tmp_path, capsys):
    claims, amrs = fever_files
    verdicts = tmp_path / "verdicts.jsonl"
    base = ["--dataset", "fever", "--claims", claims, "--amrs", amrs,
            "--backend", "test:dim=64"]
    assert dispatch(["verify", *base, "--out", str(verdicts)]) == 0
    capsys.readouterr()
    pair = f"{verdicts}#c-rabies/e-rabies"
    assert dispatch(["explain", "--pair", pair, *base]) == 0
    text = capsys.readouterr().out
    assert "claim: a disease can ride" in text
    assert "-->" in text
    assert dispatch(["explain", "--pair", pair, *base,
                     "--format", "prompt"]) == 0
    prompt = capsys.readouterr().out
    assert "Key Mappings" in prompt and "Classification" in prompt
    assert dispatch(["explain", "--pair", f"{verdicts}#c-rabies", *base]) == 1
    assert dispatch(["explain", "--pair", f"{verdicts}#nope/e-rabies", *base]) == 1


def test_explain_recomputation_matches_verify(fever_files, tmp_path, capsys):
    claims, amrs = fever_files
    verdicts = tmp_path / "verdicts.jsonl"
    base = ["--dataset", "fever", "--claims", claims, "--amrs", amrs,
            "--backend", "test:dim=64", "--seed", "5"]
    assert dispatch(["verify", *base, "--out", str(verdicts)]) == 0
    capsys.readouterr()
    row = next(json.loads(l) for l in open(verdicts)
               if json.loads(l)["claim_id"] == "c-marnie")
    assert dispatch(["explain", "--pair", f"{verdicts}#c-marnie/e-marnie",
                     *base]) == 0
    text = capsys.readouterr().out
    assert f"combined (lambda=0): {row['pairs'][0]['f']:.4f}" in text
    assert f"verdict: {row['label']}" in text


def test_config_precedence_file_env_flag(fever_files, tmp_path, capsys,
                                         monkeypatch):
    claims, amrs = fever_files
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("lambda = 0.2\nseed = 3\nrestarts = 2\n")

    cfg = RunConfig()
    load_config_file(cfg, str(cfg_file))
    assert cfg.lam == 0.2 and cfg.seed == 3 and cfg.restarts == 2

    monkeypatch.setenv("AMREX_LAMBDA", "0.4")
    apply_env(cfg)
    assert cfg.lam == 0.4  # env overrides file

    assert dispatch(["smatch", "--premise", amrs, "--hypothesis", amrs,
                     "--config", str(cfg_file), "--lambda", "0.9",
                     "--seed", "7"]) == 1  # amrs file is not penman: domain error
    err = capsys.readouterr().err
    assert "lambda = 0.9" in err  # flag overrides env overrides file
    assert "seed = 7" in err


def test_config_validation(tmp_path):
    cfg = RunConfig()
    with pytest.raises(ConfigError):
        load_config_file(cfg, "/no/such/file.cfg")
    bad = tmp_path / "bad.cfg"
    bad.write_text("restarts = lots\n")
    with pytest.raises(ConfigError):
        load_config_file(cfg, str(bad))
    bad.write_text("mystery = 1\n")
    with pytest.raises(ConfigError):
        load_config_file(cfg, str(bad))
