"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

import csv
import io
import itertools
import json
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from ethio_eval import harness
from ethio_eval.cli import main
from ethio_eval.ctc import NEG_INF, ctc_brute_force, ctc_log_likelihood, write_logits
from ethio_eval.harness import EvalOptions, compare_runs, duration_report, duration_rows, evaluate_run
from ethio_eval.lexstats import ttr_at, vocab_growth
from ethio_eval.metrics import checkpoint_score, edit_distance, format_ci, paired_bootstrap, score_pair
from ethio_eval.normalize import NormalizationConfig, apply_pipeline
from ethio_eval.vocab import GEEZ_LANGUAGES, LANGUAGES, LATIN_LANGUAGES

from oracles import alignment_triples, random_log_probs, set_recount, zipf_stream

acceptance = pytest.mark.acceptance
EVAL = NormalizationConfig.preset("eval")
PRESET_NAMES = ["none", "eval", "vowel", "geminate", "both", "full"]


@acceptance(1, "CTC forward recursion matches brute-force enumeration")
def test_ctc_oracle_equivalence():
    start = time.perf_counter()
    n = 0
    for seed in range(2):
        for T in range(1, 7):
            for V in range(2, 5):
                lp = random_log_probs(np.random.default_rng([seed, T, V]), T, V)
                for length in range(4):
                    for target in itertools.product(range(1, V), repeat=length):
                        a = ctc_log_likelihood(lp, list(target))
                        b = ctc_brute_force(lp, list(target))
                        if b == NEG_INF:
                            assert a == NEG_INF, (seed, T, V, target)
                        else:
                            assert abs(a - b) <= 1e-9, (seed, T, V, target, a, b)
                        n += 1
    assert n >= 500
    assert time.perf_counter() - start < 30


@acceptance(2, "edit distance agrees with exhaustive alignment enumeration")
def test_edit_distance_oracle():
    mismatches = 0
    for n in range(5):
        for m in range(5):
            for ref in itertools.product("abc", repeat=n):
                for hyp in itertools.product("abc", repeat=m):
                    triples = alignment_triples(ref, hyp)
                    best = min(sum(t) for t in triples)
                    got = edit_distance(ref, hyp)
                    if sum(got) != best or got not in triples:
                        mismatches += 1
    assert mismatches == 0


def _fuzz_line(rng, alphabet):
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))


LATIN_FUZZ = list("aeioubcdfghjklmnpqrstwxyzAEIOUBDSH") + ["sh", "dh", "ch", "ny", "ph", "ts"] + list("'’-.,;:?! ") + [" "] * 6
GEEZ_FUZZ = [chr(c) for c in range(0x1200, 0x1380)] + list("።፣፡፤፥፦፧ ") + [" "] * 10


@acceptance(3, "normalization idempotence, minimal pairs and apostrophes")
def test_normalization_pipeline():
    rng = random.Random(2024)
    for alphabet, langs in ((LATIN_FUZZ, sorted(LATIN_LANGUAGES)), (GEEZ_FUZZ, sorted(GEEZ_LANGUAGES))):
        for _ in range(1000):
            line = _fuzz_line(rng, alphabet)
            lang = rng.choice(langs)
            for name in PRESET_NAMES:
                cfg = NormalizationConfig.preset(name)
                once = apply_pipeline(line, lang, cfg)
                assert apply_pipeline(once, lang, cfg) == once, (line, lang, name)

    both = NormalizationConfig.preset("both")
    assert apply_pipeline("hoomaa", "ORM", both) == "homa"
    assert apply_pipeline("sammuu", "ORM", NormalizationConfig.preset("geminate")) == "samuu"
    for lang in LATIN_LANGUAGES:
        assert apply_pipeline("Ta'anii la’an.", lang, both) == "ta'ani la'an"


@acceptance(4, "minimal-pair WER ordering across normalization conditions")
def test_condition_ordering(fixture_dir):
    manifest = harness.load_manifest(fixture_dir / "minimal_pairs_manifest.jsonl")
    hyps = harness.load_hypotheses(fixture_dir / "minimal_pairs_hyp.jsonl")
    wer = {
        name: evaluate_run(manifest, hyps, NormalizationConfig.preset(name)).aggregate.wer
        for name in ("none", "vowel", "geminate", "both")
    }
    assert wer["both"] == 0.0
    for single in ("vowel", "geminate"):
        assert wer["none"] > wer[single] > wer["both"]


def _systems(seed, n=60):
    rng = random.Random(seed)
    a, b = [], []
    for k in range(n):
        ref = [f"w{j}" for j in range(rng.randint(4, 15))]
        a.append(score_pair(f"u{k}", " ".join(ref), " ".join(w if rng.random() > 0.3 else "x" for w in ref)))
        b.append(score_pair(f"u{k}", " ".join(ref), " ".join(w if rng.random() > 0.25 else "x" for w in ref)))
    return a, b


@acceptance(5, "bootstrap determinism, calibration and formatting")
def test_bootstrap_determinism():
    a, b = _systems(5)
    same = paired_bootstrap(a, a, n=1000, seed=3)
    assert same.p_value == 1.0 and same.mean_diff == 0.0
    runs = [paired_bootstrap(a, b, n=1000, seed=17, workers=w) for w in (1, 1, 2, 3, 8)]
    assert all(r == runs[0] for r in runs)
    assert repr(runs[0]) == repr(runs[-1])
    text = runs[0].format_a()
    mean, half = text.split(" ± ")
    assert f"{runs[0].mean_a:.2f}" == mean and f"{runs[0].half_width_a:.2f}" == half
    assert format_ci(36.77, 1.21) == "36.77 ± 1.21"


@acceptance(6, "checkpoint score is exactly the equal-weight mean of WER and CER")
def test_checkpoint_score():
    rng = random.Random(6)
    for _ in range(100):
        w, c = rng.uniform(0, 2), rng.uniform(0, 1)
        assert Fraction(checkpoint_score(w, c)) == Fraction(float(Fraction(w) * Fraction(1, 2) + Fraction(c) * Fraction(1, 2)))


@acceptance(7, "duration report reproduces hand-computed hours")
def test_duration_report(manifest):
    rows = {(r["language"], r["split"], r["gender"]): float(r["hours"]) for r in duration_rows(duration_report(manifest))}
    hand = {
        ("AMH", "train", "M"): 2.00,
        ("AMH", "train", "F"): 0.50,
        ("AMH", "train", "unknown"): 0.00,
        ("AMH", "train", "All"): 2.50,
        ("TIR", "train", "unknown"): 0.20,
        ("ORM", "validation", "F"): 0.25,
        ("WAL", "validation", "M"): 0.01,
        ("WAL", "test", "M"): 0.00,
        ("SID", "train", "All"): 0.00,
    }
    for key, hours in hand.items():
        assert abs(rows[key] - hours) <= 0.01, key
    # test split: per-cell sums from the raw records
    for lang in LANGUAGES:
        for g in harness.GENDERS:
            secs = sum(u.duration_s for u in manifest if (u.language, u.split, u.gender) == (lang, "test", g))
            assert abs(rows[(lang, "test", g)] - secs / 3600) <= 0.01
        assert abs(rows[(lang, "test", "All")] - sum(rows[(lang, "test", g)] for g in harness.GENDERS)) <= 0.01


def _pct(num, den):
    return 100 * Fraction(num, den)


def _hand_bootstrap(expected, n, seed):
    """Per-resample WER difference from the plan-derived error counts."""
    errs_a = [e["word_errors"] for e in expected]
    errs_b = [e["word_errors_b"] for e in expected]
    lens = [e["ref_words"] for e in expected]
    rows = np.random.default_rng(seed).integers(0, len(expected), size=(n, len(expected)))
    diffs = []
    for row in rows.tolist():
        tot = sum(lens[i] for i in row)
        diffs.append(float(_pct(sum(errs_a[i] for i in row), tot) - _pct(sum(errs_b[i] for i in row), tot)))
    return diffs


@acceptance(8, "end-to-end evaluation of the 50-utterance fixture")
def test_end_to_end_fixture(manifest, hyps_a, hyps_b, expected):
    report = evaluate_run(manifest, hyps_a, EVAL)
    per_lang = {}
    for lang in LANGUAGES:
        ex = [e for e in expected if e["language"] == lang]
        w = _pct(sum(e["word_errors"] for e in ex), sum(e["ref_words"] for e in ex))
        c = _pct(sum(e["char_errors"] for e in ex), sum(e["ref_chars"] for e in ex))
        lid = _pct(sum(e["predicted_lang"] == lang for e in ex), len(ex))
        row = report.row(lang)
        assert row.wer == pytest.approx(float(w), abs=1e-9)
        assert row.cer == pytest.approx(float(c), abs=1e-9)
        assert row.lid_acc == pytest.approx(float(lid), abs=1e-9)
        assert row.checkpoint_score == pytest.approx(float((w + c) / 200), abs=1e-12)
        male = [e for e in ex if e["gender"] == "M"]
        female = [e for e in ex if e["gender"] == "F"]
        if male and female:
            mw = _pct(sum(e["word_errors"] for e in male), sum(e["ref_words"] for e in male))
            fw = _pct(sum(e["word_errors"] for e in female), sum(e["ref_words"] for e in female))
            assert row.delta == pytest.approx(float(mw - fw), abs=1e-9)
        else:
            assert row.delta is None
        per_lang[lang] = (w, c)

    total_w = _pct(sum(e["word_errors"] for e in expected), sum(e["ref_words"] for e in expected))
    total_c = _pct(sum(e["char_errors"] for e in expected), sum(e["ref_chars"] for e in expected))
    assert report.aggregate.wer == pytest.approx(float(total_w), abs=1e-9)
    assert report.aggregate.cer == pytest.approx(float(total_c), abs=1e-9)
    assert report.aggregate.lid_acc == pytest.approx(float(_pct(sum(e["predicted_lang"] == e["language"] for e in expected), 50)))
    assert report.macro.wer == pytest.approx(float(sum(w for w, _ in per_lang.values()) / 5), abs=1e-9)
    assert report.macro.cer == pytest.approx(float(sum(c for _, c in per_lang.values()) / 5), abs=1e-9)

    # deterministic rendering
    assert evaluate_run(manifest, hyps_a, EVAL, EvalOptions(workers=4)).to_json() == report.to_json()

    # system comparison against a hand-rolled resampling of the plan counts
    res = compare_runs(manifest, hyps_a, hyps_b, EVAL, n=1000, seed=0)["ALL"]
    diffs = _hand_bootstrap(expected, 1000, 0)
    assert res.mean_diff == pytest.approx(float(np.mean(diffs)), abs=1e-9)
    total_b = _pct(sum(e["word_errors_b"] for e in expected), sum(e["ref_words"] for e in expected))
    assert res.observed_a - res.observed_b == pytest.approx(float(total_w - total_b), abs=1e-9)
    opposite = sum(d > 0 for d in diffs) / 1000 + 0.5 * sum(d == 0 for d in diffs) / 1000
    assert res.p_value == pytest.approx(min(1.0, 2 * min(opposite, 1 - opposite)), abs=1e-12)


@acceptance(9, "vocabulary growth and TTR agree with an independent recount")
def test_lexstats():
    rng = np.random.default_rng(99)
    streams = [zipf_stream(rng, 100_000, 5000), [f"t{k}" for k in rng.integers(0, 20000, size=100_000)]]
    for tokens in streams:
        assert vocab_growth(tokens, 1000).points == set_recount(tokens, 1000)
        for n in (1, 999, 50_000, 100_000):
            assert ttr_at(iter(tokens), n) == len(set(tokens[:n])) / n

    prng = random.Random(9)
    for _ in range(100):
        tokens = [prng.choice("abcdefghij") for _ in range(prng.randint(2, 300))]
        n1 = prng.randint(1, len(tokens))
        n2 = prng.randint(n1, len(tokens))
        assert round(ttr_at(tokens, n2) * n2) >= round(ttr_at(tokens, n1) * n1)
        head = tokens[:n2]
        prng.shuffle(head)
        assert ttr_at(head + tokens[n2:], n2) == ttr_at(tokens, n2)


def _call(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    assert code == 0, argv
    return out


def _json(text, keys):
    obj = json.loads(text)
    assert set(keys) <= set(obj), (keys, list(obj))
    return obj


def _csv(text, header):
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows and list(rows[0]) == header
    return rows


@acceptance(10, "every CLI subcommand runs on the fixture corpus")
def test_cli_smoke(fixture_dir, tmp_path, capsys):
    start = time.perf_counter()
    m, ha, hb = fixture_dir / "manifest.jsonl", fixture_dir / "hyp_a.jsonl", fixture_dir / "hyp_b.jsonl"
    vocab = tmp_path / "vocab.txt"

    _json(_call(capsys, "vocab", "build", "--manifest", m, "-o", vocab), ["size", "blank_id", "lid_ids"])
    info = _json(_call(capsys, "vocab", "inspect", vocab, "--symbols"), ["size", "symbols"])
    assert len(info["symbols"]) == info["size"]
    enc = _json(_call(capsys, "encode", "--text", "ሰላም", "--lang", "AMH", "--vocab", vocab), ["ids", "lang_id"])

    V = info["size"]
    path = [x for i in enc["ids"] for x in (i, 0)]
    lp = np.full((len(path), V), np.log(0.01 / (V - 1)))
    lp[np.arange(len(path)), path] = np.log(0.99)
    write_logits(tmp_path / "l.bin", lp)
    dec = _json(_call(capsys, "decode-logits", "--logits", tmp_path / "l.bin", "--vocab", vocab), ["lang", "text"])
    assert (dec["lang"], dec["text"]) == ("AMH", "ሰላም")
    loss = _json(_call(capsys, "ctc-loss", "--logits", tmp_path / "l.bin", "--vocab", vocab, "--text", "ሰላም", "--lang", "AMH"), ["loss"])
    assert loss["loss"] >= 0
    write_logits(tmp_path / "s.txt", random_log_probs(np.random.default_rng(1), 5, 4), "text")
    _json(_call(capsys, "ctc-loss", "--logits", tmp_path / "s.txt", "--ids", "1,2,1", "--brute-force"), ["brute_force"])

    assert _call(capsys, "normalize", "--lang", "ORM", "--norm", "both", "--text", "Hoomaa sammuu").strip() == "homa samu"

    for fmt in ("json", "csv"):
        out = _call(capsys, "evaluate", "--manifest", m, "--hyp", ha, "--format", fmt)
        if fmt == "json":
            _json(out, ["languages", "aggregate", "macro"])
        else:
            _csv(out, list(harness.CSV_COLUMNS))
        out = _call(capsys, "compare", "--manifest", m, "--hyp", ha, "--hyp-b", hb, "--bootstrap-n", "200", "--format", fmt)
        if fmt == "json":
            _json(out, ["bootstrap"])
        else:
            _csv(out, ["language", "system_a", "system_b", "diff", "ci_low", "ci_high", "p_value"])
        out = _call(capsys, "gender-report", "--manifest", m, "--hyp", ha, "--format", fmt)
        if fmt == "json":
            _json(out, ["gender"])
        else:
            assert out.startswith("language,")
        out = _call(capsys, "duration-report", "--manifest", m, "--format", fmt)
        if fmt == "csv":
            assert len(_csv(out, ["language", "split", "gender", "hours"])) == 5 * 3 * 4
        else:
            json.loads(out)

    _csv(_call(capsys, "lexstats", "growth", "--manifest", m, "--step", "25"), ["tokens", "types"])
    _json(_call(capsys, "lexstats", "ttr", "--manifest", m, "--n", "50", "--lang", "ORM", "--split", "test"), ["ttr"])
    text_file = tmp_path / "corpus.txt"
    text_file.write_text("akkam akkam nagaa\nhoomaa\n", encoding="utf-8")
    _csv(_call(capsys, "lexstats", "growth", "--text-file", text_file, "--lang", "ORM", "--step", "2"), ["tokens", "types"])

    src = tmp_path / "m.csv"
    src.write_text("id,language,split,gender,duration_s,text\na,ORM,test,F,1.5,akkam\n", encoding="utf-8")
    _call(capsys, "convert-manifest", src, "-o", tmp_path / "m.jsonl")
    assert len(harness.load_manifest(tmp_path / "m.jsonl")) == 1

    assert time.perf_counter() - start < 60
