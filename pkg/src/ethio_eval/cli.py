"""Command-line entry point: ``ethio-eval <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import ctc, harness, lexstats, metrics
from .normalize import PRESETS, NormalizationConfig, apply_pipeline, load_digraphs, load_homophone_map
from .vocab import LANGUAGES, GraphemeVocab, VocabConfig, build_vocab, decode_ids, encode_target

DATA_ENV = "ETHIO_EVAL_DATA"
log = logging.getLogger("ethio_eval")


def resolve(path: Optional[str]) -> Optional[Path]:
    """Relative paths that do not exist here are looked up under $ETHIO_EVAL_DATA."""
    if path is None:
        return None
    p = Path(path)
    root = os.environ.get(DATA_ENV)
    if not p.is_absolute() and not p.exists() and root:
        return Path(root) / p
    return p


def emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def dump_csv(rows: List[dict], columns=None) -> str:
    buf = io.StringIO()
    columns = columns or (list(rows[0]) if rows else [])
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _vocab(args) -> GraphemeVocab:
    if getattr(args, "vocab", None):
        return GraphemeVocab.load(resolve(args.vocab))
    return build_vocab()


def _norm_config(args) -> NormalizationConfig:
    overrides = {}
    if getattr(args, "homophones", None):
        overrides["homophone_map"] = load_homophone_map(resolve(args.homophones))
    if getattr(args, "digraphs", None):
        overrides["digraphs"] = load_digraphs(resolve(args.digraphs))
    return NormalizationConfig.preset(args.norm, **overrides)


def _eval_options(args, gender=True) -> harness.EvalOptions:
    split = None if args.split == "all" else args.split
    return harness.EvalOptions(split=split, gender=gender, workers=args.workers, norm_name=args.norm)


# -- subcommands -------------------------------------------------------------


def cmd_vocab_build(args) -> int:
    cfg = VocabConfig(
        include_geez_core=not args.no_geez,
        include_ethiopic_punct_numerals=not args.no_ethiopic_punct,
        include_latin_letters=not args.no_latin,
        include_latin_punct_numerals=not args.no_latin_punct,
        strict_unknowns=args.strict,
        include_unk=args.unk,
        extra_symbols=tuple(args.extra or ()),
    )
    corpus = None
    if args.manifest:
        corpus = [(u.language, u.text) for u in harness.load_manifest(resolve(args.manifest))]
    vocab = build_vocab(cfg, corpus)
    if args.output:
        vocab.save(args.output)
    sys.stdout.write(dump_json(_vocab_summary(vocab)))
    return 0


def _vocab_summary(vocab: GraphemeVocab) -> dict:
    return {
        "size": len(vocab),
        "blank_id": vocab.blank_id,
        "unk_id": vocab.unk_id,
        "lid_ids": vocab.lid_ids,
        "n_graphemes": sum(1 for i in range(len(vocab)) if not vocab.is_special(i)),
    }


def cmd_vocab_inspect(args) -> int:
    vocab = GraphemeVocab.load(resolve(args.path))
    summary = _vocab_summary(vocab)
    if args.symbols:
        summary["symbols"] = list(vocab.symbols)
    sys.stdout.write(dump_json(summary))
    return 0


def cmd_encode(args) -> int:
    vocab = _vocab(args)
    target = encode_target(args.text, args.lang, vocab, strict=args.strict)
    sys.stdout.write(dump_json({"lang": args.lang, "lang_id": target.lang_id, "ids": target.ids}))
    return 0


def cmd_decode_logits(args) -> int:
    vocab = _vocab(args)
    res = ctc.greedy_decode(ctc.read_logits(resolve(args.logits)), vocab)
    out = {"lang": res.lang, "text": res.text, "raw_ids": res.raw_ids, "misplaced_lid": res.misplaced_lid}
    sys.stdout.write(dump_json(out))
    return 0


def cmd_ctc_loss(args) -> int:
    vocab = _vocab(args)
    logits = ctc.read_logits(resolve(args.logits))
    if args.ids:
        target = [int(x) for x in args.ids.split(",")]
    else:
        if not (args.text and args.lang):
            raise ValueError("ctc-loss needs either --ids or both --text and --lang")
        target = encode_target(args.text, args.lang, vocab, strict=args.strict)
    ll = ctc.ctc_log_likelihood(logits, target, vocab.blank_id)
    out = {"log_likelihood": ll, "loss": -ll, "frames": int(logits.shape[0])}
    if args.brute_force:
        out["brute_force"] = ctc.ctc_brute_force(logits, target, vocab.blank_id)
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")
    return 0


def cmd_normalize(args) -> int:
    cfg = _norm_config(args)
    lines = [args.text] if args.text is not None else sys.stdin.read().splitlines()
    for line in lines:
        sys.stdout.write(apply_pipeline(line, args.lang, cfg) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    manifest = harness.load_manifest(resolve(args.manifest))
    hyps = harness.load_hypotheses(resolve(args.hyp))
    report = harness.evaluate_run(manifest, hyps, _norm_config(args), _eval_options(args, not args.no_gender))
    emit(report.to_json() if args.format == "json" else report.to_csv(), args.output)
    return 0


def cmd_compare(args) -> int:
    manifest = harness.load_manifest(resolve(args.manifest))
    hyps_a = harness.load_hypotheses(resolve(args.hyp))
    hyps_b = harness.load_hypotheses(resolve(args.hyp_b))
    results = harness.compare_runs(
        manifest, hyps_a, hyps_b, _norm_config(args), args.bootstrap_n, args.seed, _eval_options(args)
    )
    if args.format == "json":
        emit(dump_json({"bootstrap": {k: harness.bootstrap_to_dict(v) for k, v in results.items()}}), args.output)
    else:
        emit(dump_csv(harness.comparison_rows(results)), args.output)
    return 0


def cmd_gender_report(args) -> int:
    manifest = harness.load_manifest(resolve(args.manifest))
    hyps = harness.load_hypotheses(resolve(args.hyp))
    scored = harness.score_utterances(manifest, hyps, _norm_config(args), _eval_options(args))
    strata = metrics.gender_strata((s.utt.language, s.utt.gender, s.pair) for s in scored)
    rows = [
        {
            "language": st.language,
            "male_wer": None if st.male_wer is None else round(st.male_wer, 2),
            "female_wer": None if st.female_wer is None else round(st.female_wer, 2),
            "delta": st.format_delta(),
            "n_male": st.n_male,
            "n_female": st.n_female,
            "n_unknown": st.n_unknown,
            "diagnostic": st.diagnostic,
        }
        for st in strata.values()
    ]
    emit(dump_json({"gender": rows}) if args.format == "json" else dump_csv(rows), args.output)
    return 0


def cmd_duration_report(args) -> int:
    hours = harness.duration_report(harness.load_manifest(resolve(args.manifest)))
    rows = harness.duration_rows(hours)
    emit(dump_json({"durations": rows}) if args.format == "json" else dump_csv(rows), args.output)
    return 0


def _lex_tokens(args):
    if args.manifest:
        utts = harness.load_manifest(resolve(args.manifest))
        split = None if args.split == "all" else args.split
        lines = [(u.language, u.text) for u in utts if (split is None or u.split == split)
                 and (args.lang is None or u.language == args.lang)]
    else:
        if args.lang is None:
            raise ValueError("--lang is required with --text-file")
        text = resolve(args.text_file).read_text(encoding="utf-8")
        lines = [(args.lang, ln) for ln in text.splitlines()]
    return lexstats.corpus_tokens(lines, _norm_config(args))


def cmd_lexstats_growth(args) -> int:
    curve = lexstats.vocab_growth(_lex_tokens(args), args.step)
    if args.format == "csv":
        emit(curve.to_csv(), args.output)
    else:
        emit(dump_json({"points": [list(p) for p in curve.points]}), args.output)
    return 0


def cmd_lexstats_ttr(args) -> int:
    ttr = lexstats.ttr_at(_lex_tokens(args), args.n)
    out = {"lang": args.lang, "n": args.n, "ttr": ttr}
    emit(dump_json(out) if args.format == "json" else dump_csv([out]), args.output)
    return 0


def cmd_convert_manifest(args) -> int:
    n = harness.convert_csv_manifest(resolve(args.csv), args.output)
    log.info("wrote %d utterances to %s", n, args.output)
    return 0


# -- parser ------------------------------------------------------------------


def _add_norm(p, default="eval"):
    p.add_argument("--norm", choices=PRESETS, default=default)
    p.add_argument("--homophones", help="homophone map TSV (source<TAB>target)")
    p.add_argument("--digraphs", help="digraph list, one per line")


def _add_eval(p):
    p.add_argument("--manifest", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--split", choices=(*harness.SPLITS, "all"), default="test")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o")
    _add_norm(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ethio-eval", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    vocab = sub.add_parser("vocab", help="build or inspect a grapheme vocabulary")
    vsub = vocab.add_subparsers(dest="vocab_command", required=True)
    vb = vsub.add_parser("build")
    vb.add_argument("--output", "-o")
    vb.add_argument("--manifest", help="extend with graphemes observed in this manifest")
    vb.add_argument("--no-geez", action="store_true")
    vb.add_argument("--no-ethiopic-punct", action="store_true")
    vb.add_argument("--no-latin", action="store_true")
    vb.add_argument("--no-latin-punct", action="store_true")
    vb.add_argument("--unk", action="store_true", help="append an <unk> entry")
    vb.add_argument("--extra", nargs="*")
    vb.add_argument("--strict", action="store_true", help="reject corpus graphemes outside the blocks")
    vb.set_defaults(func=cmd_vocab_build)
    vi = vsub.add_parser("inspect")
    vi.add_argument("path")
    vi.add_argument("--symbols", action="store_true")
    vi.set_defaults(func=cmd_vocab_inspect)

    enc = sub.add_parser("encode", help="text -> [LANG] + grapheme ids")
    enc.add_argument("--text", required=True)
    enc.add_argument("--lang", choices=LANGUAGES, required=True)
    enc.add_argument("--vocab")
    enc.add_argument("--strict", action="store_true")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode-logits", help="greedy CTC decoding with LID extraction")
    dec.add_argument("--logits", required=True)
    dec.add_argument("--vocab")
    dec.set_defaults(func=cmd_decode_logits)

    loss = sub.add_parser("ctc-loss", help="CTC log-likelihood of a target")
    loss.add_argument("--logits", required=True)
    loss.add_argument("--vocab")
    loss.add_argument("--text")
    loss.add_argument("--lang", choices=LANGUAGES)
    loss.add_argument("--ids", help="comma-separated target ids instead of --text/--lang")
    loss.add_argument("--strict", action="store_true")
    loss.add_argument("--brute-force", action="store_true", help="also report the enumeration oracle")
    loss.set_defaults(func=cmd_ctc_loss)

    norm = sub.add_parser("normalize", help="normalize text (stdin when --text is absent)")
    norm.add_argument("--lang", choices=LANGUAGES, required=True)
    norm.add_argument("--text")
    _add_norm(norm)
    norm.set_defaults(func=cmd_normalize)

    ev = sub.add_parser("evaluate", help="WER/CER/LID report for a hypothesis file")
    _add_eval(ev)
    ev.add_argument("--no-gender", action="store_true")
    ev.set_defaults(func=cmd_evaluate)

    cmp_ = sub.add_parser("compare", help="paired bootstrap comparison of two hypothesis files")
    _add_eval(cmp_)
    cmp_.add_argument("--hyp-b", required=True)
    cmp_.add_argument("--bootstrap-n", type=int, default=1000)
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.set_defaults(func=cmd_compare)

    gr = sub.add_parser("gender-report", help="male/female WER and delta per language")
    _add_eval(gr)
    gr.set_defaults(func=cmd_gender_report)

    dr = sub.add_parser("duration-report", help="hours by language, split and gender")
    dr.add_argument("--manifest", required=True)
    dr.add_argument("--format", choices=("json", "csv"), default="json")
    dr.add_argument("--output", "-o")
    dr.set_defaults(func=cmd_duration_report)

    lex = sub.add_parser("lexstats", help="vocabulary growth and type-token ratio")
    lsub = lex.add_subparsers(dest="lex_command", required=True)
    for name, func in (("growth", cmd_lexstats_growth), ("ttr", cmd_lexstats_ttr)):
        lp = lsub.add_parser(name)
        src = lp.add_mutually_exclusive_group(required=True)
        src.add_argument("--manifest")
        src.add_argument("--text-file")
        lp.add_argument("--lang", choices=LANGUAGES)
        lp.add_argument("--split", choices=(*harness.SPLITS, "all"), default="all")
        lp.add_argument("--format", choices=("json", "csv"), default="csv" if name == "growth" else "json")
        lp.add_argument("--output", "-o")
        _add_norm(lp)
        if name == "growth":
            lp.add_argument("--step", type=int, default=1000)
        else:
            lp.add_argument("--n", type=int, required=True, help="token budget")
        lp.set_defaults(func=func)

    conv = sub.add_parser("convert-manifest", help="CSV manifest -> JSON Lines")
    conv.add_argument("csv")
    conv.add_argument("--output", "-o", required=True)
    conv.set_defaults(func=cmd_convert_manifest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
