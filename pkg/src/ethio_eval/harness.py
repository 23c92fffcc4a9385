"""Manifest handling and end-to-end evaluation of hypothesis files."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import metrics
from .metrics import BootstrapResult, ScoredPair
from .normalize import NormalizationConfig, apply_pipeline
from .vocab import LANGUAGES

SPLITS = ("train", "validation", "test")
GENDERS = ("M", "F", "unknown")
AGGREGATE = "ALL"
MACRO = "AVG"


class ManifestError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Utterance:
    id: str
    language: str
    split: str
    gender: str
    duration_s: float
    text: str
    audio_path: Optional[str] = None


@dataclass(frozen=True)
class HypothesisRecord:
    id: str
    text: str
    predicted_lang: Optional[str] = None


def _utterance_from_record(rec: dict, where: str) -> Utterance:
    if not isinstance(rec, dict):
        raise ManifestError(f"{where}: expected a JSON object")
    for key in ("id", "language", "split", "gender", "duration_s", "text"):
        if key not in rec:
            raise ManifestError(f"{where}: missing field '{key}'")
    for key, allowed in (("language", LANGUAGES), ("split", SPLITS), ("gender", GENDERS)):
        if rec[key] not in allowed:
            raise ManifestError(f"{where}: field '{key}' has value {rec[key]!r}, expected one of {list(allowed)}")
    if not isinstance(rec["id"], str) or not rec["id"]:
        raise ManifestError(f"{where}: field 'id' must be a non-empty string")
    if not isinstance(rec["text"], str):
        raise ManifestError(f"{where}: field 'text' must be a string")
    dur = rec["duration_s"]
    if isinstance(dur, bool) or not isinstance(dur, (int, float)) or not dur >= 0:
        raise ManifestError(f"{where}: field 'duration_s' must be a non-negative number")
    audio = rec.get("audio_path")
    if audio is not None and not isinstance(audio, str):
        raise ManifestError(f"{where}: field 'audio_path' must be a string")
    return Utterance(rec["id"], rec["language"], rec["split"], rec["gender"], float(dur), rec["text"], audio)


def parse_manifest(lines: Iterable[str], source: str = "<manifest>") -> List[Utterance]:
    utts: List[Utterance] = []
    seen: Dict[str, int] = {}
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        where = f"{source}:{lineno}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ManifestError(f"{where}: malformed JSON ({e.msg})") from None
        utt = _utterance_from_record(rec, where)
        if utt.id in seen:
            raise ManifestError(f"{where}: duplicate id {utt.id!r} (first seen on line {seen[utt.id]})")
        seen[utt.id] = lineno
        utts.append(utt)
    return utts


def load_manifest(path) -> List[Utterance]:
    with open(path, encoding="utf-8") as f:
        return parse_manifest(f, str(path))


def write_manifest(path, utterances: Iterable[Utterance]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for u in utterances:
            rec = {k: v for k, v in asdict(u).items() if not (k == "audio_path" and v is None)}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def convert_csv_manifest(csv_path, jsonl_path) -> int:
    """CSV with a header row naming the manifest fields -> validated JSONL."""
    with open(csv_path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
        header = reader.fieldnames or []
    missing = [k for k in ("id", "language", "split", "gender", "duration_s", "text") if k not in header]
    if missing:
        raise ManifestError(f"{csv_path}:1: header lacks columns {missing}")
    utts = []
    seen = set()
    for lineno, row in enumerate(rows, 2):
        where = f"{csv_path}:{lineno}"
        rec = dict(row)
        try:
            rec["duration_s"] = float(rec.get("duration_s", ""))
        except ValueError:
            raise ManifestError(f"{where}: field 'duration_s' must be a number") from None
        if not rec.get("audio_path"):
            rec.pop("audio_path", None)
        utt = _utterance_from_record(rec, where)
        if utt.id in seen:
            raise ManifestError(f"{where}: duplicate id {utt.id!r}")
        seen.add(utt.id)
        utts.append(utt)
    write_manifest(jsonl_path, utts)
    return len(utts)


def load_hypotheses(path) -> List[HypothesisRecord]:
    out = []
    seen = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ManifestError(f"{where}: malformed JSON ({e.msg})") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("id"), str) or not isinstance(rec.get("text"), str):
                raise ManifestError(f"{where}: hypothesis needs string fields 'id' and 'text'")
            pred = rec.get("predicted_lang")
            if pred is not None and pred not in LANGUAGES:
                raise ManifestError(f"{where}: field 'predicted_lang' has value {pred!r}")
            if rec["id"] in seen:
                raise ManifestError(f"{where}: duplicate hypothesis id {rec['id']!r}")
            seen.add(rec["id"])
            out.append(HypothesisRecord(rec["id"], rec["text"], pred))
    return out


def write_hypotheses(path, hyps: Iterable[HypothesisRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for h in hyps:
            rec = {"id": h.id, "text": h.text}
            if h.predicted_lang is not None:
                rec["predicted_lang"] = h.predicted_lang
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


# -- durations ---------------------------------------------------------------


def duration_report(utterances: Iterable[Utterance]) -> Dict[Tuple[str, str, str], float]:
    """Hours per (language, split, gender); gender "All" sums M, F and unknown.

    Every language/split/gender cell is present, empty strata as 0.0.
    """
    seconds = {(l, s, g): 0.0 for l in LANGUAGES for s in SPLITS for g in GENDERS}
    for u in utterances:
        seconds[(u.language, u.split, u.gender)] += u.duration_s
    hours = {}
    for l in LANGUAGES:
        for s in SPLITS:
            cells = [seconds[(l, s, g)] / 3600.0 for g in GENDERS]
            for g, h in zip(GENDERS, cells):
                hours[(l, s, g)] = h
            hours[(l, s, "All")] = sum(cells)
    return hours


def duration_rows(hours: Dict[Tuple[str, str, str], float]) -> List[dict]:
    return [
        {"language": l, "split": s, "gender": g, "hours": f"{h:.2f}"}
        for (l, s, g), h in hours.items()
    ]


# -- evaluation --------------------------------------------------------------


@dataclass
class LanguageRow:
    language: str
    n_utts: int
    ref_words: int
    ref_chars: int
    wer: Optional[float]
    cer: Optional[float]
    lid_acc: Optional[float] = None
    male_wer: Optional[float] = None
    female_wer: Optional[float] = None
    delta: Optional[float] = None
    n_male: int = 0
    n_female: int = 0
    n_unknown: int = 0
    checkpoint_score: Optional[float] = None


CSV_COLUMNS = (
    "language", "n_utts", "ref_words", "wer", "cer", "lid_acc",
    "male_wer", "female_wer", "delta", "checkpoint_score",
)


@dataclass
class EvalReport:
    norm: str
    split: Optional[str]
    rows: List[LanguageRow]
    aggregate: LanguageRow
    macro: LanguageRow
    gender_diagnostics: List[str] = field(default_factory=list)
    bootstrap: Optional[dict] = None

    def row(self, language: str) -> LanguageRow:
        for r in self.rows:
            if r.language == language:
                return r
        raise KeyError(language)

    def to_dict(self) -> dict:
        out = {
            "norm": self.norm,
            "split": self.split,
            "languages": [asdict(r) for r in self.rows],
            "aggregate": asdict(self.aggregate),
            "macro": asdict(self.macro),
            "gender_diagnostics": self.gender_diagnostics,
        }
        if self.bootstrap is not None:
            out["bootstrap"] = self.bootstrap
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in [*self.rows, self.aggregate, self.macro]:
            w.writerow({k: _csv_cell(v, 4 if k == "checkpoint_score" else 2) for k, v in asdict(r).items()})
        return buf.getvalue()


def _csv_cell(v, digits=2):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return v


@dataclass(frozen=True)
class EvalOptions:
    split: Optional[str] = "test"
    gender: bool = True
    workers: int = 1
    count_spaces: bool = True
    norm_name: str = "eval"


@dataclass(frozen=True)
class _Scored:
    utt: Utterance
    pair: ScoredPair
    chars: ScoredPair
    predicted_lang: Optional[str]


def _select(manifest: Sequence[Utterance], hypotheses: Sequence[HypothesisRecord], split: Optional[str]):
    by_id = {u.id: u for u in manifest}
    unknown = sorted(h.id for h in hypotheses if h.id not in by_id)
    if unknown:
        raise EvaluationError(f"hypothesis ids not in manifest: {unknown}")
    hyp_by_id = {h.id: h for h in hypotheses}
    selected = [u for u in manifest if split is None or u.split == split]
    if not selected:
        raise EvaluationError(f"empty evaluation set for split {split!r}")
    missing = sorted(u.id for u in selected if u.id not in hyp_by_id)
    if missing:
        raise EvaluationError(f"missing hypotheses for ids: {missing}")
    return [(u, hyp_by_id[u.id]) for u in selected]


def score_utterances(
    manifest: Sequence[Utterance],
    hypotheses: Sequence[HypothesisRecord],
    config: NormalizationConfig,
    options: EvalOptions = EvalOptions(),
) -> List[_Scored]:
    """Normalize both sides per language and score each utterance."""
    items = _select(manifest, hypotheses, options.split)

    def work(item):
        u, h = item
        ref = apply_pipeline(u.text, u.language, config)
        hyp = apply_pipeline(h.text, u.language, config)
        pair = metrics.score_pair(u.id, ref, hyp)
        return _Scored(u, pair, metrics.char_pair(pair, options.count_spaces), h.predicted_lang)

    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            return list(pool.map(work, items))
    return [work(it) for it in items]


def _row(language: str, scored: List[_Scored], with_lid: bool) -> LanguageRow:
    words = [s.pair for s in scored]
    chars = [s.chars for s in scored]
    ref_words = sum(p.ref_len for p in words)
    ref_chars = sum(p.ref_len for p in chars)
    w = metrics.wer(words) if ref_words else None
    c = metrics.wer(chars) if ref_chars else None
    row = LanguageRow(language, len(scored), ref_words, ref_chars, w, c)
    if with_lid:
        row.lid_acc = metrics.lid_accuracy((s.utt.language, s.predicted_lang) for s in scored)
    if w is not None and c is not None:
        row.checkpoint_score = metrics.checkpoint_score(w / 100.0, c / 100.0)
    row.n_male = sum(s.utt.gender == "M" for s in scored)
    row.n_female = sum(s.utt.gender == "F" for s in scored)
    row.n_unknown = sum(s.utt.gender == "unknown" for s in scored)
    return row


def evaluate_run(
    manifest: Sequence[Utterance],
    hypotheses: Sequence[HypothesisRecord],
    config: NormalizationConfig,
    options: EvalOptions = EvalOptions(),
) -> EvalReport:
    scored = score_utterances(manifest, hypotheses, config, options)
    with_lid = any(h.predicted_lang is not None for h in hypotheses)

    by_lang: Dict[str, List[_Scored]] = {}
    for s in scored:
        by_lang.setdefault(s.utt.language, []).append(s)
    langs = [l for l in LANGUAGES if l in by_lang]
    rows = [_row(l, by_lang[l], with_lid) for l in langs]

    diagnostics: List[str] = []
    if options.gender:
        strata = metrics.gender_strata((s.utt.language, s.utt.gender, s.pair) for s in scored)
        for r in rows:
            st = strata[r.language]
            r.male_wer, r.female_wer, r.delta = st.male_wer, st.female_wer, st.delta
            if st.diagnostic:
                diagnostics.append(st.diagnostic)

    aggregate = _row(AGGREGATE, scored, with_lid)
    if options.gender:
        male = [s.pair for s in scored if s.utt.gender == "M"]
        female = [s.pair for s in scored if s.utt.gender == "F"]
        aggregate.male_wer = metrics.wer_or_none(male)
        aggregate.female_wer = metrics.wer_or_none(female)
        if aggregate.male_wer is not None and aggregate.female_wer is not None:
            aggregate.delta = aggregate.male_wer - aggregate.female_wer

    macro = LanguageRow(
        MACRO,
        n_utts=aggregate.n_utts,
        ref_words=aggregate.ref_words,
        ref_chars=aggregate.ref_chars,
        wer=metrics.macro_average(r.wer for r in rows),
        cer=metrics.macro_average(r.cer for r in rows),
        lid_acc=metrics.macro_average(r.lid_acc for r in rows) if with_lid else None,
        n_male=aggregate.n_male,
        n_female=aggregate.n_female,
        n_unknown=aggregate.n_unknown,
    )
    if macro.wer is not None and macro.cer is not None:
        macro.checkpoint_score = metrics.checkpoint_score(macro.wer / 100.0, macro.cer / 100.0)
    return EvalReport(options.norm_name, options.split, rows, aggregate, macro, diagnostics)


def bootstrap_to_dict(res: BootstrapResult) -> dict:
    d = asdict(res)
    d["formatted_a"] = res.format_a()
    d["formatted_b"] = res.format_b()
    d["formatted_diff"] = res.format_diff()
    return d


def compare_runs(
    manifest: Sequence[Utterance],
    hyps_a: Sequence[HypothesisRecord],
    hyps_b: Sequence[HypothesisRecord],
    config: NormalizationConfig,
    n: int = 1000,
    seed: int = 0,
    options: EvalOptions = EvalOptions(),
) -> Dict[str, BootstrapResult]:
    """Paired bootstrap of A against B per language and over all utterances."""
    ids_a = {h.id for h in hyps_a}
    ids_b = {h.id for h in hyps_b}
    if ids_a != ids_b:
        raise EvaluationError(f"hypothesis sets cover different ids: {sorted(ids_a ^ ids_b)}")
    scored_a = score_utterances(manifest, hyps_a, config, options)
    scored_b = score_utterances(manifest, hyps_b, config, options)
    out: Dict[str, BootstrapResult] = {}
    for lang in LANGUAGES:
        pa = [s.pair for s in scored_a if s.utt.language == lang]
        pb = [s.pair for s in scored_b if s.utt.language == lang]
        if pa and sum(p.ref_len for p in pa):
            out[lang] = metrics.paired_bootstrap(pa, pb, n, seed, options.workers)
    out[AGGREGATE] = metrics.paired_bootstrap(
        [s.pair for s in scored_a], [s.pair for s in scored_b], n, seed, options.workers
    )
    return out


def comparison_rows(results: Dict[str, BootstrapResult]) -> List[dict]:
    return [
        {
            "language": lang,
            "system_a": r.format_a(),
            "system_b": r.format_b(),
            "diff": r.format_diff(),
            "ci_low": f"{r.ci_low:.2f}",
            "ci_high": f"{r.ci_high:.2f}",
            "p_value": f"{r.p_value:.4f}",
        }
        for lang, r in results.items()
    ]
