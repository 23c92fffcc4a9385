"""Error rates, LID accuracy, gender strata and paired bootstrap testing."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .vocab import LANGUAGES

log = logging.getLogger(__name__)


class MetricsError(ValueError):
    pass


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> Tuple[int, int, int]:
    """Unit-cost Levenshtein alignment of two token lists.

    Returns ``(substitutions, deletions, insertions)`` of one minimum-cost
    alignment; the backtrace prefers a match, then substitution, deletion,
    insertion, so counts are deterministic.
    """
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (ri != hyp[j - 1])
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    s = dl = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[i][j] == d[i - 1][j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + 1:
            s += 1
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            dl += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return s, dl, ins


@dataclass(frozen=True)
class ScoredPair:
    utterance_id: str
    ref_tokens: Tuple[str, ...]
    hyp_tokens: Tuple[str, ...]
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def ref_text(self) -> str:
        return " ".join(self.ref_tokens)

    def hyp_text(self) -> str:
        return " ".join(self.hyp_tokens)


def score_pair(utterance_id: str, ref: str, hyp: str) -> ScoredPair:
    """Word-level scoring of already-normalized strings."""
    r, h = tuple(ref.split()), tuple(hyp.split())
    s, d, i = edit_distance(r, h)
    return ScoredPair(utterance_id, r, h, s, d, i, len(r))


def char_pair(pair: ScoredPair, count_spaces: bool = True) -> ScoredPair:
    """Re-score a word pair at the character level. Words are re-joined with
    single spaces, i.e. the trimmed, whitespace-collapsed string."""
    sep = " " if count_spaces else ""
    r, h = tuple(sep.join(pair.ref_tokens)), tuple(sep.join(pair.hyp_tokens))
    s, d, i = edit_distance(r, h)
    return ScoredPair(pair.utterance_id, r, h, s, d, i, len(r))


def _rate(pairs: Iterable[ScoredPair], unit: str) -> float:
    errors = total = 0
    for p in pairs:
        errors += p.errors
        total += p.ref_len
    if total == 0:
        raise MetricsError(f"zero total reference {unit}")
    return 100.0 * errors / total


def wer(pairs: Iterable[ScoredPair]) -> float:
    """Micro-averaged WER in percent; exceeds 100 when insertions dominate."""
    return _rate(pairs, "words")


def cer(pairs: Iterable[ScoredPair], count_spaces: bool = True) -> float:
    return _rate((char_pair(p, count_spaces) for p in pairs), "characters")


def macro_average(values: Iterable[Optional[float]]) -> Optional[float]:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def lid_accuracy(pairs: Iterable[Tuple[str, Optional[str]]]) -> float:
    correct = total = 0
    for true_lang, pred in pairs:
        if true_lang not in LANGUAGES:
            raise MetricsError(f"unknown language code {true_lang!r}")
        total += 1
        correct += pred == true_lang
    if total == 0:
        raise MetricsError("no utterances for LID accuracy")
    return 100.0 * correct / total


def checkpoint_score(wer: float, cer: float) -> float:
    """Model-selection criterion: equal-weight mean of WER and CER."""
    return 0.5 * wer + 0.5 * cer


@dataclass(frozen=True)
class GenderStratum:
    language: str
    male_wer: Optional[float]
    female_wer: Optional[float]
    delta: Optional[float]
    n_male: int
    n_female: int
    n_unknown: int
    diagnostic: Optional[str] = None

    def format_delta(self) -> str:
        return "n/a" if self.delta is None else f"{self.delta:+.2f}"


def gender_strata(records: Iterable[Tuple[str, str, ScoredPair]]) -> Dict[str, GenderStratum]:
    """Per-language male/female WER and delta = male - female.

    ``records`` are ``(language, gender, pair)`` with gender in M/F/unknown.
    Unknown-gender utterances are counted but belong to neither stratum; a
    language missing either stratum gets ``delta=None`` and a diagnostic.
    """
    groups: Dict[str, Dict[str, List[ScoredPair]]] = {}
    for lang, gender, pair in records:
        if gender not in ("M", "F", "unknown"):
            raise MetricsError(f"unknown gender label {gender!r}")
        groups.setdefault(lang, {"M": [], "F": [], "unknown": []})[gender].append(pair)

    out = {}
    for lang in sorted(groups, key=_lang_order):
        g = groups[lang]
        male = wer_or_none(g["M"])
        female = wer_or_none(g["F"])
        diag = None
        if male is None or female is None:
            missing = [name for name, v in (("male", male), ("female", female)) if v is None]
            diag = f"{lang}: no scorable {' or '.join(missing)} utterances; delta undefined"
            log.warning(diag)
        delta = male - female if male is not None and female is not None else None
        out[lang] = GenderStratum(lang, male, female, delta, len(g["M"]), len(g["F"]), len(g["unknown"]), diag)
    return out


def wer_or_none(pairs: List[ScoredPair]) -> Optional[float]:
    if not pairs or sum(p.ref_len for p in pairs) == 0:
        return None
    return wer(pairs)


def _lang_order(lang: str):
    return (LANGUAGES.index(lang), lang) if lang in LANGUAGES else (len(LANGUAGES), lang)


@dataclass(frozen=True)
class BootstrapResult:
    mean_diff: float
    ci_low: float
    ci_high: float
    half_width: float
    p_value: float
    n_resamples: int
    seed: int
    # per-system bootstrap WER, reported as mean +/- half-width
    mean_a: float
    half_width_a: float
    mean_b: float
    half_width_b: float
    observed_a: float
    observed_b: float

    def format_a(self) -> str:
        return format_ci(self.mean_a, self.half_width_a)

    def format_b(self) -> str:
        return format_ci(self.mean_b, self.half_width_b)

    def format_diff(self) -> str:
        return format_ci(self.mean_diff, self.half_width)


def format_ci(mean: float, half_width: float) -> str:
    return f"{mean:.2f} ± {half_width:.2f}"


def resample_indices(n_items: int, n_resamples: int, seed: int) -> np.ndarray:
    """All bootstrap index sets, drawn up front so evaluation order is irrelevant."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, n_items, size=(n_resamples, n_items))


def _resampled_wer(errors: np.ndarray, lengths: np.ndarray, idx: np.ndarray) -> np.ndarray:
    err = errors[idx].sum(axis=1)
    tot = lengths[idx].sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(tot > 0, 100.0 * err / np.maximum(tot, 1), 0.0)


def _half(lo: float, hi: float) -> float:
    return (hi - lo) / 2.0


def paired_bootstrap(
    pairs_a: Sequence[ScoredPair],
    pairs_b: Sequence[ScoredPair],
    n: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> BootstrapResult:
    """Paired bootstrap over utterances comparing micro-WER of A and B.

    Differences are A - B. The p-value is two-sided: twice the fraction of
    resampled differences falling on the side opposite the mean difference
    (ties count half), capped at 1. Identical systems give exactly 1.
    """
    if n < 2:
        raise MetricsError("need at least 2 bootstrap resamples")
    by_id_b = {p.utterance_id: p for p in pairs_b}
    ids_a = [p.utterance_id for p in pairs_a]
    if len(by_id_b) != len(pairs_b) or len(set(ids_a)) != len(ids_a):
        raise MetricsError("duplicate utterance ids in bootstrap input")
    if set(ids_a) != set(by_id_b):
        missing = sorted(set(ids_a) ^ set(by_id_b))
        raise MetricsError(f"utterance ids differ between systems: {missing[:10]}")
    if not ids_a:
        raise MetricsError("empty evaluation set")
    ordered_b = [by_id_b[i] for i in ids_a]

    err_a = np.array([p.errors for p in pairs_a], dtype=np.int64)
    len_a = np.array([p.ref_len for p in pairs_a], dtype=np.int64)
    err_b = np.array([p.errors for p in ordered_b], dtype=np.int64)
    len_b = np.array([p.ref_len for p in ordered_b], dtype=np.int64)
    if len_a.sum() == 0 or len_b.sum() == 0:
        raise MetricsError("zero total reference words")

    idx = resample_indices(len(ids_a), n, seed)
    chunks = np.array_split(np.arange(n), max(1, min(workers, n)))

    def run(rows):
        sub = idx[rows]
        return _resampled_wer(err_a, len_a, sub), _resampled_wer(err_b, len_b, sub)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    wer_a = np.concatenate([p[0] for p in parts])
    wer_b = np.concatenate([p[1] for p in parts])
    diffs = wer_a - wer_b

    mean_diff = float(diffs.mean())
    lo, hi = (float(x) for x in np.percentile(diffs, [2.5, 97.5]))
    # a heavily skewed resample distribution can put the mean outside the percentiles
    lo, hi = min(lo, mean_diff), max(hi, mean_diff)
    if mean_diff == 0.0:
        p_value = 1.0
    else:
        sign = np.sign(mean_diff)
        opposite = float(np.mean(np.sign(diffs) == -sign) + 0.5 * np.mean(diffs == 0))
        p_value = min(1.0, 2.0 * min(opposite, 1.0 - opposite))

    lo_a, hi_a = np.percentile(wer_a, [2.5, 97.5])
    lo_b, hi_b = np.percentile(wer_b, [2.5, 97.5])
    return BootstrapResult(
        mean_diff=mean_diff,
        ci_low=lo,
        ci_high=hi,
        half_width=_half(lo, hi),
        p_value=p_value,
        n_resamples=n,
        seed=seed,
        mean_a=float(wer_a.mean()),
        half_width_a=_half(float(lo_a), float(hi_a)),
        mean_b=float(wer_b.mean()),
        half_width_b=_half(float(lo_b), float(hi_b)),
        observed_a=wer(pairs_a),
        observed_b=wer(ordered_b),
    )

