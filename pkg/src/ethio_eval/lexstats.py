"""Vocabulary growth and type-token ratio."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple

from .normalize import NormalizationConfig, apply_pipeline


class LexStatsError(ValueError):
    pass


@dataclass(frozen=True)
class GrowthCurve:
    points: Tuple[Tuple[int, int], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tokens", "types"])
        w.writerows(self.points)
        return buf.getvalue()


def corpus_tokens(
    lines: Iterable[Tuple[str, str]], config: Optional[NormalizationConfig] = None
) -> Iterator[str]:
    """Whitespace tokens of ``(language, text)`` lines after normalization."""
    config = config or NormalizationConfig.preset("eval")
    for lang, text in lines:
        yield from apply_pipeline(text, lang, config).split()


def vocab_growth(tokens: Iterable[str], step: int) -> GrowthCurve:
    """Cumulative distinct-type count every ``step`` tokens and at stream end."""
    if step < 1:
        raise LexStatsError("step must be >= 1")
    seen = set()
    points: List[Tuple[int, int]] = []
    count = 0
    for tok in tokens:
        seen.add(tok)
        count += 1
        if count % step == 0:
            points.append((count, len(seen)))
    if count == 0:
        raise LexStatsError("empty token stream")
    if not points or points[-1][0] != count:
        points.append((count, len(seen)))
    return GrowthCurve(tuple(points))


def ttr_at(tokens: Iterable[str], n: int) -> float:
    """Distinct types among the first ``n`` tokens, divided by ``n``.

    Longer streams are truncated rather than sampled.
    """
    if n < 1:
        raise LexStatsError("token budget must be >= 1")
    head = list(itertools.islice(tokens, n))
    if len(head) < n:
        raise LexStatsError(f"stream has {len(head)} tokens, fewer than the budget of {n}")
    return len(set(head)) / n
