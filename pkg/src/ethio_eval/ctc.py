"""CTC likelihood, enumeration oracle and greedy decoding.

All probabilities live in natural-log space. ``-inf`` is the log of zero and
flows through :func:`logsumexp` without producing NaNs.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from .vocab import GraphemeVocab, TargetSequence

NEG_INF = float("-inf")
ROW_TOLERANCE = 1e-3
ENUMERATION_LIMIT = 10**7
MAGIC = b"CTCL"

Target = Union[TargetSequence, Sequence[int]]


class LogitsError(ValueError):
    pass


def logsumexp(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return NEG_INF
    m = values.max()
    if m == NEG_INF:
        return NEG_INF
    return float(m + np.log(np.exp(values - m).sum()))


def check_logits(logits) -> np.ndarray:
    """Validate a T x V log-probability matrix and return it as float64."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise LogitsError(f"expected a non-empty T x V matrix, got shape {arr.shape}")
    if np.isnan(arr).any() or np.isposinf(arr).any():
        raise LogitsError("log-probabilities must be finite or -inf")
    for t, row in enumerate(arr):
        norm = logsumexp(row)
        if not abs(norm) <= ROW_TOLERANCE:
            raise LogitsError(f"row {t} is not log-normalized (logsumexp = {norm:.6g})")
    return arr


def _target_ids(target: Target) -> List[int]:
    if isinstance(target, TargetSequence):
        return target.ids
    return [int(i) for i in target]


def min_frames(labels: Sequence[int]) -> int:
    """Shortest input that can emit ``labels``: one frame per label plus a
    blank between each adjacent repeat."""
    repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
    return len(labels) + repeats


def ctc_log_likelihood(logits, target: Target, blank_id: int = 0) -> float:
    """log P(target | logits) summed over all alignments (forward recursion)."""
    lp = check_logits(logits)
    labels = _target_ids(target)
    T, V = lp.shape
    for idx in labels:
        if not 0 <= idx < V:
            raise LogitsError(f"target id {idx} outside vocabulary of size {V}")
    if T < min_frames(labels):
        return NEG_INF

    ext = [blank_id]
    for idx in labels:
        ext += [idx, blank_id]
    S = len(ext)
    ext = np.array(ext)
    # s-2 transition allowed into a non-blank that differs from the label two back
    skip = np.zeros(S, dtype=bool)
    skip[2:] = (ext[2:] != blank_id) & (ext[2:] != ext[:-2])

    alpha = np.full(S, NEG_INF)
    alpha[0] = lp[0, ext[0]]
    if S > 1:
        alpha[1] = lp[0, ext[1]]
    with np.errstate(invalid="ignore"):
        for t in range(1, T):
            prev1 = np.concatenate(([NEG_INF], alpha))[:S]
            prev2 = np.where(skip, np.concatenate(([NEG_INF, NEG_INF], alpha))[:S], NEG_INF)
            acc = np.logaddexp(np.logaddexp(alpha, prev1), prev2)
            alpha = acc + lp[t, ext]
    total = logsumexp(alpha[-2:]) if S > 1 else float(alpha[-1])
    return min(total, 0.0) if total != NEG_INF else NEG_INF


def collapse_path(path: Sequence[int], blank_id: int = 0) -> List[int]:
    out = []
    prev = None
    for idx in path:
        if idx != prev and idx != blank_id:
            out.append(idx)
        prev = idx
    return out


def ctc_brute_force(logits, target: Target, blank_id: int = 0) -> float:
    """Enumerate every length-T path; test oracle for :func:`ctc_log_likelihood`."""
    lp = check_logits(logits)
    labels = _target_ids(target)
    T, V = lp.shape
    if V**T > ENUMERATION_LIMIT:
        raise ValueError(f"V^T = {V}^{T} exceeds the enumeration limit of {ENUMERATION_LIMIT}")
    if len(labels) > T:
        return NEG_INF
    matching = []
    for path in itertools.product(range(V), repeat=T):
        if collapse_path(path, blank_id) == labels:
            matching.append(math.fsum(lp[t, k] for t, k in enumerate(path)))
    total = logsumexp(matching)
    return min(total, 0.0)


@dataclass(frozen=True)
class GreedyResult:
    lang: Optional[str]
    text: str
    raw_ids: List[int]
    misplaced_lid: bool = False


def greedy_decode(logits, vocab: GraphemeVocab) -> GreedyResult:
    """Frame-wise argmax (lowest id wins ties), collapse, strip a leading LID."""
    lp = check_logits(logits)
    if lp.shape[1] != len(vocab):
        raise LogitsError(f"logits have {lp.shape[1]} columns, vocabulary has {len(vocab)} symbols")
    path = np.argmax(lp, axis=1).tolist()  # first maximal index on ties
    ids = collapse_path(path, vocab.blank_id)
    lid_ids = set(vocab.lid_ids.values())
    lang = None
    body = ids
    if ids and ids[0] in lid_ids:
        lang = vocab.lang_of(ids[0])
        body = ids[1:]
    misplaced = any(i in lid_ids for i in body)
    text = "".join(vocab.symbols[i] for i in body)
    return GreedyResult(lang, text, ids, misplaced)


def write_logits(path, logits, fmt: str = "binary") -> None:
    arr = np.asarray(logits, dtype=np.float64)
    T, V = arr.shape
    if fmt == "binary":
        with open(path, "wb") as f:
            f.write(MAGIC + struct.pack("<II", T, V))
            f.write(arr.astype("<f4").tobytes(order="C"))
    elif fmt == "text":
        lines = [f"{T} {V}"] + [" ".join(repr(float(x)) for x in row) for row in arr]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown logits format {fmt!r}")


def read_logits(path) -> np.ndarray:
    """Read either the ``CTCL`` binary layout or the whitespace text layout."""
    raw = Path(path).read_bytes()
    if raw[:4] == MAGIC:
        if len(raw) < 12:
            raise LogitsError("truncated CTCL header")
        T, V = struct.unpack("<II", raw[4:12])
        body = raw[12:]
        if len(body) != 4 * T * V:
            raise LogitsError(f"expected {T * V} float32 values, found {len(body) // 4}")
        return np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(T, V)
    lines = [ln.split() for ln in raw.decode("utf-8").splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise LogitsError("text logits must start with a 'T V' header line")
    T, V = int(lines[0][0]), int(lines[0][1])
    rows = lines[1:]
    if len(rows) != T or any(len(r) != V for r in rows):
        raise LogitsError(f"text logits do not match the declared {T} x {V} shape")
    return np.array([[float(x) for x in r] for r in rows], dtype=np.float64)
