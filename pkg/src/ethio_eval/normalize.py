"""Script-aware text normalization for scoring and error analysis.

Two families of transforms live here. Evaluation normalization (punctuation
removal, Ge'ez homophone folding) is what scores are reported under. The
analytical collapses (vowel length, gemination) merge lexically distinct words
and are only meant for attributing errors, never for preparing training text.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from .vocab import GEEZ_LANGUAGES, LANGUAGES, LATIN_LANGUAGES

VOWELS = frozenset("aeiouAEIOU")
APOSTROPHES = "’‘ʼʻ´`"
ETHIOPIC_WORDSPACE = "፡"


class NormalizationError(ValueError):
    pass


def _data_text(name: str) -> str:
    return resources.files("ethio_eval").joinpath("data", name).read_text(encoding="utf-8")


def parse_homophone_map(text: str) -> Dict[str, str]:
    mapping: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise NormalizationError(f"homophone map line {lineno}: expected 'source<TAB>target'")
        src, dst = parts
        if src in mapping and mapping[src] != dst:
            raise NormalizationError(f"homophone map line {lineno}: {src!r} mapped twice")
        mapping[src] = dst
    validate_homophone_map(mapping)
    return mapping


def validate_homophone_map(mapping: Mapping[str, str]) -> None:
    for src, dst in mapping.items():
        if len(src) != 1 or len(dst) != 1:
            raise NormalizationError(f"homophone entries must be single graphemes: {src!r} -> {dst!r}")
        if dst in mapping and mapping[dst] != dst:
            raise NormalizationError(f"homophone map is not idempotent: {src!r} -> {dst!r} -> {mapping[dst]!r}")


def parse_digraphs(text: str) -> Tuple[str, ...]:
    digraphs = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(set(digraphs)) != len(digraphs):
        raise NormalizationError("duplicate digraph entries")
    for d in digraphs:
        if len(d) < 2 or not all("a" <= c <= "z" or "A" <= c <= "Z" for c in d):
            raise NormalizationError(f"digraph {d!r} must be two or more Latin letters")
    return tuple(digraphs)


def load_homophone_map(path) -> Dict[str, str]:
    return parse_homophone_map(Path(path).read_text(encoding="utf-8"))


def load_digraphs(path) -> Tuple[str, ...]:
    return parse_digraphs(Path(path).read_text(encoding="utf-8"))


DEFAULT_HOMOPHONES: Dict[str, str] = parse_homophone_map(_data_text("homophones.tsv"))
DEFAULT_DIGRAPHS: Tuple[str, ...] = parse_digraphs(_data_text("digraphs.txt"))


@dataclass(frozen=True)
class NormalizationConfig:
    remove_punctuation: bool = False
    fold_homophones: bool = False
    collapse_vowel_length: bool = False
    collapse_gemination: bool = False
    lowercase_latin: bool = True
    preserve_apostrophe: bool = True
    preserve_hyphen: bool = True
    digraphs: Tuple[str, ...] = DEFAULT_DIGRAPHS
    homophone_map: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_HOMOPHONES), hash=False)

    @classmethod
    def preset(cls, name: str, **overrides) -> "NormalizationConfig":
        """Named conditions used by the CLI ``--norm`` flag."""
        eval_flags = dict(remove_punctuation=True, fold_homophones=True, lowercase_latin=True)
        presets = {
            "none": {"lowercase_latin": False},
            "eval": eval_flags,
            "vowel": {**eval_flags, "collapse_vowel_length": True},
            "geminate": {**eval_flags, "collapse_gemination": True},
            "both": {**eval_flags, "collapse_vowel_length": True, "collapse_gemination": True},
            "full": {
                **eval_flags,
                "collapse_vowel_length": True,
                "collapse_gemination": True,
                "preserve_hyphen": False,
            },
        }
        if name not in presets:
            raise NormalizationError(f"unknown normalization preset {name!r}; choose from {sorted(presets)}")
        return replace(cls(), **{**presets[name], **overrides})


PRESETS = ("none", "eval", "vowel", "geminate", "both", "full")


def _is_latin_letter(ch: str) -> bool:
    return ch.isalpha() and "LATIN" in unicodedata.name(ch, "")


def lowercase_latin(text: str) -> str:
    out = []
    for ch in text:
        if _is_latin_letter(ch):
            low = ch.lower()
            out.append(low if len(low) == 1 else ch)
        else:
            out.append(ch)
    return "".join(out)


def remove_punct(text: str, config: NormalizationConfig = NormalizationConfig()) -> str:
    """Drop Ethiopic and Latin punctuation, keeping apostrophes (glottal stop)
    and hyphens when configured. Removed marks become spaces so that words
    joined only by punctuation stay separate; whitespace is then collapsed."""
    out = []
    for ch in text:
        if ch in APOSTROPHES:
            ch = "'"
        if ch == "'" and config.preserve_apostrophe:
            out.append(ch)
        elif ch == "-" and config.preserve_hyphen:
            out.append(ch)
        elif ch == ETHIOPIC_WORDSPACE:
            out.append(" ")
        elif unicodedata.category(ch).startswith("P"):
            out.append(" ")
        else:
            out.append(ch)
    return " ".join("".join(out).split())


def fold_homophones(text: str, mapping: Mapping[str, str] = DEFAULT_HOMOPHONES) -> str:
    return "".join(mapping.get(ch, ch) for ch in text)


def segment_units(text: str, digraphs: Sequence[str] = DEFAULT_DIGRAPHS) -> List[str]:
    """Split into orthographic units, matching digraphs longest-first at each
    position (case-insensitively) and falling back to single characters."""
    ordered = sorted(digraphs, key=len, reverse=True)
    units = []
    i = 0
    while i < len(text):
        for d in ordered:
            if text[i : i + len(d)].lower() == d.lower():
                units.append(text[i : i + len(d)])
                i += len(d)
                break
        else:
            units.append(text[i])
            i += 1
    return units


def _is_vowel_unit(unit: str) -> bool:
    return len(unit) == 1 and unit in VOWELS


def _is_consonant_unit(unit: str) -> bool:
    if len(unit) > 1:
        return True
    return unit.isascii() and unit.isalpha() and unit not in VOWELS


def _dedupe_runs(units: List[str], eligible) -> str:
    out: List[str] = []
    for u in units:
        if out and eligible(u) and u == out[-1]:
            continue
        out.append(u)
    return "".join(out)


def collapse_vowels(text: str, digraphs: Sequence[str] = DEFAULT_DIGRAPHS) -> str:
    """Shorten long vowels: ``hoomaa`` -> ``homa``."""
    return _dedupe_runs(segment_units(text, digraphs), _is_vowel_unit)


def collapse_geminates(text: str, digraphs: Sequence[str] = DEFAULT_DIGRAPHS) -> str:
    """Reduce doubled consonant units to one: ``sammuu`` -> ``samuu``,
    ``dhdh`` -> ``dh``. ``ddh`` segments as d + dh and is left alone."""
    return _dedupe_runs(segment_units(text, digraphs), _is_consonant_unit)


def apply_pipeline(text: str, lang: str, config: NormalizationConfig) -> str:
    if lang not in LANGUAGES:
        raise NormalizationError(f"unknown language code {lang!r}")
    text = unicodedata.normalize("NFC", text)
    if config.lowercase_latin:
        text = unicodedata.normalize("NFC", lowercase_latin(text))
    if config.remove_punctuation:
        text = remove_punct(text, config)
    if config.fold_homophones and lang in GEEZ_LANGUAGES:
        text = fold_homophones(text, config.homophone_map)
    if config.collapse_vowel_length and lang in LATIN_LANGUAGES:
        text = collapse_vowels(text, config.digraphs)
    if config.collapse_gemination and lang in LATIN_LANGUAGES:
        text = collapse_geminates(text, config.digraphs)
    return text


def tokenize(text: str) -> List[str]:
    """Words are maximal runs of non-whitespace."""
    return text.split()
