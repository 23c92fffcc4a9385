"""Dual-script grapheme vocabulary with prepended language tokens."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

LANGUAGES: Tuple[str, ...] = ("AMH", "TIR", "ORM", "SID", "WAL")
GEEZ_LANGUAGES = frozenset({"AMH", "TIR"})
LATIN_LANGUAGES = frozenset({"ORM", "SID", "WAL"})

BLANK = "<blank>"
UNK = "<unk>"
SPACE = "<space>"  # on-disk spelling of " "


class VocabError(ValueError):
    pass


def lid_token(lang: str) -> str:
    return f"[{lang}]"


def _read_block(name: str) -> List[str]:
    text = resources.files("ethio_eval").joinpath("data", name).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        if not line:
            continue
        out.append(" " if line == SPACE else line)
    return out


@dataclass(frozen=True)
class VocabConfig:
    include_geez_core: bool = True
    include_ethiopic_punct_numerals: bool = True
    include_latin_letters: bool = True
    include_latin_punct_numerals: bool = True
    # with strict_unknowns, corpus graphemes outside the enabled blocks are an error
    strict_unknowns: bool = False
    include_unk: bool = False
    extra_symbols: Tuple[str, ...] = ()

    def blocks(self) -> List[str]:
        names = []
        if self.include_geez_core:
            names.append("geez_core.txt")
        if self.include_ethiopic_punct_numerals:
            names.append("ethiopic_punct_numerals.txt")
        if self.include_latin_letters:
            names.append("latin_letters.txt")
        if self.include_latin_punct_numerals:
            names.append("latin_punct_numerals.txt")
        return names


@dataclass(frozen=True)
class TargetSequence:
    lang_id: int
    grapheme_ids: Tuple[int, ...]

    @property
    def ids(self) -> List[int]:
        """Flat CTC target: language token followed by graphemes."""
        return [self.lang_id, *self.grapheme_ids]

    def __len__(self) -> int:
        return 1 + len(self.grapheme_ids)


@dataclass(frozen=True)
class GraphemeVocab:
    symbols: Tuple[str, ...]
    id_of: Dict[str, int] = field(repr=False)
    blank_id: int
    lid_ids: Dict[str, int]
    unk_id: Optional[int] = None

    @classmethod
    def from_symbols(cls, symbols: Sequence[str]) -> "GraphemeVocab":
        symbols = tuple(symbols)
        if not symbols or symbols[0] != BLANK:
            raise VocabError("symbol 0 must be the blank token")
        id_of: Dict[str, int] = {}
        for i, s in enumerate(symbols):
            if s == "":
                raise VocabError(f"empty symbol at id {i}")
            if s in id_of:
                raise VocabError(f"duplicate symbol {s!r} at ids {id_of[s]} and {i}")
            id_of[s] = i
        lid_ids = {lang: id_of[lid_token(lang)] for lang in LANGUAGES if lid_token(lang) in id_of}
        return cls(symbols, id_of, 0, lid_ids, id_of.get(UNK))

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def lang_of(self, idx: int) -> Optional[str]:
        for lang, i in self.lid_ids.items():
            if i == idx:
                return lang
        return None

    def is_special(self, idx: int) -> bool:
        return idx == self.blank_id or idx == self.unk_id or idx in self.lid_ids.values()

    def save(self, path) -> None:
        lines = [SPACE if s == " " else s for s in self.symbols]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "GraphemeVocab":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls.from_symbols([" " if s == SPACE else s for s in lines])


def build_vocab(
    config: VocabConfig = VocabConfig(),
    corpus_lines: Optional[Iterable[Tuple[str, str]]] = None,
) -> GraphemeVocab:
    """Blank at 0, the five LID tokens at 1-5, then block graphemes in
    code-point order, extras, corpus-observed graphemes, and ``<unk>`` last."""
    block_names = config.blocks()
    if not block_names and corpus_lines is None and not config.extra_symbols:
        raise VocabError("empty configuration: no script block, extra symbol or corpus")
    if len(set(config.extra_symbols)) != len(config.extra_symbols):
        raise VocabError("duplicate extra_symbols")

    symbols: List[str] = [BLANK] + [lid_token(lang) for lang in LANGUAGES]
    reserved = set(symbols) | {UNK}
    seen = set(symbols)
    for name in block_names:
        for g in sorted(_read_block(name)):
            if g not in seen:
                seen.add(g)
                symbols.append(g)
    for s in config.extra_symbols:
        if s == "" or s in reserved:
            raise VocabError(f"extra symbol {s!r} is empty or collides with a special token")
        if s not in seen:
            seen.add(s)
            symbols.append(s)

    if corpus_lines is not None:
        observed = set()
        for lineno, (lang, text) in enumerate(corpus_lines, 1):
            if lang not in LANGUAGES:
                raise VocabError(f"corpus line {lineno}: unknown language code {lang!r}")
            observed.update(unicodedata.normalize("NFC", text))
        new = sorted(observed - seen)
        if new and config.strict_unknowns:
            raise VocabError(f"corpus graphemes outside the enabled blocks: {''.join(new)!r}")
        symbols.extend(new)

    if config.include_unk:
        symbols.append(UNK)
    return GraphemeVocab.from_symbols(symbols)


def encode_target(text: str, lang: str, vocab: GraphemeVocab, strict: bool = True) -> TargetSequence:
    if lang not in vocab.lid_ids:
        raise VocabError(f"unknown language code {lang!r}")
    text = unicodedata.normalize("NFC", text)
    if not text:
        raise VocabError("empty text")
    ids = []
    for pos, ch in enumerate(text):
        idx = vocab.id_of.get(ch)
        if idx is None or vocab.is_special(idx):
            if strict:
                raise VocabError(f"unknown grapheme {ch!r} (U+{ord(ch):04X}) at position {pos}")
            if vocab.unk_id is None:
                raise VocabError(f"unknown grapheme {ch!r} and the vocabulary has no {UNK} entry")
            idx = vocab.unk_id
        ids.append(idx)
    return TargetSequence(vocab.lid_ids[lang], tuple(ids))


def decode_ids(ids: Sequence[int], vocab: GraphemeVocab) -> Tuple[Optional[str], str]:
    lid_by_id = {i: lang for lang, i in vocab.lid_ids.items()}
    lang = None
    chars = []
    for pos, idx in enumerate(ids):
        if not 0 <= idx < len(vocab):
            raise VocabError(f"id {idx} out of range for vocabulary of size {len(vocab)}")
        if idx == vocab.blank_id:
            raise VocabError(f"blank id at position {pos}")
        if idx in lid_by_id:
            if pos != 0:
                raise VocabError(f"LID token in non-initial position {pos}")
            lang = lid_by_id[idx]
            continue
        chars.append(vocab.symbols[idx])
    return lang, "".join(chars)
