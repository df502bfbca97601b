"""Dictionary of frequent words and their observed vowelizations."""
from __future__ import annotations

import hashlib
import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .codec import (
    DiacriticMark,
    VowelizedWord,
    buckwalter_encode,
    normalize_text,
    strip_text,
    tokenize,
)
from .errors import CorruptTable, FormatVersionMismatch, IoFailure, MarkConflict

log = logging.getLogger(__name__)

LEXICON_VERSION = 1
DEFAULT_CUTOFF = 5000
DEFAULT_MIN_COUNT = 2


def read_lines(path, encoding: str = "utf-8") -> list[str]:
    """Read a corpus file, mapping OS and decoding failures to IoFailure."""
    try:
        with open(path, encoding=encoding) as fh:
            return fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _arabic_tokens(lines: Iterable[str]):
    try:
        for line in lines:
            for tok in tokenize(normalize_text(line)):
                if tok.is_arabic:
                    yield tok.text
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(str(exc)) from exc


def count_frequencies(corpus: Iterable[str]) -> Counter:
    """Count Arabic tokens by their diacritic-free form."""
    return Counter(strip_text(tok) for tok in _arabic_tokens(corpus))


def _ranked(counts) -> list[tuple[str, int]]:
    if isinstance(counts, Mapping):
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return list(counts)


def merge_top_lists(per_corpus_lists: Sequence, cutoff: int | None) -> set[str]:
    """Union of the ``cutoff`` most frequent words of each list.

    Lists may be (word, count) pairs already sorted by decreasing count, or
    count mappings (ranked by count, ties by word). ``cutoff=None`` keeps every word.
    """
    if cutoff is not None and cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    merged: set[str] = set()
    for ranked in map(_ranked, per_corpus_lists):
        top = ranked if cutoff is None else ranked[:cutoff]
        merged.update(strip_text(word) for word, _ in top)
    return merged


def _sort_key(word: VowelizedWord) -> str:
    return buckwalter_encode(word.surface)


@dataclass(frozen=True)
class LexiconEntry:
    key: str
    candidates: tuple[VowelizedWord, ...]
    total_count: int = 0

    def __post_init__(self):
        if not self.candidates:
            raise ValueError(f"entry {self.key!r} has no candidates")
        for cand in self.candidates:
            if cand.letters != self.key:
                raise ValueError(f"candidate {cand.surface!r} does not strip to {self.key!r}")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError(f"entry {self.key!r} has duplicate candidates")


@dataclass
class Lexicon:
    """Immutable-by-convention map from unvowelized word to candidate vowelizations.

    Also serves as the default candidate generator (see :mod:`tashkil.analyzer`).
    """

    entries: dict[str, LexiconEntry] = field(default_factory=dict)
    provenance: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def lookup(self, word: str) -> tuple[VowelizedWord, ...] | None:
        entry = self.entries.get(word)
        return None if entry is None else entry.candidates

    def candidates(self, word: str) -> tuple[VowelizedWord, ...]:
        return self.lookup(word) or ()

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"#version {LEXICON_VERSION}\n")
        for source in self.provenance:
            buf.write(f"#source\t{source}\n")
        for key in sorted(self.entries):
            entry = self.entries[key]
            cands = "|".join(c.surface for c in entry.candidates)
            buf.write(f"{key}\t{entry.total_count}\t{cands}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "Lexicon":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#version "):
            raise CorruptTable("lexicon file lacks a '#version' header")
        version = lines[0].split(maxsplit=1)[1].strip()
        if version != str(LEXICON_VERSION):
            raise FormatVersionMismatch(f"lexicon version {version}, expected {LEXICON_VERSION}")
        lex = cls()
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            if line.startswith("#source\t"):
                lex.provenance.append(line.split("\t", 1)[1])
                continue
            if line.startswith("#"):
                continue
            try:
                key, count, cands = line.split("\t")
                candidates = tuple(VowelizedWord.parse(c) for c in cands.split("|"))
                lex.entries[key] = LexiconEntry(key, candidates, int(count))
            except ValueError as exc:
                raise CorruptTable(f"lexicon line {lineno}: {exc}") from exc
        return lex

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Lexicon":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise IoFailure(f"cannot read lexicon {path}: {exc}") from exc
        return cls.from_text(text)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _is_bare(word: VowelizedWord) -> bool:
    return all(m is DiacriticMark.NO_MARK for m in word.marks)


def count_vowelizations(corpora: Iterable[Iterable[str]]) -> Counter:
    """Count (key, vowelized form) pairs over diacritized corpora.

    Tokens carrying no mark at all say nothing about vowelization and are
    skipped, as are tokens with conflicting marks.
    """
    counts: Counter = Counter()
    skipped = 0
    for corpus in corpora:
        for tok in _arabic_tokens(corpus):
            try:
                word = VowelizedWord.parse(tok)
            except MarkConflict:
                skipped += 1
                continue
            if not _is_bare(word):
                counts[word] += 1
    if skipped:
        log.info("skipped %d tokens with conflicting marks", skipped)
    return counts


def attach_vowelizations(
    words: Iterable[str],
    vowelized_corpora: Iterable[Iterable[str]],
    min_count: int = DEFAULT_MIN_COUNT,
    frequencies: Mapping[str, int] | None = None,
    provenance: Sequence[str] = (),
) -> tuple[Lexicon, set[str]]:
    """Give each word the distinct vowelized forms seen for it in the corpora.

    Returns the lexicon and the words left without any candidate. A form must
    be seen at least ``min_count`` times to be kept.
    """
    wanted = set(words)
    form_counts = count_vowelizations(vowelized_corpora)
    by_key: dict[str, list[VowelizedWord]] = {}
    seen: Counter = Counter()
    for word, n in form_counts.items():
        if word.letters not in wanted:
            continue
        seen[word.letters] += n
        if n >= min_count:
            by_key.setdefault(word.letters, []).append(word)
    lex = Lexicon(provenance=list(provenance))
    for key in sorted(by_key):
        cands = tuple(sorted(by_key[key], key=_sort_key))
        total = frequencies[key] if frequencies is not None and key in frequencies else seen[key]
        lex.entries[key] = LexiconEntry(key, cands, total)
    unresolved = wanted - lex.entries.keys()
    return lex, unresolved


@dataclass
class BuildReport:
    per_corpus_tokens: dict[str, int]
    per_corpus_types: dict[str, int]
    merged_words: int
    entries: int
    unresolved: set[str]


def build_lexicon(
    corpora: Sequence[tuple[str, Sequence[str]]],
    cutoff: int | None = DEFAULT_CUTOFF,
    min_count: int = DEFAULT_MIN_COUNT,
) -> tuple[Lexicon, BuildReport]:
    """Full dictionary build from named corpora.

    Frequencies are ranked per corpus, the top lists merged, and candidates
    collected from every corpus that carries diacritics.
    """
    per_corpus = []
    totals: Counter = Counter()
    for _, lines in corpora:
        counts = count_frequencies(lines)
        per_corpus.append(counts)
        totals.update(counts)
    words = merge_top_lists(per_corpus, cutoff)
    lex, unresolved = attach_vowelizations(
        words,
        [lines for _, lines in corpora],
        min_count=min_count,
        frequencies=totals,
        provenance=[name for name, _ in corpora],
    )
    report = BuildReport(
        per_corpus_tokens={name: sum(c.values()) for (name, _), c in zip(corpora, per_corpus)},
        per_corpus_types={name: len(c) for (name, _), c in zip(corpora, per_corpus)},
        merged_words=len(words),
        entries=len(lex),
        unresolved=unresolved,
    )
    return lex, report
