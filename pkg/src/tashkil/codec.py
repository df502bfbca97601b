"""Arabic letters, diacritic marks, Buckwalter transliteration and the word/pattern algebra.

Text is held internally as Unicode code points. Buckwalter is only used at the
edges (fixtures, debugging output, deterministic sort keys).
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .errors import LengthMismatch, MarkConflict, UnmappableChar

FATHATAN = "\u064b"
DAMMATAN = "\u064c"
KASRATAN = "\u064d"
FATHA = "\u064e"
DAMMA = "\u064f"
KASRA = "\u0650"
SHADDA = "\u0651"
SUKUN = "\u0652"
TATWEEL = "\u0640"

DIACRITIC_CHARS = frozenset(FATHATAN + DAMMATAN + KASRATAN + FATHA + DAMMA + KASRA + SHADDA + SUKUN)


class DiacriticMark(Enum):
    """The mark carried by one letter. Values are the Buckwalter spelling."""

    FATHA = "a"
    DAMMA = "u"
    KASRA = "i"
    FATHA_TANWEEN = "F"
    DAMMA_TANWEEN = "N"
    KASRA_TANWEEN = "K"
    SUKUUN = "o"
    SHADDA = "~"
    SHADDA_FATHA = "~a"
    SHADDA_DAMMA = "~u"
    SHADDA_KASRA = "~i"
    SHADDA_FATHA_TANWEEN = "~F"
    SHADDA_DAMMA_TANWEEN = "~N"
    SHADDA_KASRA_TANWEEN = "~K"
    NO_MARK = "#"

    @property
    def text(self) -> str:
        """Unicode rendering; shadda is written before the vowel it carries."""
        return _MARK_TEXT[self]

    @property
    def has_shadda(self) -> bool:
        return self.value.startswith("~")


_SINGLE_MARKS = {
    FATHA: DiacriticMark.FATHA,
    DAMMA: DiacriticMark.DAMMA,
    KASRA: DiacriticMark.KASRA,
    FATHATAN: DiacriticMark.FATHA_TANWEEN,
    DAMMATAN: DiacriticMark.DAMMA_TANWEEN,
    KASRATAN: DiacriticMark.KASRA_TANWEEN,
    SUKUN: DiacriticMark.SUKUUN,
    SHADDA: DiacriticMark.SHADDA,
}
_WITH_SHADDA = {
    DiacriticMark.FATHA: DiacriticMark.SHADDA_FATHA,
    DiacriticMark.DAMMA: DiacriticMark.SHADDA_DAMMA,
    DiacriticMark.KASRA: DiacriticMark.SHADDA_KASRA,
    DiacriticMark.FATHA_TANWEEN: DiacriticMark.SHADDA_FATHA_TANWEEN,
    DiacriticMark.DAMMA_TANWEEN: DiacriticMark.SHADDA_DAMMA_TANWEEN,
    DiacriticMark.KASRA_TANWEEN: DiacriticMark.SHADDA_KASRA_TANWEEN,
}
_MARK_TEXT = {mark: char for char, mark in _SINGLE_MARKS.items()}
_MARK_TEXT.update({compound: SHADDA + _MARK_TEXT[vowel] for vowel, compound in _WITH_SHADDA.items()})
_MARK_TEXT[DiacriticMark.NO_MARK] = ""

ALL_MARKS: tuple[DiacriticMark, ...] = tuple(DiacriticMark)
_MARK_BY_CODE = {mark.value: mark for mark in DiacriticMark}

Pattern = tuple  # tuple[DiacriticMark, ...]

# Standard Buckwalter, plus the four common extension letters. One ASCII
# character per code point so the mapping is a bijection.
BUCKWALTER = {
    "ء": "'", "آ": "|", "أ": ">", "ؤ": "&", "إ": "<",
    "ئ": "}", "ا": "A", "ب": "b", "ة": "p", "ت": "t",
    "ث": "v", "ج": "j", "ح": "H", "خ": "x", "د": "d",
    "ذ": "*", "ر": "r", "ز": "z", "س": "s", "ش": "$",
    "ص": "S", "ض": "D", "ط": "T", "ظ": "Z", "ع": "E",
    "غ": "g", "ـ": "_", "ف": "f", "ق": "q", "ك": "k",
    "ل": "l", "م": "m", "ن": "n", "ه": "h", "و": "w",
    "ى": "Y", "ي": "y",
    FATHATAN: "F", DAMMATAN: "N", KASRATAN: "K", FATHA: "a", DAMMA: "u",
    KASRA: "i", SHADDA: "~", SUKUN: "o",
    "\u0670": "`", "ٱ": "{",
    "پ": "P", "چ": "J", "ڤ": "V", "گ": "G",
}
BUCKWALTER_INVERSE = {v: k for k, v in BUCKWALTER.items()}

ARABIC_LETTERS = frozenset(ch for ch in BUCKWALTER if ch not in DIACRITIC_CHARS and ch not in (TATWEEL, "\u0670"))

DEFAULT_DELIMITERS = ".\u060c\u061f!:\u061b\n"

_letters_class = "".join(sorted(ARABIC_LETTERS))
_marks_class = "".join(sorted(DIACRITIC_CHARS))
_TOKEN_RE = re.compile(
    f"(?P<ar>[{_letters_class}][{_letters_class}{_marks_class}]*)|(?P<other>[^\\s{_letters_class}]+)"
)
_DROPPED_MARKS_RE = re.compile("[\u0610-\u061a\u0653-\u065f\u0670\u06d6-\u06dc\u06df-\u06e8\u06ea-\u06ed" + TATWEEL + "]")
_HAMZA_COMBINING = {
    "ا\u0653": "آ",
    "ا\u0654": "أ",
    "ا\u0655": "إ",
    "و\u0654": "ؤ",
    "ي\u0654": "ئ",
    "ى\u0654": "ئ",
}
_HAMZA_RE = re.compile("|".join(_HAMZA_COMBINING))
_PRESENTATION_RE = re.compile("[\ufb50-\ufdff\ufe70-\ufeff]")


def _unpresent(match: re.Match) -> str:
    ch = match.group()
    if ch == "\ufeff":
        return ch
    # isolated harakat forms decompose to "space + mark"
    return unicodedata.normalize("NFKC", ch).replace(" ", "")


def normalize_text(raw: str) -> str:
    """Canonicalize Arabic text: presentation forms, combining hamza, tatweel.

    The eight diacritic code points are kept. Quranic annotation signs and
    the superscript alef fall outside the 15-mark model and are removed.
    Non-Arabic material is left alone; :func:`tokenize` flags it.
    """
    text = _PRESENTATION_RE.sub(_unpresent, raw)
    text = _HAMZA_RE.sub(lambda m: _HAMZA_COMBINING[m.group()], text)
    return _DROPPED_MARKS_RE.sub("", text)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    is_arabic: bool


def tokenize(text: str) -> list[Token]:
    """Split normalized text into Arabic word tokens and flagged non-Arabic tokens."""
    return [
        Token(m.group(), m.start(), m.end(), m.lastgroup == "ar")
        for m in _TOKEN_RE.finditer(text)
    ]


@dataclass(frozen=True)
class Sentence:
    """A run of Arabic word tokens between two delimiters."""

    tokens: tuple[Token, ...]

    @property
    def words(self) -> tuple[str, ...]:
        """Diacritic-free word forms, the observation sequence."""
        return tuple(strip_text(t.text) for t in self.tokens)

    @property
    def source_span(self) -> tuple[int, int]:
        return self.tokens[0].start, self.tokens[-1].end

    def __len__(self):
        return len(self.tokens)


def segment(text: str, delimiters: str = DEFAULT_DELIMITERS) -> list[Sentence]:
    """Group the Arabic tokens of ``text`` into sentences.

    A sentence ends at any non-Arabic token or inter-token gap that contains a
    delimiter character. Sentences without Arabic words are dropped.
    """
    delims = set(delimiters)
    sentences: list[Sentence] = []
    current: list[Token] = []
    prev_end = 0

    def close():
        if current:
            sentences.append(Sentence(tuple(current)))
            current.clear()

    for tok in tokenize(text):
        if delims.intersection(text[prev_end:tok.start]):
            close()
        if tok.is_arabic:
            current.append(tok)
        elif delims.intersection(tok.text):
            close()
        prev_end = tok.end
    close()
    return sentences


def strip_text(text: str) -> str:
    """Remove the eight diacritic code points from arbitrary text."""
    return "".join(ch for ch in text if ch not in DIACRITIC_CHARS)


def is_arabic_word(text: str) -> bool:
    return bool(text) and text[0] in ARABIC_LETTERS and all(
        ch in ARABIC_LETTERS or ch in DIACRITIC_CHARS for ch in text
    )


@dataclass(frozen=True)
class VowelizedWord:
    """A word with exactly one mark per letter (``NO_MARK`` for a bare letter)."""

    letters: str
    marks: tuple[DiacriticMark, ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("a word needs at least one letter")
        if len(self.letters) != len(self.marks):
            raise LengthMismatch(len(self.letters), len(self.marks))
        if any(ch in DIACRITIC_CHARS for ch in self.letters):
            raise ValueError(f"letters contain diacritics: {self.letters!r}")

    @classmethod
    def parse(cls, text: str) -> "VowelizedWord":
        """Read a Unicode word, folding shadda + vowel into one compound mark."""
        letters: list[str] = []
        marks: list[DiacriticMark | None] = []
        for offset, ch in enumerate(text):
            mark = _SINGLE_MARKS.get(ch)
            if mark is None:
                letters.append(ch)
                marks.append(None)
                continue
            if not letters:
                raise MarkConflict(f"mark {mark.name} at offset {offset} of {text!r} has no letter")
            marks[-1] = _combine(marks[-1], mark, text)
        return cls("".join(letters), tuple(m or DiacriticMark.NO_MARK for m in marks))

    @classmethod
    def from_buckwalter(cls, ascii_text: str) -> "VowelizedWord":
        return cls.parse(buckwalter_decode(ascii_text))

    @property
    def surface(self) -> str:
        return "".join(letter + mark.text for letter, mark in zip(self.letters, self.marks))

    @property
    def buckwalter(self) -> str:
        return buckwalter_encode(self.surface)

    @property
    def pattern(self) -> Pattern:
        return self.marks

    def __str__(self):
        return self.surface

    def __len__(self):
        return len(self.letters)


def _combine(old, new, text):
    if old is None or old == new:
        return new
    if old is DiacriticMark.SHADDA and new in _WITH_SHADDA:
        return _WITH_SHADDA[new]
    if new is DiacriticMark.SHADDA and old in _WITH_SHADDA:
        return _WITH_SHADDA[old]
    if new is DiacriticMark.SHADDA and old.has_shadda:
        return old
    raise MarkConflict(f"marks {old.name} and {new.name} on one letter in {text!r}")


def strip_diacritics(word: VowelizedWord) -> str:
    return word.letters


def extract_pattern(word: VowelizedWord) -> Pattern:
    return word.marks


def apply_pattern(word: str, pattern: Sequence[DiacriticMark]) -> VowelizedWord:
    """Put one mark on each letter of ``word``.

    Raises LengthMismatch when the pattern was made for a word of another length.
    """
    if len(word) != len(pattern):
        raise LengthMismatch(len(word), len(pattern))
    return VowelizedWord(word, tuple(pattern))


def pattern_key(pattern: Iterable[DiacriticMark]) -> str:
    """Display/serialization form, e.g. ``a|o|i|u`` or ``a|#|a``."""
    return "|".join(mark.value for mark in pattern)


def parse_pattern_key(key: str) -> Pattern:
    try:
        return tuple(_MARK_BY_CODE[code] for code in key.split("|"))
    except KeyError as exc:
        raise ValueError(f"not a pattern key: {key!r}") from exc


def mark_from_code(code: str) -> DiacriticMark:
    return _MARK_BY_CODE[code]


def buckwalter_encode(arabic: str) -> str:
    """Transliterate Arabic to Buckwalter ASCII.

    Characters outside the table pass through unchanged unless they are
    themselves Buckwalter symbols, which would make decoding ambiguous.
    """
    out = []
    for offset, ch in enumerate(arabic):
        code = BUCKWALTER.get(ch)
        if code is not None:
            out.append(code)
        elif ch in BUCKWALTER_INVERSE:
            raise UnmappableChar(ch, offset, "encode")
        else:
            out.append(ch)
    return "".join(out)


def buckwalter_decode(ascii_text: str) -> str:
    out = []
    for offset, ch in enumerate(ascii_text):
        arabic = BUCKWALTER_INVERSE.get(ch)
        if arabic is not None:
            out.append(arabic)
        elif ch in BUCKWALTER:
            raise UnmappableChar(ch, offset, "decode")
        else:
            out.append(ch)
    return "".join(out)


def iter_vowelized_sentences(text: str, delimiters: str = DEFAULT_DELIMITERS) -> Iterator[list[VowelizedWord]]:
    """Parse every sentence of a diacritized text into VowelizedWords."""
    for sentence in segment(normalize_text(text), delimiters):
        yield [VowelizedWord.parse(tok.text) for tok in sentence.tokens]
