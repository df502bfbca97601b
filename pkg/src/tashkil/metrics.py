"""Word and diacritic error rates, throughput and error attribution."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

from .analyzer import View
from .codec import DiacriticMark, VowelizedWord
from .errors import LetterMismatch


def _check_aligned(ref: VowelizedWord, hyp: VowelizedWord, location=None):
    if ref.letters != hyp.letters:
        raise LetterMismatch(ref.surface, hyp.surface, location)


def word_error(ref: VowelizedWord, hyp: VowelizedWord, ignore_final: bool = False) -> bool:
    """True when any compared mark differs (the last letter is skipped if ``ignore_final``)."""
    _check_aligned(ref, hyp)
    n = len(ref.marks) - 1 if ignore_final else len(ref.marks)
    return ref.marks[:n] != hyp.marks[:n]


def char_errors(ref: VowelizedWord, hyp: VowelizedWord, ignore_final: bool = False) -> tuple[int, int]:
    """(mismatched marks, compared positions)."""
    _check_aligned(ref, hyp)
    n = len(ref.marks) - 1 if ignore_final else len(ref.marks)
    return sum(a != b for a, b in zip(ref.marks[:n], hyp.marks[:n])), n


@dataclass
class ErrorCounts:
    """Additive tallies; merging partial counts is order-independent."""

    words: int = 0
    word_errors1: int = 0
    word_errors2: int = 0
    chars1: int = 0
    char_errors1: int = 0
    chars2: int = 0
    char_errors2: int = 0
    unanalyzed: int = 0
    right_solution_absent: int = 0
    viterbi_miss: int = 0
    unattributed: int = 0

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def add_word(self, ref: VowelizedWord, hyp: VowelizedWord, location=None) -> bool:
        _check_aligned(ref, hyp, location)
        self.words += 1
        wrong1 = word_error(ref, hyp)
        self.word_errors1 += wrong1
        self.word_errors2 += word_error(ref, hyp, ignore_final=True)
        for ignore_final, n_attr, e_attr in ((False, "chars1", "char_errors1"), (True, "chars2", "char_errors2")):
            bad, compared = char_errors(ref, hyp, ignore_final)
            setattr(self, n_attr, getattr(self, n_attr) + compared)
            setattr(self, e_attr, getattr(self, e_attr) + bad)
        return wrong1


def _rate(num, den):
    return num / den if den else 0.0


@dataclass
class EvalReport:
    wer1: float
    wer2: float
    der1: float
    der2: float
    words_evaluated: int
    chars_evaluated: int
    throughput_wps: float
    attribution: dict[str, float] | None
    counts: ErrorCounts = field(repr=False, default_factory=ErrorCounts)

    @classmethod
    def from_counts(cls, counts: ErrorCounts, seconds: float, decoded_words: int | None = None) -> "EvalReport":
        decoded = counts.words if decoded_words is None else decoded_words
        attributed = counts.unanalyzed + counts.right_solution_absent + counts.viterbi_miss
        attribution = None
        if counts.unattributed == 0:
            total = counts.word_errors1
            attribution = {
                "unanalyzed_pct": 100 * _rate(counts.unanalyzed, total),
                "right_solution_absent_pct": 100 * _rate(counts.right_solution_absent, total),
                "viterbi_miss_pct": 100 * _rate(counts.viterbi_miss, total),
            }
            assert attributed == total
        return cls(
            wer1=_rate(counts.word_errors1, counts.words),
            wer2=_rate(counts.word_errors2, counts.words),
            der1=_rate(counts.char_errors1, counts.chars1),
            der2=_rate(counts.char_errors2, counts.chars2),
            words_evaluated=counts.words,
            chars_evaluated=counts.chars1,
            throughput_wps=decoded / seconds if seconds > 0 else float("inf"),
            attribution=attribution,
            counts=counts,
        )

    def to_key_values(self) -> str:
        lines = [
            f"words_evaluated={self.words_evaluated}",
            f"chars_evaluated={self.chars_evaluated}",
            f"throughput_wps={self.throughput_wps:.2f}",
            f"wer1={self.wer1:.6f}",
            f"wer2={self.wer2:.6f}",
            f"der1={self.der1:.6f}",
            f"der2={self.der2:.6f}",
        ]
        if self.attribution is not None:
            lines += [f"{k}={v:.2f}" for k, v in self.attribution.items()]
        return "\n".join(lines) + "\n"

    def to_table(self, label: str = "model") -> str:
        header = ("Model", "Words/s", "WER1(%)", "WER2(%)", "DER1(%)", "DER2(%)")
        row = (label, f"{self.throughput_wps:.2f}", *(f"{100 * r:.2f}" for r in (self.wer1, self.wer2, self.der1, self.der2)))
        widths = [max(len(h), len(v)) for h, v in zip(header, row)]
        fmt = " | ".join(f"{{:<{w}}}" for w in widths)
        out = [fmt.format(*header), "-+-".join("-" * w for w in widths), fmt.format(*row)]
        if self.attribution is not None and self.counts.word_errors1:
            a = self.attribution
            out += [
                "",
                "Of the words wrong under WER1:",
                f"  unanalyzed by the candidate generator   {a['unanalyzed_pct']:6.2f}%",
                f"  right solution absent from candidates   {a['right_solution_absent_pct']:6.2f}%",
                f"  right solution present, Viterbi missed  {a['viterbi_miss_pct']:6.2f}%",
            ]
        return "\n".join(out) + "\n"


def _is_bare(word: VowelizedWord) -> bool:
    return all(m is DiacriticMark.NO_MARK for m in word.marks)


def _classify(counts: ErrorCounts, column, ref: VowelizedWord, view: View):
    if column is None:
        counts.unattributed += 1
    elif not column.analyzed:
        counts.unanalyzed += 1
    elif (ref if view is View.MODEL1 else ref.marks) not in column.candidates:
        counts.right_solution_absent += 1
    else:
        counts.viterbi_miss += 1


def evaluate_sentence(ref: Sequence[VowelizedWord], decoding, skip_bare_ref: bool = False,
                      location=None) -> ErrorCounts:
    counts = ErrorCounts()
    lattice = getattr(decoding, "lattice", None)
    hyps = decoding.words
    if len(hyps) != len(ref):
        raise LetterMismatch(" ".join(w.surface for w in ref), " ".join(w.surface for w in hyps), location)
    for i, (r, h) in enumerate(zip(ref, hyps)):
        if skip_bare_ref and _is_bare(r):
            continue
        loc = f"{location}:{i + 1}" if location else f"word {i + 1}"
        if counts.add_word(r, h, loc):
            column = lattice.columns[i] if lattice is not None else None
            _classify(counts, column, r, lattice.view if lattice is not None else View.MODEL1)
    return counts


def evaluate_corpus(ref_corpus: Iterable[Sequence[VowelizedWord]], system, skip_bare_ref: bool = False,
                    locations: Sequence[str] | None = None) -> EvalReport:
    """Score ``system`` against a diacritized reference corpus.

    ``system.decode_sentence(words)`` must return an object with ``words``
    (VowelizedWords) and, for error attribution, ``lattice``.
    """
    total = ErrorCounts()
    decoded = 0
    start = time.perf_counter()
    for n, ref in enumerate(ref_corpus):
        ref = list(ref)
        if not ref:
            continue
        decoding = system.decode_sentence([w.letters for w in ref])
        decoded += len(ref)
        loc = locations[n] if locations is not None else f"sentence {n + 1}"
        total = total + evaluate_sentence(ref, decoding, skip_bare_ref, loc)
    return EvalReport.from_counts(total, time.perf_counter() - start, decoded)
