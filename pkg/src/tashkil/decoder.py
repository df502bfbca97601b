"""Lattice-constrained Viterbi decoding and the diacritization pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .analyzer import CandidateGenerator, Lattice, LatticeColumn, View, build_lattice
from .codec import ALL_MARKS, DEFAULT_DELIMITERS, VowelizedWord, apply_pattern, mark_from_code, normalize_text, segment
from .errors import AllPathsImpossible, EmptyColumn
from .model import NEG_INF, HmmModel, TrainedBundle


class Origin(str, Enum):
    LATTICE = "lattice"
    FALLBACK = "fallback"
    PASSTHROUGH = "passthrough"


@dataclass(frozen=True)
class DecodePath:
    states: tuple  # one candidate per column
    indices: tuple[int, ...]  # position of each state inside its column
    score: float
    origins: tuple[Origin, ...]


def viterbi(observations: Sequence[str], columns: Sequence[Sequence[str]], model: HmmModel):
    """Best hidden path restricted to ``columns[t]`` at each step.

    Returns ``(indices, score)`` where ``indices[t]`` points into ``columns[t]``.
    Ties go to the earliest candidate of a column.
    """
    if len(observations) != len(columns):
        raise ValueError("one column per observation")
    if not columns:
        return (), 0.0
    for t, col in enumerate(columns):
        if not col:
            raise EmptyColumn(f"column {t} ({observations[t]!r}) has no candidates")

    phi = [model.initial_logprob(s) + model.emission_logprob(s, observations[0]) for s in columns[0]]
    backpointers = []
    for t in range(1, len(columns)):
        prev, cur, obs = columns[t - 1], columns[t], observations[t]
        new_phi = []
        psi = []
        for s in cur:
            best, arg = NEG_INF, 0
            for j, p in enumerate(prev):
                v = phi[j] + model.transition_logprob(p, s)
                if v > best:
                    best, arg = v, j
            new_phi.append(best + model.emission_logprob(s, obs))
            psi.append(arg)
        phi = new_phi
        backpointers.append(psi)

    last, score = 0, NEG_INF
    for k, v in enumerate(phi):
        if v > score:
            last, score = k, v
    if score == NEG_INF or math.isnan(score):
        raise AllPathsImpossible(f"no path with non-zero probability for {list(observations)}")

    path = [last]
    for psi in reversed(backpointers):
        path.append(psi[path[-1]])
    path.reverse()
    return tuple(path), score


def viterbi_decode(lattice: Lattice, model: HmmModel, origins: Sequence[Origin] | None = None) -> DecodePath:
    keys = [lattice.state_keys(i) for i in range(len(lattice))]
    indices, score = viterbi(lattice.words, keys, model)
    states = tuple(col.candidates[k] for col, k in zip(lattice.columns, indices))
    if origins is None:
        origins = (Origin.LATTICE,) * len(states)
    return DecodePath(states, indices, score, tuple(origins))


_MARK_CODES = [m.value for m in ALL_MARKS]


def decode_fallback_word(word: str, char_model: HmmModel) -> VowelizedWord:
    """Vowelize one word letter by letter with the character model, all 15 marks allowed."""
    if not word:
        raise ValueError("cannot vowelize an empty word")
    indices, _ = viterbi(list(word), [_MARK_CODES] * len(word), char_model)
    return VowelizedWord(word, tuple(mark_from_code(_MARK_CODES[k]) for k in indices))


@dataclass(frozen=True)
class SentenceDecoding:
    """Decoder output for one sentence, with the lattice kept for error attribution."""

    words: tuple[VowelizedWord, ...]
    lattice: Lattice  # before fallback filling; unanalyzed columns are empty
    path: DecodePath


def decode_sentence(words: Sequence[str], bundle: TrainedBundle, gen: CandidateGenerator,
                    which=View.MODEL1) -> SentenceDecoding:
    view = View.coerce(which)
    lattice = build_lattice(gen, words, view)
    columns = []
    origins = []
    for col in lattice.columns:
        if col.analyzed:
            columns.append(col)
            origins.append(Origin.LATTICE)
            continue
        guess = decode_fallback_word(col.word, bundle.char_model)
        cand = guess if view is View.MODEL1 else guess.marks
        columns.append(LatticeColumn(col.word, (cand,), analyzed=True))
        origins.append(Origin.FALLBACK)
    filled = Lattice(tuple(columns), view)
    path = viterbi_decode(filled, bundle.model(view), origins)
    if view is View.MODEL1:
        out = path.states
    else:
        out = tuple(apply_pattern(w, p) for w, p in zip(lattice.words, path.states))
    return SentenceDecoding(tuple(out), lattice, path)


def diacritize_sentence(words: Sequence[str], bundle: TrainedBundle, gen: CandidateGenerator,
                        which=View.MODEL1) -> list[VowelizedWord]:
    if not words:
        return []
    return list(decode_sentence(words, bundle, gen, which).words)


def diacritize_text(text: str, bundle: TrainedBundle, gen: CandidateGenerator, which=View.MODEL1,
                    delimiters: str = DEFAULT_DELIMITERS) -> str:
    """Diacritize every Arabic word of ``text``; everything else is copied through.

    Any diacritics already present in the input are replaced.
    """
    norm = normalize_text(text)
    pieces = []
    pos = 0
    for sentence in segment(norm, delimiters):
        for tok, word in zip(sentence.tokens, diacritize_sentence(sentence.words, bundle, gen, which)):
            pieces.append(norm[pos:tok.start])
            pieces.append(word.surface)
            pos = tok.end
    pieces.append(norm[pos:])
    return "".join(pieces)


class Diacritizer:
    """A trained bundle, a candidate generator and a model choice, bound together."""

    def __init__(self, bundle: TrainedBundle, generator: CandidateGenerator, which=View.MODEL1,
                 delimiters: str = DEFAULT_DELIMITERS):
        self.bundle = bundle
        self.generator = generator
        self.view = View.coerce(which)
        self.delimiters = delimiters

    def decode_sentence(self, words: Sequence[str]) -> SentenceDecoding:
        return decode_sentence(words, self.bundle, self.generator, self.view)

    def diacritize_text(self, text: str) -> str:
        return diacritize_text(text, self.bundle, self.generator, self.view, self.delimiters)
