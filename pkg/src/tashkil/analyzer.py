"""Out-of-context candidate generation and lattice construction."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence, runtime_checkable

from .codec import VowelizedWord, buckwalter_encode, pattern_key

log = logging.getLogger(__name__)


@runtime_checkable
class CandidateGenerator(Protocol):
    """Anything that proposes vowelizations for an unvowelized word.

    Implementations must be safe for concurrent read-only use.
    """

    def candidates(self, word: str) -> Sequence[VowelizedWord]: ...


class View(str, Enum):
    """Which hidden-state space a lattice is built in."""

    MODEL1 = "model1"  # vowelized words
    MODEL2 = "model2"  # diacritic patterns

    @classmethod
    def coerce(cls, value) -> "View":
        if isinstance(value, cls):
            return value
        if value in (1, "1"):
            return cls.MODEL1
        if value in (2, "2"):
            return cls.MODEL2
        return cls(value)


class CompositeGenerator:
    """Ask each generator in turn; the first non-empty answer wins.

    Put the lexicon first so frequent words never reach slower analyzers.
    """

    def __init__(self, generators: Sequence[CandidateGenerator]):
        self.generators = list(generators)

    def candidates(self, word):
        for gen in self.generators:
            found = analyze(gen, word)
            if found:
                return found
        return ()


def _bw_key(word: VowelizedWord) -> str:
    return buckwalter_encode(word.surface)


def analyze(gen: CandidateGenerator, word: str) -> tuple[VowelizedWord, ...]:
    """Candidates for ``word`` in deterministic (Buckwalter-lexicographic) order.

    An empty result marks the word as unanalyzed. Generator failures and
    candidates that do not strip back to ``word`` are logged and dropped.
    """
    try:
        raw = gen.candidates(word)
    except Exception:  # noqa: BLE001 - external analyzers must not abort decoding
        log.warning("candidate generator %r failed on %r", gen, word, exc_info=True)
        return ()
    kept = set()
    for cand in raw or ():
        if cand.letters == word:
            kept.add(cand)
        else:
            log.warning("dropping candidate %r: does not strip to %r", cand.surface, word)
    return tuple(sorted(kept, key=_bw_key))


@dataclass(frozen=True)
class LatticeColumn:
    word: str
    candidates: tuple  # VowelizedWord (model 1) or pattern tuples (model 2)
    analyzed: bool

    def __post_init__(self):
        if self.analyzed != bool(self.candidates):
            raise ValueError("a column is unanalyzed exactly when it has no candidates")


@dataclass(frozen=True)
class Lattice:
    columns: tuple[LatticeColumn, ...]
    view: View

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(col.word for col in self.columns)

    def __len__(self):
        return len(self.columns)

    def state_keys(self, i: int) -> list[str]:
        """Hidden-state keys of column ``i`` as the HMM tables index them."""
        return [state_key(c, self.view) for c in self.columns[i].candidates]

    def with_column(self, i: int, candidates: tuple) -> "Lattice":
        cols = list(self.columns)
        cols[i] = LatticeColumn(cols[i].word, candidates, analyzed=bool(candidates))
        return Lattice(tuple(cols), self.view)


def state_key(candidate, view: View) -> str:
    if view is View.MODEL1:
        return candidate.surface
    return pattern_key(candidate)


def project(candidates: Sequence[VowelizedWord], view: View) -> tuple:
    if view is View.MODEL1:
        return tuple(candidates)
    patterns = dict.fromkeys(c.marks for c in candidates)
    return tuple(patterns)


def build_lattice(gen: CandidateGenerator, words: Sequence[str], view=View.MODEL1) -> Lattice:
    """One column per word holding its out-of-context candidates.

    In the model-2 view candidates are projected to their diacritic patterns;
    duplicates collapse, keeping the first occurrence's position.
    """
    view = View.coerce(view)
    columns = []
    for word in words:
        cands = project(analyze(gen, word), view)
        columns.append(LatticeColumn(word, cands, analyzed=bool(cands)))
    return Lattice(tuple(columns), view)
