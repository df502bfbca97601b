"""First-order HMMs over sparse log-probability tables, their estimation and storage.

Three models share one representation:

* model 1: hidden = vowelized words, observed = unvowelized words, emissions
  are deterministic (1 when the hidden word strips to the observation, else 0);
* model 2: hidden = diacritic patterns, observed = unvowelized words;
* char model: hidden = single diacritic marks, observed = letters.

Rows are smoothed with add-delta. Each row stores the log-probability of every
seen successor plus a single UNK bucket; any unseen successor scores the UNK
bucket. Seen entries plus one UNK bucket sum to one.
"""
from __future__ import annotations

import hashlib
import io
import json
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .codec import VowelizedWord, pattern_key, strip_text
from .errors import CorruptTable, EmptyCorpus, FormatVersionMismatch, IoFailure, UnknownState

NEG_INF = float("-inf")
DEFAULT_DELTA = 0.1
FORMAT_VERSION = 1
MAGIC = b"TSKL"


class EmissionKind(int, Enum):
    SMOOTHED = 0
    DETERMINISTIC = 1  # b = 1 iff strip(state) == obs
    PATTERN = 2  # smoothed, zero for observations of another length


@dataclass
class Row:
    """One conditional distribution: seen targets plus an UNK bucket."""

    logp: dict[int, float] = field(default_factory=dict)
    unk: float = NEG_INF

    def get(self, j) -> float:
        if j is None:
            return self.unk
        return self.logp.get(j, self.unk)

    def total(self) -> float:
        return math.fsum(math.exp(v) for v in self.logp.values()) + math.exp(self.unk)

    @property
    def has_mass(self) -> bool:
        return bool(self.logp) or self.unk > NEG_INF


def smoothed_row(counts: Mapping[int, float], delta: float) -> Row:
    """Add-delta estimate over the seen targets plus one UNK bucket."""
    n = sum(counts.values())
    denom = n + delta * (len(counts) + 1)
    if denom <= 0:
        return Row()
    return Row(
        {j: math.log((c + delta) / denom) for j, c in counts.items()},
        math.log(delta / denom) if delta > 0 else NEG_INF,
    )


@dataclass
class HmmModel:
    name: str
    hidden: list[str]
    observations: list[str]
    initial: Row
    transitions: dict[int, Row]
    transition_backoff: Row
    emissions: dict[int, Row]
    emission_backoff: Row
    emission_kind: EmissionKind = EmissionKind.SMOOTHED
    delta: float = DEFAULT_DELTA
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        self.hidden_index = {s: i for i, s in enumerate(self.hidden)}
        self.obs_index = {o: k for k, o in enumerate(self.observations)}

    def __eq__(self, other):
        if not isinstance(other, HmmModel):
            return NotImplemented
        fields = ("name", "hidden", "observations", "initial", "transitions", "transition_backoff",
                  "emissions", "emission_backoff", "emission_kind", "delta", "format_version")
        return all(getattr(self, f) == getattr(other, f) for f in fields)

    @property
    def n_hidden(self) -> int:
        return len(self.hidden)

    @property
    def smoothing_params(self) -> dict:
        return {"method": "add-delta", "delta": self.delta, "unk_buckets": 1}

    def _state(self, state) -> int | None:
        i = self.hidden_index.get(state)
        if i is None and self.delta <= 0:
            raise UnknownState(state)
        return i

    def initial_logprob(self, state) -> float:
        return self.initial.get(self._state(state))

    def transition_logprob(self, frm, to) -> float:
        """log Pr(next hidden = ``to`` | hidden = ``frm``)."""
        i = self._state(frm)
        row = self.transitions.get(i, self.transition_backoff) if i is not None else self.transition_backoff
        return row.get(self._state(to))

    def emission_logprob(self, state, obs) -> float:
        """log Pr(observation = ``obs`` | hidden = ``state``)."""
        if self.emission_kind is EmissionKind.DETERMINISTIC:
            return 0.0 if strip_text(state) == obs else NEG_INF
        if self.emission_kind is EmissionKind.PATTERN and state.count("|") + 1 != len(obs):
            return NEG_INF
        i = self._state(state)
        row = self.emissions.get(i, self.emission_backoff) if i is not None else self.emission_backoff
        return row.get(self.obs_index.get(obs))

    def path_logprob(self, states: Sequence[str], observations: Sequence[str]) -> float:
        """Joint log-probability of a hidden path and its observations, straight from the tables."""
        score = self.initial_logprob(states[0]) + self.emission_logprob(states[0], observations[0])
        for t in range(1, len(states)):
            score += self.transition_logprob(states[t - 1], states[t])
            score += self.emission_logprob(states[t], observations[t])
        return score

    def rows(self):
        """Yield (label, Row) for every stored distribution."""
        yield "initial", self.initial
        yield "transition_backoff", self.transition_backoff
        for i, row in self.transitions.items():
            yield f"transition[{self.hidden[i]}]", row
        yield "emission_backoff", self.emission_backoff
        for i, row in self.emissions.items():
            yield f"emission[{self.hidden[i]}]", row

    def normalization_errors(self, tol: float = 1e-9) -> list[str]:
        return [
            f"{self.name}.{label} sums to {row.total()!r}"
            for label, row in self.rows()
            if row.has_mass and abs(row.total() - 1.0) > tol
        ]

    @classmethod
    def from_counts(
        cls,
        name: str,
        initial_counts: Mapping[str, float],
        transition_counts: Mapping[tuple[str, str], float],
        emission_counts: Mapping[tuple[str, str], float],
        delta: float = DEFAULT_DELTA,
        emission_kind: EmissionKind = EmissionKind.SMOOTHED,
    ) -> "HmmModel":
        if delta < 0:
            raise ValueError("delta must be >= 0")
        hidden = sorted(
            set(initial_counts)
            | {s for pair in transition_counts for s in pair}
            | {s for s, _ in emission_counts}
        )
        observations = sorted({o for _, o in emission_counts})
        hi = {s: i for i, s in enumerate(hidden)}
        oi = {o: k for k, o in enumerate(observations)}

        initial = smoothed_row({hi[s]: c for s, c in initial_counts.items()}, delta)

        by_source: dict[int, dict[int, float]] = {}
        successor_totals: Counter = Counter()
        for (a, b), c in transition_counts.items():
            by_source.setdefault(hi[a], {})[hi[b]] = c
            successor_totals[hi[b]] += c
        transitions = {i: smoothed_row(row, delta) for i, row in sorted(by_source.items())}
        transition_backoff = smoothed_row(successor_totals, delta)

        by_state: dict[int, dict[int, float]] = {}
        obs_totals: Counter = Counter()
        for (s, o), c in emission_counts.items():
            by_state.setdefault(hi[s], {})[oi[o]] = c
            obs_totals[oi[o]] += c
        if emission_kind is EmissionKind.DETERMINISTIC:
            emissions = {i: Row({k: 0.0 for k in row}, NEG_INF) for i, row in sorted(by_state.items())}
            emission_backoff = Row()
        else:
            emissions = {i: smoothed_row(row, delta) for i, row in sorted(by_state.items())}
            emission_backoff = smoothed_row(obs_totals, delta)

        return cls(name, hidden, observations, initial, transitions, transition_backoff,
                   emissions, emission_backoff, emission_kind, delta)


def _sentences(corpus) -> list[list[VowelizedWord]]:
    sentences = [list(s) for s in corpus if len(s)]
    if not sentences:
        raise EmptyCorpus("no sentences to estimate from")
    return sentences


def _sequence_counts(sequences: Iterable[Sequence[str]]):
    initial: Counter = Counter()
    transitions: Counter = Counter()
    for seq in sequences:
        initial[seq[0]] += 1
        transitions.update(zip(seq, seq[1:]))
    return initial, transitions


def estimate_model1(corpus: Iterable[Sequence[VowelizedWord]], delta: float = DEFAULT_DELTA) -> HmmModel:
    """Hidden states are vowelized words; emissions are 0/1."""
    sentences = _sentences(corpus)
    initial, transitions = _sequence_counts([w.surface for w in s] for s in sentences)
    emissions = Counter((w.surface, w.letters) for s in sentences for w in s)
    return HmmModel.from_counts("model1", initial, transitions, emissions, delta, EmissionKind.DETERMINISTIC)


def estimate_model2(corpus: Iterable[Sequence[VowelizedWord]], delta: float = DEFAULT_DELTA) -> HmmModel:
    """Hidden states are diacritic patterns; each emits the words it was seen on."""
    sentences = _sentences(corpus)
    initial, transitions = _sequence_counts([pattern_key(w.marks) for w in s] for s in sentences)
    emissions = Counter((pattern_key(w.marks), w.letters) for s in sentences for w in s)
    return HmmModel.from_counts("model2", initial, transitions, emissions, delta, EmissionKind.PATTERN)


def estimate_char_model(words: Iterable[VowelizedWord], delta: float = DEFAULT_DELTA) -> HmmModel:
    """Hidden states are per-letter marks chained within a word; letters are emitted."""
    initial: Counter = Counter()
    transitions: Counter = Counter()
    emissions: Counter = Counter()
    for w in words:
        codes = [m.value for m in w.marks]
        initial[codes[0]] += 1
        transitions.update(zip(codes, codes[1:]))
        emissions.update(zip(codes, w.letters))
    if not initial:
        raise EmptyCorpus("no words to estimate the character model from")
    return HmmModel.from_counts("char", initial, transitions, emissions, delta, EmissionKind.SMOOTHED)


@dataclass
class TrainedBundle:
    model1: HmmModel
    model2: HmmModel
    char_model: HmmModel
    lexicon_ref: str = ""
    corpus_stats: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def models(self) -> tuple[HmmModel, HmmModel, HmmModel]:
        return self.model1, self.model2, self.char_model

    def model(self, which) -> HmmModel:
        from .analyzer import View

        return self.model1 if View.coerce(which) is View.MODEL1 else self.model2


def train_bundle(corpus: Iterable[Sequence[VowelizedWord]], delta: float = DEFAULT_DELTA,
                 lexicon_ref: str = "") -> TrainedBundle:
    sentences = _sentences(corpus)
    words = [w for s in sentences for w in s]
    stats = {
        "sentences": len(sentences),
        "tokens": len(words),
        "types": len({w.letters for w in words}),
        "vowelized_types": len(set(words)),
    }
    return TrainedBundle(
        estimate_model1(sentences, delta),
        estimate_model2(sentences, delta),
        estimate_char_model(words, delta),
        lexicon_ref,
        stats,
    )


# --- binary bundle format -------------------------------------------------
#
# All integers little-endian. str = u32 byte length + UTF-8 bytes.
#
#   magic "TSKL" | u16 format_version | u16 n_models (3)
#   f64 delta | 64 bytes lexicon hash (ASCII hex, NUL padded) | str corpus_stats (JSON)
#   per model:
#     u16 format_version | str name | u8 emission_kind | f64 delta
#     u32 N, N x str hidden vocab | u32 M, M x str observation vocab
#     initial row | transition triplets | transition UNK list | transition backoff row
#     emission triplets | emission UNK list | emission backoff row
#   32 bytes SHA-256 of everything above
#
#   row       = f64 unk | u32 n | n x (u32 idx, f64 logp)
#   triplets  = u32 n | n x (u32 from_idx, u32 to_idx, f64 logp)
#   UNK list  = u32 n | n x (u32 from_idx, f64 unk)

_PAIR = np.dtype([("i", "<u4"), ("p", "<f8")])
_TRIPLET = np.dtype([("i", "<u4"), ("j", "<u4"), ("p", "<f8")])


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt, *values):
        self.buf.write(struct.pack("<" + fmt, *values))

    def str(self, s: str):
        data = s.encode("utf-8")
        self.pack("I", len(data))
        self.buf.write(data)

    def array(self, dtype, rows):
        arr = np.array(rows, dtype=dtype)
        self.pack("I", len(arr))
        self.buf.write(arr.tobytes())

    def row(self, row: Row):
        self.pack("d", row.unk)
        self.array(_PAIR, sorted(row.logp.items()))

    def table(self, rows: dict[int, Row]):
        self.array(_TRIPLET, [(i, j, p) for i in sorted(rows) for j, p in sorted(rows[i].logp.items())])
        self.array(_PAIR, [(i, rows[i].unk) for i in sorted(rows)])


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt):
        size = struct.calcsize("<" + fmt)
        if self.pos + size > len(self.data):
            raise CorruptTable("bundle is truncated")
        values = struct.unpack_from("<" + fmt, self.data, self.pos)
        self.pos += size
        return values if len(values) > 1 else values[0]

    def bytes(self, n):
        if self.pos + n > len(self.data):
            raise CorruptTable("bundle is truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def str(self) -> str:
        try:
            return self.bytes(self.unpack("I")).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptTable("invalid UTF-8 in bundle") from exc

    def array(self, dtype):
        n = self.unpack("I")
        return np.frombuffer(self.bytes(n * dtype.itemsize), dtype=dtype)

    def row(self) -> Row:
        unk = self.unpack("d")
        return Row({int(i): float(p) for i, p in self.array(_PAIR)}, float(unk))

    def table(self) -> dict[int, Row]:
        rows: dict[int, Row] = {}
        for i, j, p in self.array(_TRIPLET):
            rows.setdefault(int(i), Row()).logp[int(j)] = float(p)
        for i, unk in self.array(_PAIR):
            rows.setdefault(int(i), Row()).unk = float(unk)
        return rows


def _write_model(w: _Writer, m: HmmModel):
    w.pack("H", m.format_version)
    w.str(m.name)
    w.pack("Bd", int(m.emission_kind), m.delta)
    for vocab in (m.hidden, m.observations):
        w.pack("I", len(vocab))
        for s in vocab:
            w.str(s)
    w.row(m.initial)
    w.table(m.transitions)
    w.row(m.transition_backoff)
    w.table(m.emissions)
    w.row(m.emission_backoff)


def _read_model(r: _Reader) -> HmmModel:
    version = r.unpack("H")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"model format version {version}, expected {FORMAT_VERSION}")
    name = r.str()
    kind, delta = r.unpack("Bd")
    hidden = [r.str() for _ in range(r.unpack("I"))]
    observations = [r.str() for _ in range(r.unpack("I"))]
    initial = r.row()
    transitions = r.table()
    transition_backoff = r.row()
    emissions = r.table()
    emission_backoff = r.row()
    try:
        kind = EmissionKind(kind)
    except ValueError as exc:
        raise CorruptTable(f"unknown emission kind {kind}") from exc
    for rows, size in ((transitions, len(hidden)), (emissions, len(hidden))):
        if any(i >= size for i in rows):
            raise CorruptTable(f"{name}: row index out of range")
    return HmmModel(name, hidden, observations, initial, transitions, transition_backoff,
                    emissions, emission_backoff, kind, delta, version)


def bundle_to_bytes(bundle: TrainedBundle) -> bytes:
    w = _Writer()
    w.buf.write(MAGIC)
    w.pack("HH", bundle.format_version, 3)
    w.pack("d", bundle.model1.delta)
    w.buf.write(bundle.lexicon_ref.encode("ascii")[:64].ljust(64, b"\0"))
    w.str(json.dumps(bundle.corpus_stats, sort_keys=True))
    for m in bundle.models:
        _write_model(w, m)
    body = w.buf.getvalue()
    return body + hashlib.sha256(body).digest()


def bundle_from_bytes(data: bytes, tol: float = 1e-9) -> TrainedBundle:
    if len(data) < len(MAGIC) + 36 or data[:4] != MAGIC:
        raise CorruptTable("not a model bundle")
    r = _Reader(data)
    r.bytes(4)
    version, n_models = r.unpack("HH")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"bundle format version {version}, expected {FORMAT_VERSION}")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptTable("bundle checksum mismatch")
    if n_models != 3:
        raise CorruptTable(f"expected 3 models, found {n_models}")
    r.data = body
    r.unpack("d")
    lexicon_ref = r.bytes(64).rstrip(b"\0").decode("ascii", errors="replace")
    try:
        stats = json.loads(r.str())
    except json.JSONDecodeError as exc:
        raise CorruptTable("corpus stats are not JSON") from exc
    models = [_read_model(r) for _ in range(n_models)]
    if r.pos != len(body):
        raise CorruptTable("trailing bytes after the last model")
    problems = [p for m in models for p in m.normalization_errors(tol)]
    if problems:
        raise CorruptTable("; ".join(problems[:5]))
    return TrainedBundle(*models, lexicon_ref=lexicon_ref, corpus_stats=stats, format_version=version)


def save_bundle(bundle: TrainedBundle, path) -> None:
    try:
        Path(path).write_bytes(bundle_to_bytes(bundle))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_bundle(path) -> TrainedBundle:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return bundle_from_bytes(data)
