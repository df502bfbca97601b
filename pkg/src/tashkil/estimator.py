"""scikit-learn style front end: ``fit`` on diacritized text, ``predict`` on bare text."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .analyzer import CandidateGenerator, CompositeGenerator, View
from .codec import DEFAULT_DELIMITERS, iter_vowelized_sentences
from .decoder import SentenceDecoding, decode_sentence, diacritize_text
from .lexicon import DEFAULT_CUTOFF, DEFAULT_MIN_COUNT, Lexicon, build_lexicon
from .metrics import EvalReport, evaluate_corpus
from .model import DEFAULT_DELTA, TrainedBundle, train_bundle


def check_texts(X, name="X") -> list[str]:
    """Validate a 1-d collection of documents and return it as a list of str."""
    if isinstance(X, (str, bytes)):
        raise TypeError(f"{name} must be an iterable of strings, not a single string")
    if isinstance(X, np.ndarray):
        if X.ndim != 1:
            raise ValueError(f"{name} must be 1-dimensional, got shape {X.shape}")
        X = X.tolist()
    try:
        texts = list(X)
    except TypeError as exc:
        raise TypeError(f"{name} must be an iterable of strings") from exc
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"{name}[{i}] is {type(t).__name__}, expected str")
    return texts


def check_params(model, delta, lexicon_cutoff, candidate_min_count) -> View:
    view = View.coerce(model)
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta!r}")
    if lexicon_cutoff is not None and lexicon_cutoff < 0:
        raise ValueError(f"lexicon_cutoff must be >= 0, got {lexicon_cutoff!r}")
    if candidate_min_count < 1:
        raise ValueError(f"candidate_min_count must be >= 1, got {candidate_min_count!r}")
    return view


class HMMDiacritizer(TransformerMixin, BaseEstimator):
    """Restore Arabic diacritics with a lexicon and a lattice-constrained HMM.

    Parameters
    ----------
    model : {"model1", "model2"}
        Hidden states are whole vowelized words ("model1") or diacritic
        patterns ("model2"). Both HMMs are always trained; this only picks
        the one used by ``predict``.
    delta : float
        Add-delta smoothing constant.
    lexicon_cutoff : int or None
        Most frequent words kept from the training text when no lexicon is given.
    candidate_min_count : int
        Times a vowelized form must be seen to become a candidate.
    lexicon : Lexicon, path or None
        Prebuilt dictionary. When None, one is built from the training text.
    extra_generators : list or None
        Analyzers consulted after the lexicon for words it does not cover.
    delimiters : str
        Sentence delimiter characters.
    """

    def __init__(self, model="model1", delta=DEFAULT_DELTA, lexicon_cutoff=DEFAULT_CUTOFF,
                 candidate_min_count=DEFAULT_MIN_COUNT, lexicon=None, extra_generators=None,
                 delimiters=DEFAULT_DELIMITERS):
        self.model = model
        self.delta = delta
        self.lexicon_cutoff = lexicon_cutoff
        self.candidate_min_count = candidate_min_count
        self.lexicon = lexicon
        self.extra_generators = extra_generators
        self.delimiters = delimiters

    def fit(self, X, y=None):
        """Train both HMMs and the character model on diacritized documents ``X``."""
        check_params(self.model, self.delta, self.lexicon_cutoff, self.candidate_min_count)
        texts = check_texts(X)
        sentences = [s for text in texts for s in iter_vowelized_sentences(text, self.delimiters)]
        if isinstance(self.lexicon, Lexicon):
            lexicon = self.lexicon
        elif self.lexicon is not None:
            lexicon = Lexicon.load(Path(self.lexicon))
        else:
            lexicon, _ = build_lexicon([("fit", texts)], self.lexicon_cutoff, self.candidate_min_count)
        self.lexicon_ = lexicon
        self.bundle_ = train_bundle(sentences, self.delta, lexicon.content_hash())
        self.n_sentences_ = len(sentences)
        return self

    @classmethod
    def from_bundle(cls, bundle: TrainedBundle, lexicon: Lexicon, **params) -> "HMMDiacritizer":
        """Wrap an already trained bundle without refitting."""
        est = cls(lexicon=lexicon, **params)
        est.lexicon_ = lexicon
        est.bundle_ = bundle
        est.n_sentences_ = bundle.corpus_stats.get("sentences", 0)
        return est

    @property
    def generator_(self) -> CandidateGenerator:
        check_is_fitted(self, "bundle_")
        if self.extra_generators:
            return CompositeGenerator([self.lexicon_, *self.extra_generators])
        return self.lexicon_

    def decode_sentence(self, words) -> SentenceDecoding:
        check_is_fitted(self, "bundle_")
        return decode_sentence(words, self.bundle_, self.generator_, View.coerce(self.model))

    def predict(self, X) -> list[str]:
        """Diacritized copy of every document in ``X``."""
        check_is_fitted(self, "bundle_")
        texts = check_texts(X)
        view = View.coerce(self.model)
        gen = self.generator_
        return [diacritize_text(t, self.bundle_, gen, view, self.delimiters) for t in texts]

    def transform(self, X) -> list[str]:
        return self.predict(X)

    def evaluate(self, X, skip_bare_ref=False) -> EvalReport:
        """WER/DER report against diacritized reference documents."""
        check_is_fitted(self, "bundle_")
        refs = [s for text in check_texts(X) for s in iter_vowelized_sentences(text, self.delimiters)]
        return evaluate_corpus(refs, self, skip_bare_ref=skip_bare_ref)

    def score(self, X, y=None) -> float:
        """Word accuracy (1 - WER1) on diacritized reference documents."""
        return 1.0 - self.evaluate(X).wer1
