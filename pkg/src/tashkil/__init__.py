"""Arabic diacritization with a frequent-word lexicon and lattice-constrained HMMs."""
from .analyzer import CandidateGenerator, CompositeGenerator, Lattice, LatticeColumn, View, analyze, build_lattice
from .codec import (
    DiacriticMark,
    Sentence,
    VowelizedWord,
    apply_pattern,
    buckwalter_decode,
    buckwalter_encode,
    extract_pattern,
    normalize_text,
    segment,
    strip_diacritics,
)
from .decoder import (
    DecodePath,
    Diacritizer,
    decode_fallback_word,
    decode_sentence,
    diacritize_sentence,
    diacritize_text,
    viterbi_decode,
)
from .estimator import HMMDiacritizer
from .lexicon import Lexicon, LexiconEntry, attach_vowelizations, build_lexicon, count_frequencies, merge_top_lists
from .metrics import EvalReport, char_errors, evaluate_corpus, word_error
from .model import (
    HmmModel,
    TrainedBundle,
    estimate_char_model,
    estimate_model1,
    estimate_model2,
    load_bundle,
    save_bundle,
    train_bundle,
)

__version__ = "0.1.0"
