import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tashkil import HMMDiacritizer
from tashkil.codec import strip_text
from tashkil.estimator import check_texts
from tashkil.lexicon import Lexicon

import dxl_corpus
from conftest import BW


def surface(bw_line: str) -> str:
    return " ".join(BW(w).surface for w in bw_line.split())


DOCS = [surface(s) for s in dxl_corpus.TRAIN]


@pytest.fixture(scope="module")
def fitted():
    return HMMDiacritizer().fit(DOCS)


def test_params_round_trip():
    est = HMMDiacritizer(model="model2", delta=0.5)
    params = est.get_params()
    assert params["model"] == "model2" and params["delta"] == 0.5
    est.set_params(delta=0.2)
    assert est.delta == 0.2
    copy = clone(est)
    assert copy.get_params() == est.get_params()


def test_not_fitted():
    with pytest.raises(NotFittedError):
        HMMDiacritizer().predict(["x"])


def test_fit_predict(fitted):
    bare = [strip_text(surface(s)) for s, _, _ in dxl_corpus.TEST]
    out = fitted.predict(bare)
    assert len(out) == len(bare)
    assert [strip_text(t) for t in out] == bare
    assert out[1] == surface("man daxala Alobayota")
    assert fitted.transform(bare) == out
    assert fitted.n_sentences_ == len(dxl_corpus.TRAIN)


def test_switching_model_needs_no_refit(fitted):
    est = clone(fitted).set_params(model="model2")
    est.lexicon_, est.bundle_, est.n_sentences_ = fitted.lexicon_, fitted.bundle_, fitted.n_sentences_
    assert est.predict([strip_text(surface("lahu daxolN kabiyrN"))]) == [surface("lahu daxolN kabiyrN")]


def test_score_and_evaluate(fitted):
    refs = [surface(s) for s, _, _ in dxl_corpus.TEST]
    report = fitted.evaluate(refs)
    assert report.words_evaluated == sum(len(s.split()) for s, _, _ in dxl_corpus.TEST)
    assert fitted.score(refs) == pytest.approx(1 - report.wer1)
    assert 0.0 <= report.wer2 <= report.wer1


def test_prebuilt_lexicon(tmp_path, fitted):
    path = tmp_path / "lex.tsv"
    fitted.lexicon_.save(path)
    est = HMMDiacritizer(lexicon=str(path)).fit(DOCS)
    assert est.lexicon_.content_hash() == fitted.lexicon_.content_hash()
    assert est.bundle_.lexicon_ref == fitted.bundle_.lexicon_ref
    est2 = HMMDiacritizer(lexicon=Lexicon.load(path)).fit(DOCS)
    assert est2.predict(["abc"]) == ["abc"]


def test_extra_generator_covers_unknown_words(fitted):
    class Fixed:
        def candidates(self, word):
            return (BW("kitaAbN"),) if word == BW("kitaAbN").letters else ()

    est = HMMDiacritizer(extra_generators=[Fixed()]).fit(DOCS)
    assert est.predict([BW("kitaAbN").letters]) == [BW("kitaAbN").surface]


@pytest.mark.parametrize("bad", ["one string", [1, 2], np.array([["a"]])])
def test_check_texts_rejects(bad):
    with pytest.raises((TypeError, ValueError)):
        check_texts(bad)


def test_check_texts_accepts_arrays():
    assert check_texts(np.array(["a", "b"])) == ["a", "b"]
    assert check_texts(("a",)) == ["a"]


@pytest.mark.parametrize("params", [{"delta": 0}, {"model": "model3"}, {"lexicon_cutoff": -1},
                                    {"candidate_min_count": 0}])
def test_bad_params(params):
    with pytest.raises(ValueError):
        HMMDiacritizer(**params).fit(DOCS)
