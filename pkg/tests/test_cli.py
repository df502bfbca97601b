import io
import random
import subprocess
import sys

import pytest

from tashkil.cli import main
from tashkil.codec import strip_text
from tashkil.model import EmissionKind, HmmModel, TrainedBundle, load_bundle, save_bundle

import dxl_corpus
from conftest import BW


def surface(bw_line: str) -> str:
    return " ".join(BW(w).surface for w in bw_line.split())


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("\n".join(surface(s) for s in dxl_corpus.TRAIN) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def trained(tmp_path, corpus):
    lex = tmp_path / "lex.tsv"
    bundle = tmp_path / "model.tskl"
    assert main(["build-lexicon", str(corpus), "-o", str(lex)]) == 0
    assert main(["train", str(corpus), "--lexicon", str(lex), "-o", str(bundle), "--split", "1.0"]) == 0
    return lex, bundle


def run_stdin(argv, data: bytes, monkeypatch, capsysbinary):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(data), encoding="utf-8"))
    code = main(argv)
    return code, capsysbinary.readouterr().out


# build-lexicon


def test_build_lexicon_requires_a_corpus(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["build-lexicon", "-o", str(tmp_path / "lex.tsv")])
    assert exc.value.code == 2


def test_build_lexicon_side_files_and_determinism(tmp_path, corpus):
    out1, out2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
    assert main(["build-lexicon", str(corpus), str(corpus), "-o", str(out1)]) == 0
    assert main(["build-lexicon", str(corpus), str(corpus), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    keys = [line.split("\t")[0] for line in out1.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
    assert len(keys) == len(set(keys))
    log = (tmp_path / "a.tsv.log").read_text(encoding="utf-8")
    assert log.count("corpus\t") == 2 and "sha256\t" in log
    assert (tmp_path / "a.tsv.unresolved.txt").exists()


def test_build_lexicon_missing_file(tmp_path):
    assert main(["build-lexicon", str(tmp_path / "nope.txt"), "-o", str(tmp_path / "lex.tsv")]) == 3


def test_cp1256_input(tmp_path):
    path = tmp_path / "cp.txt"
    path.write_bytes(("\n".join(surface(s) for s in dxl_corpus.TRAIN) + "\n").encode("cp1256"))
    lex = tmp_path / "lex.tsv"
    assert main(["build-lexicon", str(path), "-o", str(lex), "--encoding", "cp1256"]) == 0
    assert BW("daxala").letters in lex.read_text(encoding="utf-8")


# train


def test_train_normalized_bundle_and_heldout(tmp_path, corpus):
    lex = tmp_path / "lex.tsv"
    main(["build-lexicon", str(corpus), "-o", str(lex)])
    tiny = tmp_path / "tiny.txt"
    tiny.write_text("\n".join(surface(s) for s in dxl_corpus.TRAIN[:10]) + "\n", encoding="utf-8")
    assert main(["train", str(tiny), "--lexicon", str(lex), "-o", str(tmp_path / "m.tskl")]) == 0
    bundle = load_bundle(tmp_path / "m.tskl")
    assert all(not m.normalization_errors() for m in bundle.models)
    assert bundle.corpus_stats["sentences"] == 9
    assert len((tmp_path / "m.tskl.heldout.txt").read_text(encoding="utf-8").splitlines()) == 1

    assert main(["train", str(tiny), "--lexicon", str(lex), "-o", str(tmp_path / "all.tskl"), "--split", "1.0"]) == 0
    assert (tmp_path / "all.tskl.heldout.txt").read_text(encoding="utf-8") == ""


def test_train_is_order_independent(tmp_path, corpus, trained):
    lex, bundle = trained
    lines = corpus.read_text(encoding="utf-8").splitlines()
    random.Random(5).shuffle(lines)
    shuffled = tmp_path / "shuffled.txt"
    shuffled.write_text("\n".join(lines) + "\n", encoding="utf-8")
    other = tmp_path / "shuffled.tskl"
    assert main(["train", str(shuffled), "--lexicon", str(lex), "-o", str(other), "--split", "1.0"]) == 0
    assert load_bundle(other).models == load_bundle(bundle).models


def test_train_on_bare_text_is_a_data_error(tmp_path, trained):
    lex, _ = trained
    empty = tmp_path / "empty.txt"
    empty.write_text("\n\n", encoding="utf-8")
    assert main(["train", str(empty), "--lexicon", str(lex), "-o", str(tmp_path / "m.tskl")]) == 3


@pytest.mark.parametrize("flags", [["--delta", "0"], ["--split", "1.5"], ["--encoding", "latin-1"]])
def test_bad_config_is_a_usage_error(tmp_path, trained, flags):
    lex, _ = trained
    with pytest.raises(SystemExit) as exc:
        main(["train", str(tmp_path / "never-read.txt"), "--lexicon", str(lex), "-o", str(tmp_path / "m"), *flags])
    assert exc.value.code == 2


# diacritize


@pytest.mark.parametrize("model", ["1", "2", "model1", "model2"])
def test_diacritize_file_and_stdin_agree(tmp_path, trained, model, monkeypatch, capsysbinary):
    lex, bundle = trained
    text = "\n".join(strip_text(surface(s)) for s, _, _ in dxl_corpus.TEST) + "\n"
    src = tmp_path / "in.txt"
    src.write_text(text, encoding="utf-8")
    out = tmp_path / "out.txt"
    common = ["--bundle", str(bundle), "--lexicon", str(lex), "--model", model]
    assert main(["diacritize", str(src), "-o", str(out), *common]) == 0
    code, streamed = run_stdin(["diacritize", *common], text.encode("utf-8"), monkeypatch, capsysbinary)
    assert code == 0
    assert streamed == out.read_bytes()
    assert strip_text(out.read_text(encoding="utf-8")) == text
    assert BW("daxolN").surface in out.read_text(encoding="utf-8")


def test_diacritize_rejects_bad_model_flag(trained):
    lex, bundle = trained
    with pytest.raises(SystemExit) as exc:
        main(["diacritize", "--bundle", str(bundle), "--lexicon", str(lex), "--model", "3"])
    assert exc.value.code == 2


def test_format_errors(tmp_path, trained):
    lex, bundle = trained
    data = bytearray(bundle.read_bytes())
    bad_version = tmp_path / "v9.tskl"
    bad_version.write_bytes(bytes(data[:4]) + (9).to_bytes(2, "little") + bytes(data[6:]))
    tampered = tmp_path / "tampered.tskl"
    data[40] ^= 0xFF
    tampered.write_bytes(bytes(data))
    src = tmp_path / "in.txt"
    src.write_text("x\n", encoding="utf-8")
    for path in (bad_version, tampered):
        assert main(["diacritize", str(src), "--bundle", str(path), "--lexicon", str(lex)]) == 4


def test_entry_point_runs(tmp_path, trained):
    lex, bundle = trained
    proc = subprocess.run(
        [sys.executable, "-m", "tashkil.cli", "diacritize", "--bundle", str(bundle), "--lexicon", str(lex)],
        input=strip_text(surface("huwa daxala Alobayota")).encode("utf-8"),
        capture_output=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.decode("utf-8") == surface("huwa daxala Alobayota")


# evaluate


def randomized(bundle: TrainedBundle, seed: int) -> TrainedBundle:
    """Same vocabularies, random tables."""
    rnd = random.Random(seed)

    def shuffle_model(m: HmmModel) -> HmmModel:
        initial = {s: rnd.random() for s in m.hidden}
        transitions = {(a, b): rnd.random() for a in m.hidden for b in rnd.sample(m.hidden, min(3, len(m.hidden)))}
        if m.emission_kind is EmissionKind.DETERMINISTIC:
            emissions = {(s, strip_text(s)): 1 for s in m.hidden}
        else:
            emissions = {(s, o): rnd.random() for s in m.hidden for o in rnd.sample(m.observations, 2)}
        return HmmModel.from_counts(m.name, initial, transitions, emissions, m.delta, m.emission_kind)

    return TrainedBundle(*(shuffle_model(m) for m in bundle.models), bundle.lexicon_ref, bundle.corpus_stats)


def parse_report(text: str) -> dict:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_evaluate_trained_beats_random(tmp_path, corpus, trained, capsys):
    lex, bundle = trained
    noise = tmp_path / "random.tskl"
    save_bundle(randomized(load_bundle(bundle), 11), noise)
    reports = {}
    for name, path in (("trained", bundle), ("random", noise)):
        out = tmp_path / f"{name}.report"
        assert main(["evaluate", str(corpus), "--bundle", str(path), "--lexicon", str(lex), "--report", str(out)]) == 0
        printed = capsys.readouterr().out
        assert printed.splitlines()[0].split(" | ")[0].strip() == "Model"
        reports[name] = {k: float(v) for k, v in parse_report(out.read_text(encoding="utf-8")).items()}
    for rate in ("wer1", "wer2", "der1", "der2"):
        assert reports["trained"][rate] < reports["random"][rate], rate
    keys = list(parse_report((tmp_path / "trained.report").read_text(encoding="utf-8")))
    assert keys[:7] == ["words_evaluated", "chars_evaluated", "throughput_wps", "wer1", "wer2", "der1", "der2"]


def test_evaluate_bad_reference(tmp_path, trained, capsys):
    lex, bundle = trained
    common = ["--bundle", str(bundle), "--lexicon", str(lex)]
    assert main(["evaluate", str(tmp_path / "missing.txt"), *common]) == 3
    ref = tmp_path / "ref.txt"
    ref.write_text(surface("huwa daxala") + "\n" + "\u062f\u064e\u0650\u062e\n", encoding="utf-8")
    capsys.readouterr()
    assert main(["evaluate", str(ref), *common]) == 3
    assert f"{ref}:2" in capsys.readouterr().err
