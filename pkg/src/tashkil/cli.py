"""Command line: build-lexicon, train, diacritize, evaluate.

Exit codes: 0 success, 2 usage or bad configuration, 3 data error, 4 format error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .analyzer import View
from .codec import DEFAULT_DELIMITERS, iter_vowelized_sentences
from .decoder import Diacritizer
from .errors import DataError, FormatError, IoFailure, MarkConflict
from .lexicon import DEFAULT_CUTOFF, DEFAULT_MIN_COUNT, Lexicon, build_lexicon, read_lines
from .metrics import evaluate_corpus
from .model import DEFAULT_DELTA, load_bundle, save_bundle, train_bundle

log = logging.getLogger("tashkil")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FORMAT = 0, 2, 3, 4
ENCODINGS = {"utf-8": "utf-8", "utf8": "utf-8", "cp1256": "cp1256"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    model_choice: View = View.MODEL1
    smoothing_delta: float = DEFAULT_DELTA
    lexicon_cutoff: int = DEFAULT_CUTOFF
    candidate_min_count: int = DEFAULT_MIN_COUNT
    sentence_delimiters: str = DEFAULT_DELIMITERS
    encoding: str = "utf-8"
    split: float = 0.9

    def __post_init__(self):
        if not self.smoothing_delta > 0:
            raise UsageError(f"--delta must be > 0, got {self.smoothing_delta}")
        if self.lexicon_cutoff < 0:
            raise UsageError(f"--cutoff must be >= 0, got {self.lexicon_cutoff}")
        if self.candidate_min_count < 1:
            raise UsageError(f"--min-count must be >= 1, got {self.candidate_min_count}")
        if not 0.0 <= self.split <= 1.0:
            raise UsageError(f"--split must be within [0, 1], got {self.split}")
        if not self.sentence_delimiters:
            raise UsageError("--delimiters must not be empty")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        try:
            view = View.coerce(getattr(args, "model", "1"))
        except ValueError as exc:
            raise UsageError(f"--model must be 1 or 2, got {args.model!r}") from exc
        encoding = ENCODINGS.get(args.encoding.lower())
        if encoding is None:
            raise UsageError(f"--encoding must be utf-8 or cp1256, got {args.encoding!r}")
        return cls(
            model_choice=view,
            smoothing_delta=getattr(args, "delta", DEFAULT_DELTA),
            lexicon_cutoff=getattr(args, "cutoff", DEFAULT_CUTOFF),
            candidate_min_count=getattr(args, "min_count", DEFAULT_MIN_COUNT),
            sentence_delimiters=(DEFAULT_DELIMITERS if args.delimiters is None
                                 else args.delimiters.replace("\\n", "\n").replace("\\t", "\t")),
            encoding=encoding,
            split=getattr(args, "split", 0.9),
        )


def _write(path, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_vowelized(paths, config: RunConfig):
    """Parsed sentences with a ``file:line`` location each."""
    sentences, locations = [], []
    for path in paths:
        for lineno, line in enumerate(read_lines(path, config.encoding), start=1):
            try:
                for s in iter_vowelized_sentences(line, config.sentence_delimiters):
                    sentences.append(s)
                    locations.append(f"{path}:{lineno}")
            except MarkConflict as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return sentences, locations


def cmd_build_lexicon(args, config: RunConfig) -> int:
    corpora = [(str(p), read_lines(p, config.encoding)) for p in args.corpora]
    lexicon, report = build_lexicon(corpora, config.lexicon_cutoff, config.candidate_min_count)
    out = Path(args.output)
    lexicon.save(out)
    unresolved = Path(args.unresolved or f"{out}.unresolved.txt")
    _write(unresolved, "".join(f"{w}\n" for w in sorted(report.unresolved)))
    lines = [f"corpus\t{name}\ttokens={report.per_corpus_tokens[name]}\ttypes={report.per_corpus_types[name]}"
             for name, _ in corpora]
    lines += [
        f"cutoff\t{config.lexicon_cutoff}",
        f"min_count\t{config.candidate_min_count}",
        f"merged_words\t{report.merged_words}",
        f"entries\t{report.entries}",
        f"unresolved\t{len(report.unresolved)}",
        f"sha256\t{lexicon.content_hash()}",
    ]
    _write(args.log or f"{out}.log", "\n".join(lines) + "\n")
    log.info("lexicon: %d entries, %d unresolved -> %s", report.entries, len(report.unresolved), out)
    return EXIT_OK


def cmd_train(args, config: RunConfig) -> int:
    lexicon = Lexicon.load(args.lexicon)
    sentences, _ = read_vowelized(args.corpora, config)
    cut = int(round(len(sentences) * config.split))
    train, heldout = sentences[:cut], sentences[cut:]
    bundle = train_bundle(train, config.smoothing_delta, lexicon.content_hash())
    save_bundle(bundle, args.output)
    heldout_path = args.heldout or f"{args.output}.heldout.txt"
    _write(heldout_path, "".join(" ".join(w.surface for w in s) + "\n" for s in heldout))
    log.info("trained on %d sentences (%d held out) -> %s", len(train), len(heldout), args.output)
    return EXIT_OK


def _diacritizer(args, config: RunConfig) -> Diacritizer:
    bundle = load_bundle(args.bundle)
    lexicon = Lexicon.load(args.lexicon)
    if bundle.lexicon_ref and bundle.lexicon_ref != lexicon.content_hash():
        log.warning("lexicon %s differs from the one the bundle was trained with", args.lexicon)
    return Diacritizer(bundle, lexicon, config.model_choice, config.sentence_delimiters)


def cmd_diacritize(args, config: RunConfig) -> int:
    system = _diacritizer(args, config)
    if args.input in (None, "-"):
        raw, source = sys.stdin.buffer.read(), "stdin"
    else:
        try:
            raw, source = Path(args.input).read_bytes(), args.input
        except OSError as exc:
            raise IoFailure(f"cannot read {args.input}: {exc}") from exc
    try:
        text = raw.decode(config.encoding)
    except UnicodeDecodeError as exc:
        raise IoFailure(f"{source} is not valid {config.encoding}: {exc}") from exc
    out = system.diacritize_text(text)
    if args.output in (None, "-"):
        sys.stdout.buffer.write(out.encode("utf-8"))
        sys.stdout.flush()
    else:
        _write(args.output, out)
    return EXIT_OK


def cmd_evaluate(args, config: RunConfig) -> int:
    system = _diacritizer(args, config)
    refs, locations = read_vowelized([args.reference], config)
    report = evaluate_corpus(refs, system, skip_bare_ref=args.skip_bare_ref, locations=locations)
    label = "The first model" if config.model_choice is View.MODEL1 else "The second model"
    sys.stdout.write(report.to_table(label))
    sys.stdout.write("\n" + report.to_key_values())
    if args.report:
        _write(args.report, report.to_key_values())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tashkil", description="HMM-based Arabic diacritization")
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--encoding", default="utf-8", help="input encoding: utf-8 (default) or cp1256")
    common.add_argument("--delimiters", default=None,
                        help="sentence delimiter characters (backslash escapes allowed); default .،؟!:؛ and newline")
    common.add_argument("--seed", type=int, default=None, help="reserved; every command is deterministic")
    decode = argparse.ArgumentParser(add_help=False)
    decode.add_argument("--bundle", required=True, help="model bundle written by 'train'")
    decode.add_argument("--lexicon", required=True, help="lexicon TSV written by 'build-lexicon'")
    decode.add_argument("--model", default="1", help="1 (vowelized-word states) or 2 (pattern states)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-lexicon", parents=[common], help="build the frequent-word dictionary")
    p.add_argument("corpora", nargs="+", help="corpus text files")
    p.add_argument("-o", "--output", required=True, help="lexicon TSV to write")
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF, help="top-k words kept per corpus")
    p.add_argument("--min-count", type=int, default=DEFAULT_MIN_COUNT, help="minimum count of a vowelized form")
    p.add_argument("--unresolved", help="side file for words with no vowelized form (default OUTPUT.unresolved.txt)")
    p.add_argument("--log", help="build log (default OUTPUT.log)")
    p.set_defaults(func=cmd_build_lexicon)

    p = sub.add_parser("train", parents=[common], help="estimate the HMMs from diacritized text")
    p.add_argument("corpora", nargs="+", help="diacritized corpus files")
    p.add_argument("--lexicon", required=True)
    p.add_argument("-o", "--output", required=True, help="bundle file to write")
    p.add_argument("--split", type=float, default=0.9, help="fraction of sentences used for training")
    p.add_argument("--heldout", help="where to write held-out sentences (default OUTPUT.heldout.txt)")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="add-delta smoothing constant")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("diacritize", parents=[common, decode], help="diacritize text")
    p.add_argument("input", nargs="?", help="input file; '-' or omitted reads stdin")
    p.add_argument("-o", "--output", help="output file; '-' or omitted writes stdout")
    p.set_defaults(func=cmd_diacritize)

    p = sub.add_parser("evaluate", parents=[common, decode], help="WER/DER against a diacritized reference")
    p.add_argument("reference", help="diacritized reference file")
    p.add_argument("--skip-bare-ref", action="store_true", help="ignore reference words carrying no marks")
    p.add_argument("--report", help="also write the key=value report here")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = RunConfig.from_args(args)
        return args.func(args, config)
    except UsageError as exc:
        parser.error(str(exc))
    except FormatError as exc:
        print(f"tashkil: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DataError as exc:
        print(f"tashkil: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
