import math
import random

import pytest

from tashkil.codec import VowelizedWord, buckwalter_decode

BW = VowelizedWord.from_buckwalter


def bw_sentence(text: str) -> list[VowelizedWord]:
    return [BW(tok) for tok in text.split()]


def arabic(bw_text: str) -> str:
    return buckwalter_decode(bw_text)


@pytest.fixture
def rng():
    return random.Random(1234)


def random_row(rnd, targets, unk=True):
    """Random distribution over ``targets`` (indices) plus, optionally, an UNK bucket."""
    from tashkil.model import NEG_INF, Row

    weights = [rnd.random() + 1e-3 for _ in range(len(targets) + unk)]
    total = sum(weights)
    logp = {j: math.log(w / total) for j, w in zip(targets, weights)}
    return Row(logp, math.log(weights[-1] / total) if unk else NEG_INF)


def random_model(rnd, hidden, observations, sparsity=0.5):
    """A normalized smoothed HMM with random sparse tables over the given vocabularies."""
    from tashkil.model import EmissionKind, HmmModel

    n, m = len(hidden), len(observations)

    def subset(size):
        return sorted(j for j in range(size) if rnd.random() > sparsity)

    transitions = {i: random_row(rnd, subset(n)) for i in range(n) if rnd.random() > 0.1}
    emissions = {i: random_row(rnd, subset(m)) for i in range(n) if rnd.random() > 0.1}
    return HmmModel(
        "random", list(hidden), list(observations),
        random_row(rnd, subset(n)),
        transitions, random_row(rnd, list(range(n))),
        emissions, random_row(rnd, list(range(m))),
        EmissionKind.SMOOTHED, 0.1,
    )


def pytest_terminal_summary(terminalreporter):
    import sys

    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.RESULTS:
        terminalreporter.write_line(line)
