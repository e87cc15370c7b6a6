import numpy as np
import pytest

from seqcf import UserSequence, train_markov
from seqcf.models import ScoreVector


class EchoScorer:
    """Last-item-dominant test model: recommends whatever ends the sequence."""

    def __init__(self, num_items: int):
        self.num_items = num_items

    def score(self, seq):
        items = seq.items if isinstance(seq, UserSequence) else tuple(seq)
        logits = np.zeros(self.num_items)
        logits[items[-1]] = 10.0
        return ScoreVector(logits)


class SumScorer:
    """Any single change flips the output: top-1 is the item sum mod m."""

    def __init__(self, num_items: int):
        self.num_items = num_items

    def score(self, seq):
        items = seq.items if isinstance(seq, UserSequence) else tuple(seq)
        logits = np.zeros(self.num_items)
        logits[sum(items) % self.num_items] = 10.0
        return ScoreVector(logits)


class ConstScorer:
    """Recommends item 0 no matter the input; no counterfactual exists."""

    def __init__(self, num_items: int):
        self.num_items = num_items

    def score(self, seq):
        logits = np.zeros(self.num_items)
        logits[0] = 10.0
        return ScoreVector(logits)


class QueuedRng:
    """Stand-in generator releasing scripted integers/floats in order."""

    def __init__(self, integers=(), randoms=()):
        self._ints = list(integers)
        self._floats = list(randoms)

    def integers(self, low, high=None):
        return self._ints.pop(0)

    def random(self):
        return self._floats.pop(0)


def seqs(mapping, max_len=50):
    return {u: UserSequence(u, tuple(items), max_len) for u, items in mapping.items()}


@pytest.fixture
def cycle_markov():
    """Markov scorer trained on ten copies of the chain 0->1->2->3."""
    return train_markov(seqs({u: (0, 1, 2, 3) for u in range(1, 11)}), 4)


@pytest.fixture
def echo6():
    return EchoScorer(6)
