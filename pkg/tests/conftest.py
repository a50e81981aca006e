import numpy as np
import pytest

from tweetpolarity.corpus import SUBTASKS, Example, Vocabulary, build_vocab
from tweetpolarity.models import EmbeddingMatrix
from tweetpolarity.text import augment_with_topic

FILLERS = ["the", "a", "my", "today", "really", "so", "just", "you", "we", "it"]


def make_separable_dataset(n: int = 200, seed: int = 7,
                           topic: str = "things") -> list[Example]:
    """Binary tweets where 'good' marks one class and 'bad' the other."""
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n):
        kw = "good" if i % 2 == 0 else "bad"
        length = int(rng.integers(3, 8))
        toks = [FILLERS[int(rng.integers(len(FILLERS)))] for _ in range(length)]
        toks.insert(int(rng.integers(len(toks) + 1)), kw)
        tweet = augment_with_topic(toks, topic)
        examples.append(Example(id=f"t{i}", label=1 if kw == "good" else 0,
                                tweet=tweet, topic=topic))
    return examples


@pytest.fixture(scope="session")
def separable_dataset() -> list[Example]:
    return make_separable_dataset()


@pytest.fixture(scope="session")
def separable_vocab(separable_dataset) -> Vocabulary:
    return build_vocab([ex.tweet.tokens for ex in separable_dataset],
                       min_count=1)


@pytest.fixture(scope="session")
def separable_emb(separable_vocab) -> EmbeddingMatrix:
    return EmbeddingMatrix.random(len(separable_vocab), 16,
                                  np.random.default_rng(3), scale=0.5)


@pytest.fixture
def subtask_b():
    return SUBTASKS["B"]
