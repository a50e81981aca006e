"""Dataset ingestion: labeled TSV loading, distant-supervision extraction
from emoticon-bearing raw tweets, vocabulary construction, class weights.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .text import NormRules, TokenizedTweet, augment_with_topic, normalize, tokenize

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD = 0
UNK = 1

POSITIVE_EMOTICON_TOKENS = frozenset({"<smile>", "<lolface>"})
NEGATIVE_EMOTICON_TOKENS = frozenset({"<sadface>"})

_LABEL_MAPS = {
    3: {"negative": 0, "neutral": 1, "positive": 2},
    2: {"negative": 0, "positive": 1},
    5: {"-2": 0, "-1": 1, "0": 2, "1": 3, "2": 4},
}


@dataclass(frozen=True)
class Subtask:
    """One of the five evaluation configurations."""

    id: str
    num_classes: int
    has_topic: bool


SUBTASKS: dict[str, Subtask] = {
    "A": Subtask("A", 3, False),
    "B": Subtask("B", 2, True),
    "C": Subtask("C", 5, True),
    "D": Subtask("D", 2, True),
    "E": Subtask("E", 5, True),
}


@dataclass
class Example:
    id: str
    label: int
    tweet: TokenizedTweet
    topic: str | None = None


@dataclass
class Vocabulary:
    """token <-> index map with <pad>=0 and <unk>=1 always present.

    counts[UNK] aggregates the frequencies of all dropped tokens so the
    negative-sampling table and subsampling see a faithful stream.
    """

    itos: list[str]
    stoi: dict[str, int]
    counts: np.ndarray  # int64, aligned with itos

    def __len__(self) -> int:
        return len(self.itos)

    def index(self, token: str) -> int:
        return self.stoi.get(token, UNK)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.fromiter((self.index(t) for t in tokens),
                           dtype=np.int32, count=len(tokens))

    def save(self, path: str | Path) -> None:
        lines = [f"{tok}\t{int(self.counts[i])}"
                 for i, tok in enumerate(self.itos)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        itos: list[str] = []
        counts: list[int] = []
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line:
                continue
            tok, _, cnt = line.partition("\t")
            if not cnt:
                raise DataError(f"line {lineno}: malformed vocab row {line!r}")
            itos.append(tok)
            counts.append(int(cnt))
        if len(itos) < 2 or itos[0] != PAD_TOKEN or itos[1] != UNK_TOKEN:
            raise DataError("vocab file must start with <pad> and <unk> rows")
        return cls(itos=itos, stoi={t: i for i, t in enumerate(itos)},
                   counts=np.asarray(counts, dtype=np.int64))


def build_vocab(corpora: Iterable[Iterable[str]], min_count: int = 1) -> Vocabulary:
    """Count tokens across streams, keep those with count >= min_count,
    order by descending count then lexicographically."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counter: Counter[str] = Counter()
    for stream in corpora:
        counter.update(stream)
    counter.pop(PAD_TOKEN, None)
    counter.pop(UNK_TOKEN, None)
    kept = sorted(
        ((tok, cnt) for tok, cnt in counter.items() if cnt >= min_count),
        key=lambda kv: (-kv[1], kv[0]))
    dropped_total = sum(cnt for tok, cnt in counter.items() if cnt < min_count)
    itos = [PAD_TOKEN, UNK_TOKEN] + [tok for tok, _ in kept]
    counts = np.zeros(len(itos), dtype=np.int64)
    counts[UNK] = dropped_total
    for i, (_, cnt) in enumerate(kept, start=2):
        counts[i] = cnt
    return Vocabulary(itos=itos, stoi={t: i for i, t in enumerate(itos)},
                      counts=counts)


def load_labeled(path: str | Path, subtask: Subtask,
                 rules: NormRules | None = None) -> list[Example]:
    """Parse a labeled TSV: `id<TAB>label<TAB>text` for subtask A,
    `id<TAB>topic<TAB>label<TAB>text` otherwise."""
    label_map = _LABEL_MAPS[subtask.num_classes]
    want_cols = 4 if subtask.has_topic else 3
    examples: list[Example] = []
    text_lines = Path(path).read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(text_lines, 1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != want_cols:
            raise DataError(
                f"line {lineno}: expected {want_cols} columns, got {len(cols)}")
        if subtask.has_topic:
            ex_id, topic, raw_label, text_col = cols
        else:
            ex_id, raw_label, text_col = cols
            topic = None
        if raw_label not in label_map:
            raise DataError(f"line {lineno}: unknown label {raw_label!r}")
        tokens = tokenize(normalize(text_col, rules))
        if topic is not None:
            tweet = augment_with_topic(tokens, topic, rules)
        else:
            tweet = TokenizedTweet(tokens=tokens)
        examples.append(Example(id=ex_id, label=label_map[raw_label],
                                tweet=tweet, topic=topic))
    if not examples:
        raise DataError(f"no examples in {path}")
    return examples


def extract_distant(lines: Iterable[str],
                    rules: NormRules | None = None
                    ) -> tuple[list[TokenizedTweet], list[TokenizedTweet]]:
    """Split raw tweets into noisy positives/negatives by emoticon polarity.

    Tweets with both polarities or neither are discarded; matched polarity
    tokens are stripped from the output so the label cannot leak into the
    input. Tweets that end up empty are dropped too.
    """
    positives: list[TokenizedTweet] = []
    negatives: list[TokenizedTweet] = []
    for line in lines:
        tokens = tokenize(normalize(line, rules))
        has_pos = any(t in POSITIVE_EMOTICON_TOKENS for t in tokens)
        has_neg = any(t in NEGATIVE_EMOTICON_TOKENS for t in tokens)
        if has_pos == has_neg:
            continue
        stripped = [t for t in tokens
                    if t not in POSITIVE_EMOTICON_TOKENS
                    and t not in NEGATIVE_EMOTICON_TOKENS]
        if not stripped:
            continue
        tweet = TokenizedTweet(tokens=stripped)
        (positives if has_pos else negatives).append(tweet)
    return positives, negatives


def class_weights(examples: Sequence[Example], num_classes: int) -> np.ndarray:
    """Inverse-frequency class weights normalized to mean 1."""
    counts = np.zeros(num_classes, dtype=np.int64)
    for ex in examples:
        counts[ex.label] += 1
    for c in range(num_classes):
        if counts[c] == 0:
            raise DataError(f"class {c} absent from the dataset")
    inv = 1.0 / counts
    return inv / inv.mean()
