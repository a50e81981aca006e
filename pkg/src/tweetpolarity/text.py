"""Tweet normalization, tokenization and topic augmentation.

Normalization applies, in order: URL replacement, emoticon replacement,
repeated-character collapsing, lowercasing. The pass is repeated until the
text stops changing, which makes the function idempotent even on inputs
where one stage re-exposes material for an earlier one (e.g. a collapsed
"htttp://" becoming a URL).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

URL_TOKEN = "<url>"

# Pattern -> token pairs; patterns are matched case-sensitively before
# lowercasing, so uppercase variants are listed explicitly.
DEFAULT_EMOTICONS: tuple[tuple[str, str], ...] = (
    (":-)", "<smile>"),
    (":)", "<smile>"),
    ("=)", "<smile>"),
    (":D", "<smile>"),
    (":-(", "<sadface>"),
    (":(", "<sadface>"),
    ("=(", "<sadface>"),
    (":-p", "<lolface>"),
    (":-P", "<lolface>"),
    (":p", "<lolface>"),
    (":P", "<lolface>"),
    ("xD", "<lolface>"),
    ("XD", "<lolface>"),
    (":-|", "<neutralface>"),
    (":|", "<neutralface>"),
)

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_WS_RE = re.compile(r"\s+")

PUNCT_PEEL = set(".,!?;:\"()[]")
_SPECIAL_TOKEN_RE = re.compile(r"^<[a-z]+>$")


@dataclass(frozen=True)
class NormRules:
    """Normalization inventory: URL token, emoticon map, repeat cap."""

    url_token: str = URL_TOKEN
    emoticon_map: tuple[tuple[str, str], ...] = DEFAULT_EMOTICONS
    max_repeat: int = 2

    def __post_init__(self):
        if self.max_repeat < 1:
            raise ValueError(f"max_repeat must be >= 1, got {self.max_repeat}")
        for pat, _ in self.emoticon_map:
            if not pat:
                raise ValueError("empty emoticon pattern")


@dataclass
class TokenizedTweet:
    """Tokens plus per-token topic-membership flags (same length)."""

    tokens: list[str]
    topic_flags: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.topic_flags:
            self.topic_flags = [False] * len(self.tokens)
        if len(self.topic_flags) != len(self.tokens):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.topic_flags)} flags")


def load_rules(path: str | Path | None) -> NormRules:
    """Read emoticon pattern<TAB>token pairs; missing path means defaults."""
    if path is None:
        return NormRules()
    p = Path(path)
    if not p.exists():
        return NormRules()
    pairs = []
    for line in p.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        pat, _, tok = line.partition("\t")
        if not pat or not tok:
            raise ValueError(f"malformed rules line: {line!r}")
        pairs.append((pat, tok))
    return NormRules(emoticon_map=tuple(pairs))


def _emoticon_regex(rules: NormRules) -> re.Pattern:
    # longest-first so ":-)" wins over ":-" prefixes of other patterns
    pats = sorted((p for p, _ in rules.emoticon_map), key=len, reverse=True)
    return re.compile("|".join(re.escape(p) for p in pats))


def _collapse_repeats(s: str, max_repeat: int) -> str:
    out = []
    run_char = ""
    run_len = 0
    for ch in s:
        if ch == run_char:
            run_len += 1
        else:
            run_char = ch
            run_len = 1
        if run_len <= max_repeat:
            out.append(ch)
    return "".join(out)


def _normalize_once(raw: str, rules: NormRules, emo_re: re.Pattern,
                    emo_map: dict[str, str]) -> str:
    s = _URL_RE.sub(f" {rules.url_token} ", raw)
    s = emo_re.sub(lambda m: f" {emo_map[m.group(0)]} ", s)
    s = _collapse_repeats(s, rules.max_repeat)
    s = s.lower()
    return _WS_RE.sub(" ", s).strip()


def normalize(raw: str, rules: NormRules | None = None) -> str:
    """Normalize raw tweet text; total and idempotent on any string."""
    rules = rules or NormRules()
    emo_re = _emoticon_regex(rules)
    emo_map = dict(rules.emoticon_map)
    s = raw
    for _ in range(8):
        nxt = _normalize_once(s, rules, emo_re, emo_map)
        if nxt == s:
            break
        s = nxt
    return s


def tokenize(normalized: str) -> list[str]:
    """Whitespace split, then peel leading/trailing punctuation into
    separate tokens. Angle-bracket specials like <url> stay atomic."""
    out: list[str] = []
    for chunk in normalized.split():
        lead: list[str] = []
        tail: list[str] = []
        core = chunk
        while len(core) > 1 and not _SPECIAL_TOKEN_RE.match(core):
            if core[0] in PUNCT_PEEL:
                lead.append(core[0])
                core = core[1:]
            elif core[-1] in PUNCT_PEEL:
                tail.append(core[-1])
                core = core[:-1]
            else:
                break
        out.extend(lead)
        out.append(core)
        out.extend(reversed(tail))
    return out


def augment_with_topic(tokens: list[str], topic: str,
                       rules: NormRules | None = None) -> TokenizedTweet:
    """Append topic words missing from the tweet; flag topic positions.

    The topic goes through the same normalize+tokenize path, so matching
    is effectively case-insensitive.
    """
    topic_words = tokenize(normalize(topic, rules))
    topic_set = set(topic_words)
    toks = list(tokens)
    present = set(toks)
    for w in topic_words:
        if w not in present:
            toks.append(w)
            present.add(w)
    flags = [t in topic_set for t in toks]
    return TokenizedTweet(tokens=toks, topic_flags=flags)
