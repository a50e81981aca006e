import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetpolarity.text import (NormRules, TokenizedTweet, augment_with_topic,
                                load_rules, normalize, tokenize)


class TestNormalize:
    def test_repeat_collapse(self):
        assert normalize("sooooo") == "soo"

    def test_url_and_emoticon(self):
        assert normalize("check http://x.co/ab :)") == "check <url> <smile>"

    def test_empty(self):
        assert normalize("") == ""

    def test_lowercase(self):
        assert normalize("GOOD Day") == "good day"

    def test_repeat_applies_to_punctuation(self):
        assert normalize("wow!!!!") == "wow!!"

    def test_www_url(self):
        assert normalize("see www.example.com now") == "see <url> now"

    @pytest.mark.parametrize("emo,tok", [
        (":)", "<smile>"), (":-)", "<smile>"), ("=)", "<smile>"),
        (":D", "<smile>"), (":(", "<sadface>"), (":-(", "<sadface>"),
        ("=(", "<sadface>"), (":p", "<lolface>"), (":-p", "<lolface>"),
        ("xD", "<lolface>"), (":|", "<neutralface>"), (":-|", "<neutralface>"),
    ])
    def test_emoticon_inventory(self, emo, tok):
        assert normalize(f"hey {emo}") == f"hey {tok}"

    def test_idempotent_on_tricky_inputs(self):
        # inputs where a single pass would re-expose earlier stages
        for s in ["htttp://x.co", ":P", "HTTTP://A.B", "xxD :PPP",
                  "soooo :((( www..a"]:
            once = normalize(s)
            assert normalize(once) == once

    @given(st.text(alphabet=string.printable, max_size=40))
    @settings(max_examples=300, deadline=None)
    def test_idempotent_fuzz(self, s):
        once = normalize(s)
        assert normalize(once) == once


class TestTokenize:
    def test_whitespace_split(self):
        assert tokenize("good day") == ["good", "day"]

    def test_trailing_punct(self):
        assert tokenize("great!") == ["great", "!"]

    def test_special_token_atomic(self):
        assert tokenize("<smile> ok") == ["<smile>", "ok"]

    def test_punct_peeling_exhaustive(self):
        # every peelable ASCII punctuation splits off; the rest stay attached
        peel = set(".,!?;:\"()[]")
        for ch in string.punctuation:
            got = tokenize(f"great{ch}")
            if ch in peel:
                assert got == ["great", ch], ch
            else:
                assert got == [f"great{ch}"], ch

    def test_wrapping_punct(self):
        assert tokenize('(hi)') == ["(", "hi", ")"]
        assert tokenize('"quoted!"') == ['"', "quoted", "!", '"']

    def test_no_whitespace_in_tokens(self):
        for tok in tokenize(normalize("so  much\t stuff!! :) ok")):
            assert tok
            assert not any(c.isspace() for c in tok)

    @given(st.text(alphabet=string.printable, max_size=40))
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, s):
        toks = tokenize(normalize(s))
        assert tokenize(" ".join(toks)) == toks


class TestAugmentWithTopic:
    def test_topic_present(self):
        t = augment_with_topic(["love", "this", "phone"], "phone")
        assert t.tokens == ["love", "this", "phone"]
        assert t.topic_flags == [False, False, True]

    def test_topic_appended(self):
        t = augment_with_topic(["love", "it"], "new phone")
        assert t.tokens == ["love", "it", "new", "phone"]
        assert t.topic_flags == [False, False, True, True]

    def test_empty_tweet(self):
        t = augment_with_topic([], "x")
        assert t.tokens == ["x"]
        assert t.topic_flags == [True]

    def test_case_insensitive_match(self):
        t = augment_with_topic(["iphone"], "iPhone")
        assert t.tokens == ["iphone"]
        assert t.topic_flags == [True]

    def test_flags_mark_exactly_topic_positions(self):
        topic_words = {"alpha", "beta"}
        t = augment_with_topic(["x", "alpha", "y", "beta", "alpha"],
                               "alpha beta")
        for tok, flag in zip(t.tokens, t.topic_flags):
            assert flag == (tok in topic_words)
        for w in topic_words:
            assert w in t.tokens


class TestRules:
    def test_invalid_max_repeat(self):
        with pytest.raises(ValueError):
            NormRules(max_repeat=0)

    def test_empty_pattern_rejected(self):
        with pytest.raises(ValueError):
            NormRules(emoticon_map=(("", "<x>"),))

    def test_rules_file(self, tmp_path):
        p = tmp_path / "rules.tsv"
        p.write_text("^_^\t<smile>\nT_T\t<sadface>\n", encoding="utf-8")
        rules = load_rules(p)
        assert normalize("hi ^_^", rules) == "hi <smile>"
        assert normalize("T_T", rules) == "<sadface>"

    def test_missing_rules_file_gives_defaults(self, tmp_path):
        rules = load_rules(tmp_path / "absent.tsv")
        assert normalize("ok :)", rules) == "ok <smile>"


class TestTokenizedTweet:
    def test_flag_length_mismatch(self):
        with pytest.raises(ValueError):
            TokenizedTweet(tokens=["a", "b"], topic_flags=[True])

    def test_default_flags(self):
        t = TokenizedTweet(tokens=["a", "b"])
        assert t.topic_flags == [False, False]
