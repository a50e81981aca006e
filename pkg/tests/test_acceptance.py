"""Acceptance criteria, one test per criterion, each printing a PASS line
(run with `pytest tests/test_acceptance.py -v -s` to see them).

1. gradient oracle for both models over 20 seeds within 1e-3, under 60 s
2. metric implementations agree with brute-force oracles within 1e-9
3. end-to-end smoke: >= 95% train accuracy within 20 epochs, < 2 min,
   deterministic per seed
4. distant phase pulls opposite-polarity tokens apart; frozen epoch leaves
   the table bit-identical
5. ensemble arithmetic: soft vote = mean, quantify = columnwise mean,
   correlation matrix symmetric with unit diagonal
6. preprocessing conformance plus idempotence on a 10k-string fuzz corpus
7. checkpoint persistence: bit-exact round trip, bitwise-stable
   predictions, distinct corruption errors
8. schedule conformance: 1+6 distant epochs; supervised lr drops 0.001 ->
   0.0001 at the configured unfreeze epoch
"""

import string
import time

import numpy as np
import pytest

from tweetpolarity.checkpoint import (Checkpoint, load_checkpoint, pack_model,
                                      save_checkpoint)
from tweetpolarity.corpus import SUBTASKS, build_vocab
from tweetpolarity.ensemble import pearson_matrix, quantify, soft_vote
from tweetpolarity.errors import CheckpointError
from tweetpolarity.gradcheck import run_suite
from tweetpolarity.metrics import emd, f1_pn, kld, macro_mae, macro_recall
from tweetpolarity.models import EmbeddingMatrix
from tweetpolarity.text import TokenizedTweet, normalize
from tweetpolarity.train import (CnnArch, LstmArch, TrainSchedule,
                                 distant_train, predict, supervised_train)
from tests.conftest import make_separable_dataset
from tests.test_metrics import (oracle_emd_transport, oracle_f1_pn,
                                oracle_kld, oracle_macro_mae,
                                oracle_macro_recall)

GRAD_TOL = 1e-3
ORACLE_TOL = 1e-9


def _report(criterion: str, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: PASS ({detail})")


def test_criterion_1_gradient_oracle():
    t0 = time.time()
    rows = run_suite(base_seed=0, seeds=20)
    elapsed = time.time() - t0
    worst = max(err for _, err in rows)
    assert worst < GRAD_TOL, rows
    assert elapsed < 60.0
    _report("1 gradient oracle",
            f"{len(rows)} checks x 20 seeds, worst {worst:.2e}, "
            f"{elapsed:.1f}s")


def test_criterion_2_metric_oracles():
    rng = np.random.default_rng(20170817)
    checked = 0
    for _ in range(100):
        K = int(rng.choice([2, 3, 5]))
        n = int(rng.integers(K, 51))
        while True:
            g = rng.integers(0, K, size=n)
            if len(set(g.tolist())) == K:
                break
        p = rng.integers(0, K, size=n)
        assert abs(macro_recall(g, p, K)
                   - oracle_macro_recall(g.tolist(), p.tolist(), K)) < ORACLE_TOL
        assert abs(macro_mae(g, p, K)
                   - oracle_macro_mae(g.tolist(), p.tolist(), K)) < ORACLE_TOL
        if K == 3:
            assert abs(f1_pn(g, p)
                       - oracle_f1_pn(g.tolist(), p.tolist())) < ORACLE_TOL
        gd = rng.random(K)
        gd /= gd.sum()
        pd = rng.random(K)
        pd /= pd.sum()
        n_test = int(rng.integers(1, 200))
        assert abs(kld(gd, pd, n_test) - oracle_kld(gd, pd, n_test)) < ORACLE_TOL
        assert abs(emd(gd, pd) - oracle_emd_transport(gd, pd)) < ORACLE_TOL
        checked += 1
    # dedicated transport cross-check on the 5-point line
    for _ in range(50):
        gd = rng.random(5)
        gd /= gd.sum()
        pd = rng.random(5)
        pd /= pd.sum()
        assert abs(emd(gd, pd) - oracle_emd_transport(gd, pd)) < ORACLE_TOL
    _report("2 metric oracles",
            f"{checked} random instances + 50 transport LPs, all within 1e-9")


def test_criterion_3_end_to_end_smoke():
    data = make_separable_dataset(n=200, seed=7)
    vocab = build_vocab([ex.tweet.tokens for ex in data], min_count=1)
    emb = EmbeddingMatrix.random(len(vocab), 16, np.random.default_rng(3),
                                 scale=0.5)
    sched = TrainSchedule(phase="supervised", frozen_epochs=10,
                          unfrozen_epochs=10, lr_initial=0.001,
                          lr_unfrozen_scale=0.1, batch_size=8)
    archs = {"cnn": CnnArch(filter_sizes=(1, 2, 3), filters_per_size=16,
                            hidden=16),
             "bilstm": LstmArch(m=16, hidden=16)}
    details = []
    for kind, arch in archs.items():
        t0 = time.time()
        model = supervised_train(kind, SUBTASKS["B"], data, emb, vocab,
                                 sched=sched, seed=11, arch=arch)
        elapsed = time.time() - t0
        best = max(acc for _, acc in model.history)
        first95 = next(i + 1 for i, (_, a) in enumerate(model.history)
                       if a >= 0.95)
        assert len(model.history) == 20
        assert best >= 0.95, (kind, model.history)
        assert elapsed < 120.0, (kind, elapsed)
        rerun = supervised_train(kind, SUBTASKS["B"], data, emb, vocab,
                                 sched=sched, seed=11, arch=arch)
        assert rerun.history == model.history  # deterministic per seed
        details.append(f"{kind} best {best:.2f} (>=95% at epoch {first95}, "
                       f"{elapsed:.0f}s)")
    _report("3 end-to-end smoke", "; ".join(details))


def test_criterion_4_distant_phase_effect():
    rng = np.random.default_rng(0)
    fill = ["one", "two", "three", "four"]
    pos, neg = [], []
    for _ in range(80):
        base = [fill[int(rng.integers(4))] for _ in range(3)]
        pos.append(TokenizedTweet(tokens=base + ["yay"]))
        neg.append(TokenizedTweet(tokens=base + ["ugh"]))
    vocab = build_vocab([t.tokens for t in pos + neg], min_count=1)
    emb = EmbeddingMatrix.random(len(vocab), 8, np.random.default_rng(1),
                                 scale=0.4)
    arch = CnnArch(filter_sizes=(1, 2), filters_per_size=4, hidden=6,
                   s_prime=16)
    snapshots = {}
    tuned = distant_train(
        emb, pos, neg, vocab,
        sched=TrainSchedule(phase="distant", frozen_epochs=1,
                            unfrozen_epochs=6, batch_size=16),
        seed=3, arch=arch,
        probe=lambda ep, st, e: snapshots.setdefault(ep, e.E.copy()))
    np.testing.assert_array_equal(snapshots[1], emb.E)

    def cos(E, a, b):
        i, j = vocab.stoi[a], vocab.stoi[b]
        return float(E[i] @ E[j]
                     / (np.linalg.norm(E[i]) * np.linalg.norm(E[j])))

    before = cos(emb.E, "yay", "ugh")
    after = cos(tuned.E, "yay", "ugh")
    assert after < before
    _report("4 distant-phase effect",
            f"cosine(yay, ugh) {before:.3f} -> {after:.3f}; "
            "frozen epoch bit-identical")


def test_criterion_5_ensemble_math():
    rng = np.random.default_rng(5)

    def simplex(n, k):
        x = rng.random((n, k))
        return x / x.sum(axis=1, keepdims=True)

    members = list(simplex(20, 3))
    manual = np.zeros(3)
    for m in members:
        manual += m
    assert np.abs(soft_vote(members) - manual / 20).max() < ORACLE_TOL

    probs = simplex(100, 5)
    assert np.abs(quantify(list(probs)) - probs.mean(axis=0)).max() < ORACLE_TOL

    outputs = [simplex(40, 3) for _ in range(6)]
    corr = pearson_matrix(outputs)
    assert np.abs(np.diag(corr) - 1.0).max() < 1e-12
    assert np.abs(corr - corr.T).max() < 1e-9
    _report("5 ensemble math",
            "soft vote, quantify and correlation all exact within 1e-9")


def test_criterion_6_preprocessing_conformance():
    assert normalize("sooooo") == "soo"
    assert normalize("check http://x.co/ab :)") == "check <url> <smile>"
    assert normalize("GOOD Day") == "good day"
    assert normalize("hey :( www.a.b") == "hey <sadface> <url>"

    rng = np.random.default_rng(99)
    alphabet = list(string.ascii_letters + string.digits
                    + ":;()=|-.!?/<> \t" + "'\"")
    fragments = ["http://", "www.", ":)", ":(", ":-)", "xD", ":P", "soo",
                 "htttp://", "!!!", "@user", "#tag"]
    n_checked = 0
    for _ in range(10_000):
        parts = []
        for _ in range(int(rng.integers(1, 6))):
            if rng.random() < 0.3:
                parts.append(fragments[int(rng.integers(len(fragments)))])
            else:
                k = int(rng.integers(0, 12))
                parts.append("".join(
                    alphabet[int(i)] for i in rng.integers(len(alphabet),
                                                           size=k)))
        s = " ".join(parts)
        once = normalize(s)
        assert normalize(once) == once, repr(s)
        n_checked += 1
    _report("6 preprocessing conformance",
            f"worked examples plus idempotence on {n_checked} fuzz strings")


def test_criterion_7_persistence(tmp_path):
    data = make_separable_dataset(n=40, seed=2)
    vocab = build_vocab([ex.tweet.tokens for ex in data], min_count=1)
    emb = EmbeddingMatrix.random(len(vocab), 8, np.random.default_rng(4),
                                 scale=0.5)
    model = supervised_train(
        "cnn", SUBTASKS["B"], data, emb, vocab,
        sched=TrainSchedule(phase="supervised", frozen_epochs=1,
                            unfrozen_epochs=1, batch_size=8),
        seed=6, arch=CnnArch(filter_sizes=(1, 2), filters_per_size=3,
                             hidden=4, s_prime=16))
    before = predict(model, data[:8])
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, pack_model(model))
    loaded = load_checkpoint(path, vocab=vocab)
    for name, arr in pack_model(model).arrays.items():
        assert loaded.arrays[name].tobytes() == np.ascontiguousarray(
            arr, dtype=np.float32).tobytes()
    from tweetpolarity.checkpoint import unpack_model
    after = predict(unpack_model(loaded, vocab), data[:8])
    assert all(a.tobytes() == b.tobytes() for a, b in zip(before, after))

    bad_magic = tmp_path / "bad.ckpt"
    bad_magic.write_bytes(b"XXXX1\n" + b"\x00" * 8)
    with pytest.raises(CheckpointError, match="bad magic"):
        load_checkpoint(bad_magic)
    truncated = tmp_path / "trunc.ckpt"
    truncated.write_bytes(path.read_bytes()[:-7])
    with pytest.raises(CheckpointError, match="truncated payload"):
        load_checkpoint(truncated)
    _report("7 persistence",
            "bit-exact round trip, bitwise predictions, distinct errors")


def test_criterion_8_schedule_conformance():
    rng = np.random.default_rng(1)
    fill = ["one", "two", "three", "four"]
    pos = [TokenizedTweet(tokens=[fill[int(rng.integers(4))], "yay"])
           for _ in range(24)]
    neg = [TokenizedTweet(tokens=[fill[int(rng.integers(4))], "ugh"])
           for _ in range(24)]
    vocab = build_vocab([t.tokens for t in pos + neg], min_count=1)
    emb = EmbeddingMatrix.random(len(vocab), 8, np.random.default_rng(2))
    arch = CnnArch(filter_sizes=(1, 2), filters_per_size=3, hidden=4,
                   s_prime=8)

    distant_log = []
    distant_frozen = []
    distant_train(emb, pos, neg, vocab, seed=1, arch=arch,
                  log=distant_log.append,
                  probe=lambda ep, st, e: distant_frozen.append(
                      (ep, e.frozen, e.E.copy())))
    assert len(distant_log) == 7  # exactly 1 frozen + 6 unfrozen
    assert [ln.split("\t")[0] for ln in distant_log] == [
        str(i) for i in range(1, 8)]
    assert distant_frozen[0][1] is True
    np.testing.assert_array_equal(distant_frozen[0][2], emb.E)
    assert all(not frozen for _, frozen, _ in distant_frozen[1:])

    data = make_separable_dataset(n=60, seed=3)
    svocab = build_vocab([ex.tweet.tokens for ex in data], min_count=1)
    semb = EmbeddingMatrix.random(len(svocab), 8, np.random.default_rng(5),
                                  scale=0.5)
    lr_by_epoch = {}
    sup_log = []
    supervised_train(
        "cnn", SUBTASKS["B"], data, semb, svocab,
        sched=TrainSchedule(phase="supervised", frozen_epochs=5,
                            unfrozen_epochs=5, lr_initial=0.001,
                            lr_unfrozen_scale=0.1, batch_size=8),
        seed=4, arch=arch, log=sup_log.append,
        probe=lambda ep, states, e: lr_by_epoch.setdefault(
            ep, sorted({st.lr for st in states.values()})))
    assert len(sup_log) == 10
    for epoch in range(1, 6):
        assert lr_by_epoch[epoch] == [0.001], epoch
    for epoch in range(6, 11):
        assert lr_by_epoch[epoch] == [pytest.approx(0.0001)], epoch
    _report("8 schedule conformance",
            "distant 1+6 epochs; supervised lr 0.001 -> 0.0001 at epoch 6")
