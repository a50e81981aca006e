import struct

import numpy as np
import pytest

from tweetpolarity.checkpoint import (Checkpoint, load_checkpoint, pack_model,
                                      pack_embedding, save_checkpoint,
                                      unpack_embedding, unpack_model,
                                      vocab_hash)
from tweetpolarity.corpus import SUBTASKS, build_vocab
from tweetpolarity.errors import CheckpointError
from tweetpolarity.models import EmbeddingMatrix
from tweetpolarity.train import (CnnArch, LstmArch, TrainSchedule, predict,
                                 supervised_train)
from tests.conftest import make_separable_dataset


class TestContainer:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        arrays = {
            "a/scalarish": np.array(3.25, dtype=np.float32),
            "b/vec": rng.standard_normal(17).astype(np.float32),
            "c/mat": rng.standard_normal((5, 7)).astype(np.float32),
            "d/cube": rng.standard_normal((2, 3, 4)).astype(np.float32),
        }
        meta = {"kind": "embedding", "seed": 9}
        p = tmp_path / "x.ckpt"
        save_checkpoint(p, Checkpoint(arrays=arrays, meta=meta))
        loaded = load_checkpoint(p)
        assert loaded.meta == meta
        assert list(loaded.arrays) == list(arrays)
        for name, arr in arrays.items():
            got = loaded.arrays[name]
            assert got.dtype == np.float32
            assert got.shape == arr.shape
            assert got.tobytes() == arr.tobytes()

    def test_known_byte_layout(self, tmp_path):
        p = tmp_path / "one.ckpt"
        save_checkpoint(p, Checkpoint(
            arrays={"w": np.array([[1.0]], dtype=np.float32)}, meta={}))
        buf = p.read_bytes()
        assert buf[:6] == b"NNCP1\n"
        assert struct.unpack("<I", buf[6:10])[0] == 1
        assert struct.unpack("<H", buf[10:12])[0] == 1
        assert buf[12:13] == b"w"
        assert buf[13] == 2  # rank
        assert struct.unpack("<II", buf[14:22]) == (1, 1)
        assert buf[22:26] == bytes([0x00, 0x00, 0x80, 0x3F])  # 1.0f LE

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.ckpt"
        p.write_bytes(b"XXXX1\n" + b"\x00" * 16)
        with pytest.raises(CheckpointError, match="bad magic"):
            load_checkpoint(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "x.ckpt"
        save_checkpoint(p, Checkpoint(
            arrays={"w": np.ones(8, dtype=np.float32)}, meta={}))
        whole = p.read_bytes()
        p.write_bytes(whole[:-10])
        with pytest.raises(CheckpointError, match="truncated payload"):
            load_checkpoint(p)

    def test_dimension_overflow(self, tmp_path):
        # hand-craft a header whose dims multiply past the element cap
        buf = b"NNCP1\n" + struct.pack("<I", 1)
        buf += struct.pack("<H", 1) + b"w" + struct.pack("<B", 2)
        buf += struct.pack("<II", 1 << 20, 1 << 20)
        p = tmp_path / "evil.ckpt"
        p.write_bytes(buf)
        with pytest.raises(CheckpointError, match="dimension overflow"):
            load_checkpoint(p)

    def test_save_rejects_oversized_dims(self, tmp_path):
        arr = np.lib.stride_tricks.as_strided(
            np.zeros(1, dtype=np.float32), shape=(1 << 33,), strides=(0,))
        with pytest.raises(CheckpointError, match="dimension overflow"):
            save_checkpoint(tmp_path / "big.ckpt",
                            Checkpoint(arrays={"w": arr}, meta={}))

    def test_rerun_is_byte_identical(self, tmp_path):
        arrays = {"w": np.arange(6, dtype=np.float32).reshape(2, 3)}
        meta = {"kind": "embedding", "b": 1, "a": 2}
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(p1, Checkpoint(arrays=dict(arrays), meta=dict(meta)))
        save_checkpoint(p2, Checkpoint(arrays=dict(arrays), meta=dict(meta)))
        assert p1.read_bytes() == p2.read_bytes()


class TestVocabHash:
    def test_mismatch_rejected(self, tmp_path):
        v1 = build_vocab([["a", "b"]], min_count=1)
        v2 = build_vocab([["a", "c"]], min_count=1)
        emb = EmbeddingMatrix.random(len(v1), 4, np.random.default_rng(0))
        p = tmp_path / "e.ckpt"
        save_checkpoint(p, pack_embedding(emb, v1))
        load_checkpoint(p, vocab=v1)
        with pytest.raises(CheckpointError, match="hash mismatch"):
            load_checkpoint(p, vocab=v2)

    def test_hash_depends_on_token_order(self):
        v1 = build_vocab([["a", "a", "b"]], min_count=1)
        v2 = build_vocab([["b", "b", "a"]], min_count=1)
        assert vocab_hash(v1) != vocab_hash(v2)


class TestModelRoundTrip:
    @pytest.mark.parametrize("kind,arch", [
        ("cnn", CnnArch(filter_sizes=(1, 2), filters_per_size=3, hidden=4,
                        s_prime=16)),
        ("bilstm", LstmArch(m=4, hidden=4, s_prime=16)),
    ])
    def test_predictions_preserved_bitwise(self, tmp_path, kind, arch):
        data = make_separable_dataset(n=40)
        vocab = build_vocab([ex.tweet.tokens for ex in data], min_count=1)
        emb = EmbeddingMatrix.random(len(vocab), 8, np.random.default_rng(2),
                                     scale=0.5)
        sched = TrainSchedule(phase="supervised", frozen_epochs=1,
                              unfrozen_epochs=1, batch_size=8)
        model = supervised_train(kind, SUBTASKS["B"], data, emb, vocab,
                                 sched=sched, seed=4, arch=arch)
        before = predict(model, data[:10])
        p = tmp_path / "m.ckpt"
        save_checkpoint(p, pack_model(model, seed=4))
        restored = unpack_model(load_checkpoint(p, vocab=vocab), vocab)
        assert restored.kind == kind
        assert restored.subtask.id == "B"
        after = predict(restored, data[:10])
        for a, b in zip(before, after):
            assert a.tobytes() == b.tobytes()

    def test_embedding_round_trip(self, tmp_path):
        vocab = build_vocab([["a", "b", "c"]], min_count=1)
        emb = EmbeddingMatrix.random(len(vocab), 6, np.random.default_rng(1))
        p = tmp_path / "e.ckpt"
        save_checkpoint(p, pack_embedding(emb, vocab, seed=7, epochs=5))
        ck = load_checkpoint(p, vocab=vocab)
        assert ck.meta["epochs"] == 5
        restored = unpack_embedding(ck)
        assert restored.E.tobytes() == emb.E.tobytes()
        assert restored.topic_vecs.tobytes() == emb.topic_vecs.tobytes()

    def test_unpack_model_requires_model_kind(self, tmp_path):
        vocab = build_vocab([["a"]], min_count=1)
        emb = EmbeddingMatrix.random(len(vocab), 4, np.random.default_rng(0))
        p = tmp_path / "e.ckpt"
        save_checkpoint(p, pack_embedding(emb, vocab))
        with pytest.raises(CheckpointError, match="kind"):
            unpack_model(load_checkpoint(p), vocab)
