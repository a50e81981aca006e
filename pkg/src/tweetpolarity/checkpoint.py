"""Bit-exact binary persistence for embeddings and trained models.

Container layout (all integers little-endian):

    magic  b"NNCP1\\n"
    u32    array count
    per array:
        u16  name byte-length, then UTF-8 name
        u8   rank
        u32  dim, repeated rank times
        f32  row-major payload
    final named blob:
        u16  name byte-length, then UTF-8 name ("meta")
        u32  payload byte-length
        UTF-8 JSON metadata

Tensors are stored single-precision; loading restores them bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import SUBTASKS, Vocabulary
from .errors import CheckpointError
from .models import BiLstmParams, CnnParams, EmbeddingMatrix, LstmCellParams
from .train import TrainedModel

MAGIC = b"NNCP1\n"
META_NAME = "meta"
_MAX_ELEMENTS = 1 << 32


@dataclass
class Checkpoint:
    arrays: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)


def vocab_hash(vocab: Vocabulary) -> str:
    return hashlib.sha256("\n".join(vocab.itos).encode("utf-8")).hexdigest()


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> None:
    chunks = [MAGIC, struct.pack("<I", len(ckpt.arrays))]
    for name, arr in ckpt.arrays.items():
        if arr.ndim > 255:
            raise CheckpointError("dimension overflow")
        if any(d >= _MAX_ELEMENTS for d in arr.shape) or arr.size >= _MAX_ELEMENTS:
            raise CheckpointError("dimension overflow")
        a = np.ascontiguousarray(arr, dtype=np.float32)
        nb = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(nb)))
        chunks.append(nb)
        chunks.append(struct.pack("<B", arr.ndim))
        for d in arr.shape:
            chunks.append(struct.pack("<I", d))
        chunks.append(a.astype("<f4").tobytes())
    meta_bytes = json.dumps(ckpt.meta, sort_keys=True).encode("utf-8")
    nb = META_NAME.encode("utf-8")
    chunks.append(struct.pack("<H", len(nb)))
    chunks.append(nb)
    chunks.append(struct.pack("<I", len(meta_bytes)))
    chunks.append(meta_bytes)
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CheckpointError("truncated payload")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def load_checkpoint(path: str | Path,
                    vocab: Vocabulary | None = None) -> Checkpoint:
    """Read a container; when a vocabulary is supplied its hash must match
    the one recorded at save time."""
    buf = Path(path).read_bytes()
    r = _Reader(buf)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("bad magic")
    count = r.u32()
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        name = r.take(r.u16()).decode("utf-8")
        rank = r.u8()
        dims = [r.u32() for _ in range(rank)]
        size = 1
        for d in dims:
            size *= d
        if size >= _MAX_ELEMENTS:
            raise CheckpointError("dimension overflow")
        payload = r.take(4 * size)
        arrays[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    meta_name = r.take(r.u16()).decode("utf-8")
    if meta_name != META_NAME:
        raise CheckpointError(f"expected metadata blob, found {meta_name!r}")
    meta = json.loads(r.take(r.u32()).decode("utf-8"))
    ckpt = Checkpoint(arrays=arrays, meta=meta)
    if vocab is not None:
        want = meta.get("vocab_hash")
        have = vocab_hash(vocab)
        if want != have:
            raise CheckpointError(
                f"vocabulary hash mismatch: checkpoint {want}, supplied {have}")
    return ckpt


# ---------------------------------------------------------------------------
# model <-> checkpoint adapters


def pack_embedding(emb: EmbeddingMatrix, vocab: Vocabulary,
                   seed: int = 0, epochs: int = 0) -> Checkpoint:
    return Checkpoint(
        arrays={"emb/E": emb.E, "emb/topic": emb.topic_vecs},
        meta={"kind": "embedding", "vocab_hash": vocab_hash(vocab),
              "seed": seed, "epochs": epochs})


def unpack_embedding(ckpt: Checkpoint) -> EmbeddingMatrix:
    try:
        return EmbeddingMatrix(E=ckpt.arrays["emb/E"],
                               topic_vecs=ckpt.arrays["emb/topic"])
    except KeyError as e:
        raise CheckpointError(f"missing embedding array {e}") from None


def pack_model(model: TrainedModel, seed: int = 0) -> Checkpoint:
    arrays = dict(model.emb.param_dict())
    arrays.update(model.params.param_dict())
    meta = {
        "kind": model.kind,
        "subtask": model.subtask.id,
        "vocab_hash": vocab_hash(model.vocab),
        "seed": seed,
        "epochs": len(model.history),
        "s_prime": model.params.s_prime,
        "dropout_p": model.params.dropout_p,
    }
    return Checkpoint(arrays=arrays, meta=meta)


def unpack_model(ckpt: Checkpoint, vocab: Vocabulary) -> TrainedModel:
    meta = ckpt.meta
    kind = meta.get("kind")
    if kind not in ("cnn", "bilstm"):
        raise CheckpointError(f"not a model checkpoint (kind={kind!r})")
    subtask = SUBTASKS[meta["subtask"]]
    emb = unpack_embedding(ckpt)
    arrays = ckpt.arrays
    s_prime = int(meta["s_prime"])
    dropout_p = float(meta["dropout_p"])
    try:
        if kind == "cnn":
            sizes = sorted(int(k[4:-2]) for k in arrays
                           if k.startswith("conv") and k.endswith("/w"))
            params = CnnParams(
                filters={h: arrays[f"conv{h}/w"] for h in sizes},
                biases={h: arrays[f"conv{h}/b"] for h in sizes},
                W_hidden=arrays["hidden/W"], b_hidden=arrays["hidden/b"],
                W_out=arrays["out/W"], b_out=arrays["out/b"],
                s_prime=s_prime, dropout_p=dropout_p)
        else:
            params = BiLstmParams(
                fwd=LstmCellParams(Wx=arrays["fwd/Wx"], Wh=arrays["fwd/Wh"],
                                   b=arrays["fwd/b"]),
                bwd=LstmCellParams(Wx=arrays["bwd/Wx"], Wh=arrays["bwd/Wh"],
                                   b=arrays["bwd/b"]),
                W_hidden=arrays["hidden/W"], b_hidden=arrays["hidden/b"],
                W_out=arrays["out/W"], b_out=arrays["out/b"],
                s_prime=s_prime, dropout_p=dropout_p)
    except KeyError as e:
        raise CheckpointError(f"missing model array {e}") from None
    return TrainedModel(kind=kind, params=params, emb=emb, vocab=vocab,
                        subtask=subtask,
                        history=[(0.0, 0.0)] * int(meta.get("epochs", 0)))
