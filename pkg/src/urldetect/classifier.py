"""The full model: embedding -> Bi-LSTM -> dropout -> dense softmax.

Also owns the binary model file format (magic "BLSM", little-endian, CRC32
trailer) so a trained model round-trips bit-exactly through save/load.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .corpus import PAD_INDEX, EncodedSequence, UrlClass, Vocabulary, encode_url
from .nncore import (
    LstmWeights,
    lstm_batch_backward,
    lstm_batch_forward,
    lstm_sequence,
    softmax,
)

MAGIC = b"BLSM"
FORMAT_VERSION = 1


class ModelFileError(Exception):
    """Base class for model file problems."""


class BadMagic(ModelFileError):
    pass


class VersionMismatch(ModelFileError):
    pass


class Truncated(ModelFileError):
    pass


class ChecksumMismatch(ModelFileError):
    pass


class ShapeError(ModelFileError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    vocab_size: int = 97
    embed_dim: int = 32
    hidden_dim: int = 64  # per direction
    num_classes: int = 4
    max_len: int = 150
    dropout_rate: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if min(self.vocab_size, self.embed_dim, self.hidden_dim, self.max_len) < 1:
            raise ValueError("all dimensions must be >= 1")
        if self.num_classes != 4:
            raise ValueError("num_classes must be 4")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if not 0 <= self.seed < 2**32:
            raise ValueError("seed must fit in an unsigned 32-bit integer")


class ModelParams:
    """The complete learnable state."""

    def __init__(
        self,
        embedding: np.ndarray,
        fwd: LstmWeights,
        bwd: LstmWeights,
        w_out: np.ndarray,
        b_out: np.ndarray,
    ):
        self.embedding = embedding
        self.fwd = fwd
        self.bwd = bwd
        self.w_out = w_out
        self.b_out = b_out

    def arrays(self):
        """(name, array) pairs in the fixed serialization order."""
        return [
            ("embedding", self.embedding),
            ("fwd.w_x", self.fwd.w_x),
            ("fwd.w_h", self.fwd.w_h),
            ("fwd.b", self.fwd.b),
            ("bwd.w_x", self.bwd.w_x),
            ("bwd.w_h", self.bwd.w_h),
            ("bwd.b", self.bwd.b),
            ("w_out", self.w_out),
            ("b_out", self.b_out),
        ]

    def num_parameters(self) -> int:
        return sum(arr.size for _, arr in self.arrays())

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.embedding.copy(),
            self.fwd.copy(),
            self.bwd.copy(),
            self.w_out.copy(),
            self.b_out.copy(),
        )

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(
            self.embedding.astype(dtype),
            self.fwd.astype(dtype),
            self.bwd.astype(dtype),
            self.w_out.astype(dtype),
            self.b_out.astype(dtype),
        )

    @classmethod
    def zeros(cls, hp: Hyperparams, dtype=np.float32) -> "ModelParams":
        return cls(
            np.zeros((hp.vocab_size, hp.embed_dim), dtype=dtype),
            LstmWeights.zeros(hp.hidden_dim, hp.embed_dim, dtype=dtype),
            LstmWeights.zeros(hp.hidden_dim, hp.embed_dim, dtype=dtype),
            np.zeros((hp.num_classes, 2 * hp.hidden_dim), dtype=dtype),
            np.zeros(hp.num_classes, dtype=dtype),
        )


@dataclass
class Prediction:
    label: UrlClass
    confidence: float
    probabilities: list[float]


@dataclass
class ForwardTape:
    feat: np.ndarray
    mask: np.ndarray | None
    logits: np.ndarray


def init_params(hp: Hyperparams, dtype=np.float32) -> ModelParams:
    """Seeded Glorot-uniform weights; biases zero except forget gates at 1.0."""
    rng = np.random.default_rng(hp.seed)

    def glorot(shape, fan_in, fan_out):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, shape).astype(dtype)

    hid, emb = hp.hidden_dim, hp.embed_dim
    embedding = glorot((hp.vocab_size, emb), hp.vocab_size, emb)
    directions = []
    for _ in range(2):
        w_x = glorot((4 * hid, emb), emb, hid)
        w_h = glorot((4 * hid, hid), hid, hid)
        b = np.zeros(4 * hid, dtype=dtype)
        b[hid : 2 * hid] = 1.0  # forget gate bias
        directions.append(LstmWeights(w_x, w_h, b))
    w_out = glorot((hp.num_classes, 2 * hid), 2 * hid, hp.num_classes)
    b_out = np.zeros(hp.num_classes, dtype=dtype)
    return ModelParams(embedding, directions[0], directions[1], w_out, b_out)


def dropout_mask(hp: Hyperparams, dropout_seed: int, dtype) -> np.ndarray:
    """Inverted-dropout mask over the 2H feature vector, one draw per seed.

    The same mask applies to every example passed through a single train-mode
    call, so loss and gradients are invariant under duplicating a batch.
    """
    width = 2 * hp.hidden_dim
    if hp.dropout_rate == 0.0:
        return np.ones(width, dtype=dtype)
    rng = np.random.default_rng(dropout_seed)
    keep = rng.random(width) >= hp.dropout_rate
    return (keep / (1.0 - hp.dropout_rate)).astype(dtype)


def forward(
    params: ModelParams,
    hp: Hyperparams,
    seq: EncodedSequence,
    mode: str = "infer",
    dropout_seed: int = 0,
) -> tuple[np.ndarray, ForwardTape]:
    """Reference single-sequence forward pass. Returns (probs, tape).

    Runs both LSTM directions over the valid timesteps only, concatenates the
    final hidden states, applies inverted dropout in train mode, then the
    dense softmax head.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown mode {mode!r}")
    if seq.valid_len < 1:
        raise ValueError("sequence has no valid timesteps")
    xs = params.embedding[seq.indices[: seq.valid_len]]
    fwd_state, _ = lstm_sequence(xs, params.fwd, "forward")
    bwd_state, _ = lstm_sequence(xs, params.bwd, "backward")
    feat = np.concatenate([fwd_state.h, bwd_state.h])
    mask = None
    if mode == "train":
        mask = dropout_mask(hp, dropout_seed, feat.dtype)
        feat = feat * mask
    logits = params.w_out @ feat + params.b_out
    return softmax(logits), ForwardTape(feat=feat, mask=mask, logits=logits)


def _sorted_batch(sequences: list[EncodedSequence]):
    """Sort a batch by valid length descending (stable) and build the index
    matrices for both directions. Returns (order, idx, idx_rev, lens)."""
    lens = np.array([s.valid_len for s in sequences], dtype=np.int64)
    if np.any(lens < 1):
        raise ValueError("sequence has no valid timesteps")
    order = np.argsort(-lens, kind="stable")
    lens = lens[order]
    steps = int(lens[0])
    idx = np.stack([sequences[j].indices[:steps] for j in order])
    cols = np.arange(steps)[None, :]
    rev_cols = np.clip(lens[:, None] - 1 - cols, 0, steps - 1)
    idx_rev = np.where(
        cols < lens[:, None], np.take_along_axis(idx, rev_cols, axis=1), PAD_INDEX
    )
    return order, idx, idx_rev, lens


def _batch_logits(params, idx, idx_rev, lens, mask, want_tape):
    x_fwd = params.embedding[idx]
    x_bwd = params.embedding[idx_rev]
    h_fwd, _, tape_f = lstm_batch_forward(x_fwd, lens, params.fwd, want_tape)
    h_bwd, _, tape_b = lstm_batch_forward(x_bwd, lens, params.bwd, want_tape)
    feat = np.concatenate([h_fwd, h_bwd], axis=1)
    feat_d = feat * mask if mask is not None else feat
    logits = feat_d @ params.w_out.T + params.b_out
    return logits, feat_d, (x_fwd, x_bwd, tape_f, tape_b)


def backward(
    params: ModelParams,
    hp: Hyperparams,
    batch: list[tuple[EncodedSequence, UrlClass]],
    dropout_seed: int = 0,
) -> tuple[ModelParams, float]:
    """Mean cross-entropy over the batch and its gradients w.r.t. every
    parameter, via BPTT through both directions. Vectorized over the batch.

    The dropout mask is replayed from dropout_seed (one shared mask for the
    whole call). Gradients come back in a ModelParams-shaped container.
    """
    if not batch:
        raise ValueError("empty batch")
    n = len(batch)
    order, idx, idx_rev, lens = _sorted_batch([seq for seq, _ in batch])
    labels = np.array([int(batch[j][1]) for j in order])

    dtype = params.embedding.dtype
    mask = dropout_mask(hp, dropout_seed, dtype) if hp.dropout_rate > 0 else None
    logits, feat_d, (x_fwd, x_bwd, tape_f, tape_b) = _batch_logits(
        params, idx, idx_rev, lens, mask, want_tape=True
    )
    probs = softmax(logits)
    p_true = np.maximum(probs[np.arange(n), labels], 1e-12)
    mean_loss = float(np.mean(-np.log(p_true)))

    dlogits = probs.astype(dtype, copy=True)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n

    grads = ModelParams.zeros(hp, dtype=dtype)
    grads.w_out[...] = dlogits.T @ feat_d
    grads.b_out[...] = dlogits.sum(axis=0)
    dfeat = dlogits @ params.w_out
    if mask is not None:
        dfeat = dfeat * mask
    hid = hp.hidden_dim
    zero_c = np.zeros((n, hid), dtype=dtype)
    dx_f, dw_f = lstm_batch_backward(dfeat[:, :hid], zero_c, x_fwd, params.fwd, tape_f)
    dx_b, dw_b = lstm_batch_backward(dfeat[:, hid:], zero_c, x_bwd, params.bwd, tape_b)
    grads.fwd = dw_f
    grads.bwd = dw_b
    emb = hp.embed_dim
    np.add.at(grads.embedding, idx.ravel(), dx_f.reshape(-1, emb))
    np.add.at(grads.embedding, idx_rev.ravel(), dx_b.reshape(-1, emb))
    return grads, mean_loss


def infer_batch(
    params: ModelParams,
    hp: Hyperparams,
    sequences: list[EncodedSequence],
    chunk: int = 512,
) -> np.ndarray:
    """Inference probabilities for many sequences, in input order."""
    out = np.empty((len(sequences), hp.num_classes), dtype=params.embedding.dtype)
    for start in range(0, len(sequences), chunk):
        part = sequences[start : start + chunk]
        order, idx, idx_rev, lens = _sorted_batch(part)
        logits, _, _ = _batch_logits(params, idx, idx_rev, lens, None, False)
        out[start + order] = softmax(logits)
    return out


def predict(params: ModelParams, hp: Hyperparams, vocab: Vocabulary, url: str) -> Prediction:
    """Encode a URL and classify it; ties break toward the lowest class code."""
    seq = encode_url(url, vocab, hp.max_len)
    probs, _ = forward(params, hp, seq, mode="infer")
    label = UrlClass(int(np.argmax(probs)))
    probabilities = [float(p) for p in probs]
    return Prediction(label=label, confidence=max(probabilities), probabilities=probabilities)


# ---------------------------------------------------------------------------
# Model file format (all little-endian):
#   "BLSM" | u32 version | 7 x u32 hyperparams | vocabulary block |
#   parameter arrays as f32 | u32 CRC32 of everything before it
# Hyperparam slots: vocab_size, embed_dim, hidden_dim, num_classes, max_len,
# dropout_rate (f32 bit pattern), seed. The vocabulary block is a u32 entry
# count followed by (u32 codepoint, u32 index) pairs sorted by codepoint.
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sI")
_HP = struct.Struct("<7I")
_U32 = struct.Struct("<I")


def _param_sizes(hp: Hyperparams) -> list[tuple[str, tuple[int, ...]]]:
    hid, emb = hp.hidden_dim, hp.embed_dim
    lstm = [("w_x", (4 * hid, emb)), ("w_h", (4 * hid, hid)), ("b", (4 * hid,))]
    return (
        [("embedding", (hp.vocab_size, emb))]
        + [(f"fwd.{n}", s) for n, s in lstm]
        + [(f"bwd.{n}", s) for n, s in lstm]
        + [("w_out", (hp.num_classes, 2 * hid)), ("b_out", (hp.num_classes,))]
    )


def save(params: ModelParams, hp: Hyperparams, vocab: Vocabulary, path: str) -> None:
    """Write the model file; f32 little-endian arrays, CRC32 trailer."""
    if vocab.size != hp.vocab_size:
        raise ShapeError(
            f"vocabulary size {vocab.size} does not match hyperparams {hp.vocab_size}"
        )
    blob = bytearray()
    blob += _HEADER.pack(MAGIC, FORMAT_VERSION)
    rate_bits = _U32.unpack(struct.pack("<f", hp.dropout_rate))[0]
    blob += _HP.pack(
        hp.vocab_size, hp.embed_dim, hp.hidden_dim, hp.num_classes,
        hp.max_len, rate_bits, hp.seed,
    )
    entries = sorted((ord(ch), idx) for ch, idx in vocab.chars.items())
    blob += _U32.pack(len(entries))
    for code, idx in entries:
        blob += _U32.pack(code) + _U32.pack(idx)
    for (name, shape), (_, arr) in zip(_param_sizes(hp), params.arrays()):
        if arr.shape != shape:
            raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")
        blob += arr.astype("<f4", copy=False).tobytes()
    blob += _U32.pack(zlib.crc32(bytes(blob)))
    with open(path, "wb") as fh:
        fh.write(blob)


def load(path: str) -> tuple[ModelParams, Hyperparams, Vocabulary]:
    """Read a model file back; every corruption mode is reported distinctly."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise Truncated(f"file is only {len(data)} bytes")
    magic, version = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, found {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"format version {version}, expected {FORMAT_VERSION}")
    if len(data) < _HEADER.size + _HP.size + _U32.size:
        raise Truncated("file ends inside the header")
    raw_hp = _HP.unpack_from(data, _HEADER.size)
    try:
        hp = Hyperparams(
            vocab_size=raw_hp[0],
            embed_dim=raw_hp[1],
            hidden_dim=raw_hp[2],
            num_classes=raw_hp[3],
            max_len=raw_hp[4],
            dropout_rate=struct.unpack("<f", _U32.pack(raw_hp[5]))[0],
            seed=raw_hp[6],
        )
    except ValueError as exc:
        raise ShapeError(f"invalid hyperparameters: {exc}") from exc
    offset = _HEADER.size + _HP.size
    (count,) = _U32.unpack_from(data, offset)
    offset += _U32.size
    if count + 2 != hp.vocab_size:
        raise ShapeError(
            f"vocabulary holds {count} characters but vocab_size is {hp.vocab_size}"
        )
    total_floats = sum(int(np.prod(shape)) for _, shape in _param_sizes(hp))
    expected = offset + 8 * count + 4 * total_floats + _U32.size
    if len(data) < expected:
        raise Truncated(f"needed {expected} bytes, file has {len(data)}")
    if len(data) > expected:
        raise ShapeError(f"{len(data) - expected} bytes of trailing data")
    (stored_crc,) = _U32.unpack_from(data, len(data) - 4)
    actual_crc = zlib.crc32(data[:-4])
    if stored_crc != actual_crc:
        raise ChecksumMismatch(f"stored {stored_crc:#010x}, computed {actual_crc:#010x}")

    chars: dict[str, int] = {}
    for _ in range(count):
        code, idx = struct.unpack_from("<II", data, offset)
        offset += 8
        if code >= 0x110000:
            raise ShapeError(f"invalid codepoint {code:#x} in vocabulary")
        chars[chr(code)] = idx
    try:
        vocab = Vocabulary(chars)
    except ValueError as exc:
        raise ShapeError(f"invalid vocabulary: {exc}") from exc

    arrays = []
    for name, shape in _param_sizes(hp):
        size = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f4", count=size, offset=offset)
        arrays.append(arr.reshape(shape).copy())
        offset += 4 * size
    params = ModelParams(
        arrays[0],
        LstmWeights(arrays[1], arrays[2], arrays[3]),
        LstmWeights(arrays[4], arrays[5], arrays[6]),
        arrays[7],
        arrays[8],
    )
    return params, hp, vocab


def params_to_vector(params: ModelParams) -> np.ndarray:
    """Flatten all parameters to one float64 vector (gradient-check helper)."""
    return np.concatenate([arr.astype(np.float64).ravel() for _, arr in params.arrays()])


def params_from_vector(template: ModelParams, vec: np.ndarray) -> ModelParams:
    """Inverse of params_to_vector, using template shapes and vec's dtype."""
    out = []
    pos = 0
    for _, arr in template.arrays():
        out.append(vec[pos : pos + arr.size].reshape(arr.shape))
        pos += arr.size
    if pos != vec.size:
        raise ValueError(f"vector has {vec.size} entries, expected {pos}")
    return ModelParams(
        out[0],
        LstmWeights(out[1], out[2], out[3]),
        LstmWeights(out[4], out[5], out[6]),
        out[7],
        out[8],
    )
