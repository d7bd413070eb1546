"""Binary model checkpoints.

Layout, all integers little-endian:

    bytes 0..3    magic b"PCUP"
    bytes 4..7    format version (u32), currently 1
    bytes 8..11   header length H (u32)
    H bytes       header: u32 input_dim, u32 n_out, u64 seed,
                  u32 encoder layer count + u32 per-layer width,
                  u32 decoder layer count + u32 per-layer width,
                  u32 config length + that many bytes of JSON (the
                  training configuration echoed verbatim)
    tensors       float32 row-major, in a fixed order: per encoder layer
                  weight, bias, gamma, beta, running_mean, running_var;
                  then per decoder layer weight, bias
    last 8 bytes  first 8 bytes of SHA-256 over everything before them

Loading verifies magic, version, declared sizes and the checksum before
touching any tensor, so a flipped byte or a lost tail is always caught.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import (BadMagicError, ChecksumMismatchError,
                     TruncatedFileError, VersionUnsupportedError)
from .network import (DecoderParams, DenseLayerParams, EncoderParams,
                      PointLayerParams)

MAGIC = b"PCUP"
VERSION = 1
CHECKSUM_BYTES = 8

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    encoder: EncoderParams
    decoder: DecoderParams
    config: dict
    seed: int

    @property
    def input_dim(self) -> int:
        return self.encoder.input_dim

    @property
    def n_out(self) -> int:
        return self.decoder.n_out


def _tensors(ckpt: Checkpoint):
    for L in ckpt.encoder.layers:
        yield from (L.weight, L.bias, L.gamma, L.beta,
                    L.running_mean, L.running_var)
    for L in ckpt.decoder.layers:
        yield from (L.weight, L.bias)


def save_checkpoint(path: PathLike, ckpt: Checkpoint) -> None:
    config_bytes = json.dumps(ckpt.config, sort_keys=True,
                              separators=(",", ":")).encode("utf-8")
    enc_dims = [L.weight.shape[1] for L in ckpt.encoder.layers]
    dec_dims = [L.weight.shape[1] for L in ckpt.decoder.layers]
    header = struct.pack("<IIQ", ckpt.input_dim, ckpt.n_out, ckpt.seed)
    header += struct.pack(f"<I{len(enc_dims)}I", len(enc_dims), *enc_dims)
    header += struct.pack(f"<I{len(dec_dims)}I", len(dec_dims), *dec_dims)
    header += struct.pack("<I", len(config_bytes)) + config_bytes
    blob = MAGIC + struct.pack("<II", VERSION, len(header)) + header
    parts = [blob]
    for tensor in _tensors(ckpt):
        parts.append(np.ascontiguousarray(tensor, dtype="<f4").tobytes())
    body = b"".join(parts)
    digest = hashlib.sha256(body).digest()[:CHECKSUM_BYTES]
    Path(path).write_bytes(body + digest)


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFileError(
                f"{self.what}: ends at byte {len(self.data)}, "
                f"needed {self.pos + n}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def load_checkpoint(path: PathLike) -> Checkpoint:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{path}: not a checkpoint file")
    r = _Reader(data, str(path))
    r.take(len(MAGIC))
    version = r.u32()
    if version != VERSION:
        raise VersionUnsupportedError(
            f"{path}: format version {version}, supported: {VERSION}")
    # checksum first, so a damaged header is never parsed
    if len(data) < r.pos + 4 + CHECKSUM_BYTES:
        raise TruncatedFileError(f"{path}: too short to be a checkpoint")
    digest = hashlib.sha256(data[:-CHECKSUM_BYTES]).digest()[:CHECKSUM_BYTES]
    if digest != data[-CHECKSUM_BYTES:]:
        raise ChecksumMismatchError(f"{path}: checksum mismatch")
    header_len = r.u32()
    header_end = r.pos + header_len
    input_dim = r.u32()
    n_out = r.u32()
    seed = r.u64()
    enc_dims = [r.u32() for _ in range(r.u32())]
    dec_dims = [r.u32() for _ in range(r.u32())]
    config_len = r.u32()
    config = json.loads(r.take(config_len).decode("utf-8"))
    if r.pos != header_end:
        raise TruncatedFileError(f"{path}: header length does not add up")

    itemsize = 4
    n_floats = 0
    d_in = input_dim
    for d in enc_dims:
        n_floats += d_in * d + 5 * d
        d_in = d
    d_in = enc_dims[-1] if enc_dims else input_dim
    for d in dec_dims:
        n_floats += d_in * d + d
        d_in = d
    expected = r.pos + n_floats * itemsize + CHECKSUM_BYTES
    if len(data) != expected:
        raise TruncatedFileError(
            f"{path}: {len(data)} bytes, layout says {expected}")

    def tensor(shape):
        count = int(np.prod(shape))
        raw = r.take(count * itemsize)
        return np.frombuffer(raw, dtype="<f4").reshape(shape).copy()

    enc_layers = []
    d_in = input_dim
    for d in enc_dims:
        enc_layers.append(PointLayerParams(
            weight=tensor((d_in, d)), bias=tensor((d,)), gamma=tensor((d,)),
            beta=tensor((d,)), running_mean=tensor((d,)),
            running_var=tensor((d,))))
        d_in = d
    dec_layers = []
    d_in = enc_dims[-1] if enc_dims else input_dim
    for d in dec_dims:
        dec_layers.append(DenseLayerParams(weight=tensor((d_in, d)),
                                           bias=tensor((d,))))
        d_in = d
    if dec_dims and dec_dims[-1] != 3 * n_out:
        raise TruncatedFileError(
            f"{path}: final layer width {dec_dims[-1]} does not match "
            f"n_out {n_out}")
    return Checkpoint(encoder=EncoderParams(enc_layers),
                      decoder=DecoderParams(dec_layers, n_out=n_out),
                      config=config, seed=seed)
