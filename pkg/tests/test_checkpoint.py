"""Checkpoint save/load: byte layout, round trips, damage detection."""
import numpy as np
import pytest

from pcup.checkpoint import (CHECKSUM_BYTES, MAGIC, Checkpoint,
                             load_checkpoint, save_checkpoint)
from pcup.errors import (BadMagicError, CheckpointError, ChecksumMismatchError,
                         TruncatedFileError, VersionUnsupportedError)
from pcup.network import init_params

from conftest import TOY_DECODER, TOY_ENCODER


def toy_checkpoint(seed=3):
    enc, dec = init_params(input_dim=3, n_out=6, seed=seed,
                           encoder_dims=TOY_ENCODER,
                           decoder_hidden=TOY_DECODER, dtype=np.float32)
    config = {"training": {"learning_rate": 5e-4, "epochs": 3},
              "condition": {"af": 8, "sampling": "uniform"}}
    return Checkpoint(encoder=enc, decoder=dec, config=config, seed=seed)


def test_round_trip_bit_exact(tmp_path):
    ckpt = toy_checkpoint()
    # mutate away from init so the round trip is not trivially symmetric
    ckpt.encoder.layers[0].weight += 0.25
    ckpt.decoder.layers[-1].bias -= 1.5
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, ckpt)
    back = load_checkpoint(path)
    for a, b in zip(ckpt.encoder.layers, back.encoder.layers):
        np.testing.assert_array_equal(a.weight, b.weight)
        np.testing.assert_array_equal(a.bias, b.bias)
        np.testing.assert_array_equal(a.gamma, b.gamma)
        np.testing.assert_array_equal(a.beta, b.beta)
        np.testing.assert_array_equal(a.running_mean, b.running_mean)
        np.testing.assert_array_equal(a.running_var, b.running_var)
    for a, b in zip(ckpt.decoder.layers, back.decoder.layers):
        np.testing.assert_array_equal(a.weight, b.weight)
        np.testing.assert_array_equal(a.bias, b.bias)
    assert back.config == ckpt.config
    assert back.seed == ckpt.seed
    assert back.input_dim == 3 and back.n_out == 6


def test_save_is_byte_deterministic(tmp_path):
    ckpt = toy_checkpoint()
    save_checkpoint(tmp_path / "a.ckpt", ckpt)
    save_checkpoint(tmp_path / "b.ckpt", ckpt)
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_loaded_params_run_identically(tmp_path):
    from pcup.network import upsample
    ckpt = toy_checkpoint()
    x = np.random.default_rng(0).standard_normal((5, 3)).astype(np.float32)
    before = upsample(ckpt.encoder, ckpt.decoder, x)
    save_checkpoint(tmp_path / "m.ckpt", ckpt)
    back = load_checkpoint(tmp_path / "m.ckpt")
    after = upsample(back.encoder, back.decoder, x)
    np.testing.assert_array_equal(before.data, after.data)


def test_rejects_wrong_magic(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, toy_checkpoint())
    data = bytearray(path.read_bytes())
    data[:4] = b"JUNK"
    path.write_bytes(bytes(data))
    with pytest.raises(BadMagicError):
        load_checkpoint(path)


def test_rejects_unknown_version(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, toy_checkpoint())
    data = bytearray(path.read_bytes())
    data[4] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(VersionUnsupportedError):
        load_checkpoint(path)


def test_rejects_truncation(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, toy_checkpoint())
    data = path.read_bytes()
    short = tmp_path / "short.ckpt"
    short.write_bytes(data[:10])
    with pytest.raises(TruncatedFileError):
        load_checkpoint(short)
    # a chopped tail leaves stale tensor bytes where the checksum was
    chopped = tmp_path / "chopped.ckpt"
    chopped.write_bytes(data[:-40])
    with pytest.raises(ChecksumMismatchError):
        load_checkpoint(chopped)


def test_rejects_flipped_bytes_everywhere(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, toy_checkpoint())
    data = path.read_bytes()
    rng = np.random.default_rng(99)
    hurt = tmp_path / "hurt.ckpt"
    for _ in range(50):
        pos = int(rng.integers(0, len(data)))
        flip = bytearray(data)
        flip[pos] ^= 1 + int(rng.integers(255))
        hurt.write_bytes(bytes(flip))
        with pytest.raises(CheckpointError):
            load_checkpoint(hurt)


def test_rejects_appended_garbage(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, toy_checkpoint())
    path.write_bytes(path.read_bytes() + b"\x00" * 16)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_checksum_is_suffix(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, toy_checkpoint())
    data = path.read_bytes()
    import hashlib
    assert data[-CHECKSUM_BYTES:] == hashlib.sha256(
        data[:-CHECKSUM_BYTES]).digest()[:CHECKSUM_BYTES]
