import numpy as np
import pytest

from driftx import (build_basis, build_summary, load_summary_bank,
                    save_summary_bank)
from driftx.bankio import (BankMagicError, BankPayloadError, BankTruncatedError,
                           BankVersionError)
from driftx.nystrom import ShardedSummaryBank
from driftx.rng import prng_stream


def sample_bank(seed=0, shard_count=3):
    rng = prng_stream(seed)
    pts = rng.uniform(-2, 2, size=(45, 2))
    parts = np.array_split(np.arange(45), shard_count)
    shards = []
    for s, part in enumerate(parts):
        basis = build_basis(pts[part[:4]], 0.5, 1e-6)
        shards.append((basis, build_summary(basis, pts[part], class_id=s)))
    return ShardedSummaryBank(shards)


def test_round_trip_bit_exact(tmp_path):
    bank = sample_bank()
    path = tmp_path / "b.dxsm"
    save_summary_bank(bank, path)
    back = load_summary_bank(path)
    assert len(back) == len(bank)
    assert back.epsilon == bank.epsilon
    for (b1, s1), (b2, s2) in zip(bank.shards, back.shards):
        assert b1.landmarks.tobytes() == b2.landmarks.tobytes()
        assert b1.transform.tobytes() == b2.transform.tobytes()
        assert (b1.tau, b1.lam, b1.basis_id) == (b2.tau, b2.lam, b2.basis_id)
        assert s1.a_p.tobytes() == s2.a_p.tobytes()
        assert s1.b_p.tobytes() == s2.b_p.tobytes()
        assert (s1.count, s1.class_id) == (s2.count, s2.class_id)


def test_save_load_save_is_byte_identical(tmp_path):
    bank = sample_bank(seed=1)
    p1, p2 = tmp_path / "a.dxsm", tmp_path / "b.dxsm"
    save_summary_bank(bank, p1)
    save_summary_bank(load_summary_bank(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_untagged_shard_round_trips_none(tmp_path):
    rng = prng_stream(2)
    pts = rng.uniform(-1, 1, size=(10, 3))
    basis = build_basis(pts[:3], 0.5)
    bank = ShardedSummaryBank([(basis, build_summary(basis, pts))])
    path = tmp_path / "b.dxsm"
    save_summary_bank(bank, path)
    assert load_summary_bank(path).shards[0][1].class_id is None


def test_corrupt_magic(tmp_path):
    path = tmp_path / "b.dxsm"
    save_summary_bank(sample_bank(), path)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(BankMagicError):
        load_summary_bank(path)


def test_unsupported_version(tmp_path):
    path = tmp_path / "b.dxsm"
    save_summary_bank(sample_bank(), path)
    blob = bytearray(path.read_bytes())
    blob[4] = 99
    path.write_bytes(bytes(blob))
    with pytest.raises(BankVersionError):
        load_summary_bank(path)


def test_truncation_mid_payload(tmp_path):
    path = tmp_path / "b.dxsm"
    save_summary_bank(sample_bank(), path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(BankTruncatedError):
        load_summary_bank(path)


def test_nonfinite_payload(tmp_path):
    path = tmp_path / "b.dxsm"
    bank = sample_bank(shard_count=1)
    save_summary_bank(bank, path)
    blob = bytearray(path.read_bytes())
    # overwrite the first transform float with NaN
    header = 4 + 1 + 8 + (8 + 8 + 8 + 8 + 8)
    blob[header:header + 8] = np.float64(np.nan).tobytes()
    path.write_bytes(bytes(blob))
    with pytest.raises(BankPayloadError):
        load_summary_bank(path)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "b.dxsm"
    save_summary_bank(sample_bank(), path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(BankPayloadError):
        load_summary_bank(path)


def test_short_file_is_magic_error(tmp_path):
    path = tmp_path / "b.dxsm"
    path.write_bytes(b"DX")
    with pytest.raises(BankMagicError):
        load_summary_bank(path)
