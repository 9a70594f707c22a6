"""Binary summary-bank files (.dxsm).

Layout, all little-endian:

    bytes 0..3   magic  b"DXSM"
    byte  4      format version (currently 1)
    u64          shard count
    per shard:
        u64 r, u64 D, f64 tau, f64 lambda, i64 class_id (-1 = untagged),
        f64[r*r]  transform W (row-major)
        f64[r*D]  landmarks
        f64[r*D]  summary A
        f64[r]    summary b
        u64       positive count

Round-trips are bit-exact: float payloads are written with tobytes() and
read back with frombuffer(). The denominator offset epsilon is runtime
configuration, not part of the file; load_summary_bank takes it as an
argument. Distinct failure modes raise distinct exception types.
"""

import struct

import numpy as np

from .nystrom import (AttractiveSummary, NystromBasis, ShardedSummaryBank,
                      DEFAULT_EPSILON, _basis_id)

MAGIC = b"DXSM"
VERSION = 1


class SummaryBankError(Exception):
    """Base class for summary-bank file errors."""


class BankMagicError(SummaryBankError):
    pass


class BankVersionError(SummaryBankError):
    pass


class BankTruncatedError(SummaryBankError):
    pass


class BankPayloadError(SummaryBankError):
    """Payload decoded but is invalid (non-finite values, bad sizes)."""


def save_summary_bank(bank: ShardedSummaryBank, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", VERSION))
        fh.write(struct.pack("<Q", len(bank.shards)))
        for basis, summary in bank.shards:
            class_id = -1 if summary.class_id is None else int(summary.class_id)
            fh.write(struct.pack("<QQddq", basis.r, basis.dim, basis.tau,
                                 basis.lam, class_id))
            fh.write(np.ascontiguousarray(basis.transform, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(basis.landmarks, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(summary.a_p, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(summary.b_p, dtype="<f8").tobytes())
            fh.write(struct.pack("<Q", summary.count))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise BankTruncatedError(
                f"file ends at byte {len(self.blob)}, needed {self.pos + n}")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int, shape) -> np.ndarray:
        raw = self.take(8 * count)
        return np.frombuffer(raw, dtype="<f8", count=count).reshape(shape).copy()


def load_summary_bank(path, epsilon=DEFAULT_EPSILON) -> ShardedSummaryBank:
    with open(path, "rb") as fh:
        blob = fh.read()
    rd = _Reader(blob)
    magic = rd.take(4) if len(blob) >= 4 else blob
    if magic != MAGIC:
        raise BankMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = rd.unpack("<B")
    if version != VERSION:
        raise BankVersionError(f"unsupported format version {version}")
    (nshards,) = rd.unpack("<Q")
    if nshards < 1:
        raise BankPayloadError("bank holds no shards")
    shards = []
    for _ in range(nshards):
        r, d, tau, lam, class_id = rd.unpack("<QQddq")
        if r < 1 or d < 1:
            raise BankPayloadError(f"invalid shard sizes r={r}, D={d}")
        transform = rd.floats(r * r, (r, r))
        lmarks = rd.floats(r * d, (r, d))
        a_p = rd.floats(r * d, (r, d))
        b_p = rd.floats(r, (r,))
        (count,) = rd.unpack("<Q")
        for name, arr in (("transform", transform), ("landmarks", lmarks),
                          ("A", a_p), ("b", b_p)):
            if not np.all(np.isfinite(arr)):
                raise BankPayloadError(f"non-finite values in shard {name} payload")
        if not (np.isfinite(tau) and tau > 0 and np.isfinite(lam) and lam >= 0):
            raise BankPayloadError(f"invalid shard parameters tau={tau}, lambda={lam}")
        basis = NystromBasis(lmarks, transform, tau, lam, _basis_id(lmarks, tau, lam))
        summary = AttractiveSummary(a_p, b_p, int(count), basis.basis_id,
                                    None if class_id == -1 else int(class_id))
        shards.append((basis, summary))
    if rd.pos != len(blob):
        raise BankPayloadError(f"{len(blob) - rd.pos} trailing bytes after last shard")
    return ShardedSummaryBank(shards, epsilon=epsilon)
