"""Recording interchange files.

Text form::

    #ivr1,rate=<Sps>,mode=<complex|real>,channels=3,t0=<s>
    t,ch1_re[,ch1_im],ch2_re[,ch2_im],ch3_re[,ch3_im]
    ...

Binary twin (little-endian): ``b"IVR1"``, uint32 header length, the header
line as UTF-8, uint64 row count, uint32 column count, then float64 rows in
the same field order as the text form.  Floats are written with ``repr`` so
both forms round-trip bit-exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .synthesis import BasebandRecording

MAGIC = b"IVR1"
_MODE_TAG = {"complex_iq": "complex", "real": "real"}
_TAG_MODE = {v: k for k, v in _MODE_TAG.items()}


def header_line(rec: BasebandRecording) -> str:
    return (
        f"#ivr1,rate={rec.sample_rate!r},mode={_MODE_TAG[rec.mode]},"
        f"channels=3,t0={rec.t0!r}"
    )


def parse_header(line: str) -> dict:
    line = line.strip()
    if not line.startswith("#ivr1"):
        raise InvalidArgument(f"not an ivr1 recording header: {line[:40]!r}")
    fields = {}
    for item in line.split(",")[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidArgument(f"malformed header field {item!r}")
        fields[key] = value
    try:
        out = {
            "sample_rate": float(fields["rate"]),
            "mode": _TAG_MODE[fields["mode"]],
            "t0": float(fields["t0"]),
        }
    except KeyError as exc:
        raise InvalidArgument(f"header missing or invalid field {exc}") from None
    if fields.get("channels") != "3":
        raise InvalidArgument("only 3-channel recordings are supported")
    return out


def to_table(rec: BasebandRecording) -> np.ndarray:
    cols = [rec.times]
    for ch in rec.channels:
        cols.append(np.real(ch))
        if rec.mode == "complex_iq":
            cols.append(np.imag(ch))
    return np.column_stack(cols)


def from_table(table: np.ndarray, meta: dict) -> BasebandRecording:
    complex_mode = meta["mode"] == "complex_iq"
    width = 7 if complex_mode else 4
    table = np.asarray(table, float).reshape(-1, width)
    data = table[:, 1:]
    if complex_mode:
        channels = data[:, 0::2] + 1j * data[:, 1::2]
    else:
        channels = data
    return BasebandRecording(
        sample_rate=meta["sample_rate"], t0=meta["t0"], channels=channels.T.copy(), mode=meta["mode"]
    )


def write_csv(rec: BasebandRecording, path) -> Path:
    path = Path(path)
    table = to_table(rec)
    with path.open("w") as fh:
        fh.write(header_line(rec) + "\n")
        for row in table:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def read_csv(path) -> BasebandRecording:
    path = Path(path)
    with path.open() as fh:
        meta = parse_header(fh.readline())
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return from_table(np.array(rows, float), meta)


def write_binary(rec: BasebandRecording, path) -> Path:
    path = Path(path)
    header = header_line(rec).encode()
    table = np.ascontiguousarray(to_table(rec), dtype="<f8")
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(struct.pack("<QI", table.shape[0], table.shape[1]))
        fh.write(table.tobytes())
    return path


def read_binary(path) -> BasebandRecording:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise InvalidArgument("not an IVR1 binary recording")
    (hlen,) = struct.unpack_from("<I", raw, 4)
    meta = parse_header(raw[8 : 8 + hlen].decode())
    off = 8 + hlen
    rows, cols = struct.unpack_from("<QI", raw, off)
    off += 12
    expected = rows * cols * 8
    if len(raw) - off != expected:
        raise InvalidArgument(
            f"binary payload is {len(raw) - off} bytes, header implies {expected}"
        )
    table = np.frombuffer(raw, dtype="<f8", offset=off).reshape(rows, cols)
    return from_table(table, meta)


def load(path) -> BasebandRecording:
    """Read either format, detected from the leading bytes."""
    with Path(path).open("rb") as fh:
        head = fh.read(4)
    return read_binary(path) if head == MAGIC else read_csv(path)
