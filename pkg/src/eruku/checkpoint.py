"""Binary checkpoint format shared by every trained model.

Layout (all integers little-endian):

    magic   6 bytes  "ERUKU1"
    version u32
    cfg_len u64
    config  cfg_len bytes of UTF-8 JSON
    count   u32
    then per tensor:
        name_len u16, name bytes (UTF-8),
        dtype    u8 (0 = float32 LE),
        rank     u8,
        dims     rank x u64,
        data     raw buffer

Tensor names carry section prefixes ("vae.", "ar.", "rec.", "style.")
so several models can live in one file.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = b"ERUKU1"
VERSION = 1
_DTYPE_F32 = 0


def save_checkpoint(path: Path | str, config: dict, tensors: dict[str, np.ndarray]) -> None:
    cfg = json.dumps(config, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", VERSION), struct.pack("<Q", len(cfg)), cfg,
             struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        # np.ascontiguousarray would promote rank-0 to rank-1
        arr = np.asarray(tensors[name], dtype="<f4", order="C")
        nb = name.encode("utf-8")
        parts.append(struct.pack("<H", len(nb)))
        parts.append(nb)
        parts.append(struct.pack("<BB", _DTYPE_F32, arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape) if arr.ndim else b"")
        parts.append(arr.tobytes())
    try:
        Path(path).write_bytes(b"".join(parts))
    except OSError as exc:
        raise CheckpointError(f"failed writing checkpoint {path}: {exc}") from None


def load_checkpoint(path: Path | str) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"failed reading checkpoint {path}: {exc}") from None
    if buf[:6] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {buf[:6]!r}")
    try:
        off = 6
        (version,) = struct.unpack_from("<I", buf, off)
        off += 4
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        (cfg_len,) = struct.unpack_from("<Q", buf, off)
        off += 8
        config = json.loads(buf[off : off + cfg_len].decode("utf-8"))
        off += cfg_len
        (count,) = struct.unpack_from("<I", buf, off)
        off += 4
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", buf, off)
            off += 2
            name = buf[off : off + name_len].decode("utf-8")
            off += name_len
            dtype_code, rank = struct.unpack_from("<BB", buf, off)
            off += 2
            if dtype_code != _DTYPE_F32:
                raise CheckpointError(f"{path}: unknown dtype code {dtype_code} for {name}")
            dims = struct.unpack_from(f"<{rank}Q", buf, off) if rank else ()
            off += 8 * rank
            n = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(buf, dtype="<f4", count=n, offset=off).reshape(dims).copy()
            off += 4 * n
            tensors[name] = arr
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: truncated or corrupt: {exc}") from None
    if off != len(buf):
        raise CheckpointError(f"{path}: {len(buf) - off} trailing bytes")
    return config, tensors


def checkpoint_hash(path: Path | str) -> str:
    h = hashlib.sha256(Path(path).read_bytes())
    return h.hexdigest()[:16]


def section(tensors: dict[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    """Extract one model's tensors, stripping the section prefix."""
    out = {k[len(prefix):]: v for k, v in tensors.items() if k.startswith(prefix)}
    if not out:
        raise CheckpointError(f"no tensors with prefix {prefix!r}")
    return out


def with_prefix(tensors: dict[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    return {prefix + k: v for k, v in tensors.items()}
