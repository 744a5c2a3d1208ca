"""Parameter checkpoints: a text manifest plus a little-endian float64 blob.

Manifest lines::

    rng_seed=7
    name=dec.W shape=96,64 offset=0 count=6144

``offset`` and ``count`` are in elements of the blob.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .autodiff import NumericsError
from .params import ParamStore


def save_params(store: ParamStore, prefix: str | Path) -> None:
    prefix = Path(prefix)
    lines = [f"rng_seed={store.rng_seed}"]
    offset = 0
    chunks = []
    for name in store:
        v = store.value(name)
        lines.append(f"name={name} shape={','.join(map(str, v.shape))} offset={offset} count={v.size}")
        chunks.append(v.astype("<f8").ravel())
        offset += v.size
    blob = np.concatenate(chunks) if chunks else np.zeros(0, dtype="<f8")
    prefix.with_suffix(".manifest").write_text("\n".join(lines) + "\n")
    prefix.with_suffix(".bin").write_bytes(blob.tobytes())


def load_params(prefix: str | Path) -> ParamStore:
    prefix = Path(prefix)
    lines = prefix.with_suffix(".manifest").read_text().splitlines()
    blob = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<f8")
    if not lines or not lines[0].startswith("rng_seed="):
        raise NumericsError(f"{prefix}: malformed manifest header")
    store = ParamStore(int(lines[0].split("=", 1)[1]))
    for line in lines[1:]:
        if not line.strip():
            continue
        fields = dict(kv.split("=", 1) for kv in line.split())
        shape = tuple(int(s) for s in fields["shape"].split(","))
        off, count = int(fields["offset"]), int(fields["count"])
        if count != int(np.prod(shape)) or off + count > blob.size:
            raise NumericsError(f"{prefix}: bad extent for {fields['name']}")
        store.add(fields["name"], blob[off:off + count].reshape(shape).astype(np.float64))
    return store
