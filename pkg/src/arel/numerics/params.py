from __future__ import annotations

from collections import OrderedDict
from typing import Iterator

import numpy as np

from .autodiff import NumericsError, Tape, Var


class ParamStore:
    """Named float64 arrays with same-shaped gradient buffers, in insertion order."""

    def __init__(self, rng_seed: int = 0):
        self.rng_seed = int(rng_seed)
        self._values: "OrderedDict[str, np.ndarray]" = OrderedDict()
        self._grads: "OrderedDict[str, np.ndarray]" = OrderedDict()
        self._rng = np.random.default_rng(self.rng_seed)

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def names(self) -> list[str]:
        return list(self._values)

    def value(self, name: str) -> np.ndarray:
        return self._values[name]

    def grad(self, name: str) -> np.ndarray:
        return self._grads[name]

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self._values:
            raise NumericsError(f"duplicate parameter {name!r}")
        value = np.array(value, dtype=np.float64, copy=True)
        if value.ndim == 0 or 0 in value.shape:
            raise NumericsError(f"parameter {name!r} needs positive extents, got {value.shape}")
        self._values[name] = value
        self._grads[name] = np.zeros_like(value)
        return value

    def glorot(self, name: str, shape: tuple[int, int]) -> np.ndarray:
        fan_out, fan_in = shape
        a = np.sqrt(6.0 / (fan_in + fan_out))
        return self.add(name, self._rng.uniform(-a, a, size=shape))

    def zeros(self, name: str, shape) -> np.ndarray:
        return self.add(name, np.zeros(shape))

    def set(self, name: str, value) -> None:
        value = np.asarray(value, dtype=np.float64)
        if value.shape != self._values[name].shape:
            raise NumericsError(f"{name}: shape {value.shape} != {self._values[name].shape}")
        self._values[name][...] = value

    def zero_grad(self) -> None:
        for g in self._grads.values():
            g.fill(0.0)

    def bind(self, tape: Tape | None) -> dict[str, Var]:
        if tape is None:
            return {n: Var(v) for n, v in self._values.items()}
        return {n: tape.param(self, n) for n in self._values}

    def copy(self) -> "ParamStore":
        out = ParamStore(self.rng_seed)
        for n, v in self._values.items():
            out.add(n, v)
        return out

    def size(self) -> int:
        return int(sum(v.size for v in self._values.values()))

    def flat_values(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self._values.values()])

    def flat_grads(self) -> np.ndarray:
        return np.concatenate([g.ravel() for g in self._grads.values()])

    def locate(self, flat_index: int) -> tuple[str, tuple[int, ...]]:
        """Map a flat coordinate to (name, multi-index)."""
        for n, v in self._values.items():
            if flat_index < v.size:
                return n, np.unravel_index(flat_index, v.shape)
            flat_index -= v.size
        raise IndexError("flat index out of range")

    def check_finite(self) -> None:
        for n, v in self._values.items():
            if not np.all(np.isfinite(v)):
                raise NumericsError(f"parameter {n!r} is not finite")

    def equal(self, other: "ParamStore") -> bool:
        if self.names() != other.names():
            return False
        return all(np.array_equal(self.value(n), other.value(n)) for n in self)
