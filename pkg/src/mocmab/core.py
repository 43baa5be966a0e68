"""Shared domain types: contexts, reward vectors, the uniform grid partition
of [0,1]^d and per-(cell, arm) running statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

INDEX_MAX = 2**63 - 1
DENSE_LIMIT = 2**24


class InvalidInputError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def make_context(coords: Sequence[float], d: int | None = None) -> np.ndarray:
    """Validate and return a context as a float64 vector in [0,1]^d."""
    x = np.asarray(coords, dtype=np.float64).reshape(-1)
    if x.size < 1:
        raise InvalidInputError("context must have at least one coordinate")
    if d is not None and x.size != d:
        raise InvalidInputError(f"context has dimension {x.size}, expected {d}")
    if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise InvalidInputError(f"context coordinates must lie in [0,1]: {x.tolist()}")
    return x


class RewardVector(NamedTuple):
    dominant: float
    nondominant: float

    def check(self) -> "RewardVector":
        if not (math.isfinite(self.dominant) and math.isfinite(self.nondominant)):
            raise InvalidInputError(f"non-finite reward {tuple(self)}")
        return self


@dataclass(frozen=True)
class CellStats:
    count: int = 0
    mean_dominant: float = 0.0
    mean_nondominant: float = 0.0


def update_stats(s: CellStats, r: RewardVector | Sequence[float]) -> CellStats:
    r1, r2 = float(r[0]), float(r[1])
    if not (math.isfinite(r1) and math.isfinite(r2)):
        raise InvalidInputError(f"non-finite reward ({r1}, {r2})")
    if s.count < 0:
        raise InvalidInputError("count must be non-negative")
    n = s.count
    return CellStats(
        n + 1,
        (s.mean_dominant * n + r1) / (n + 1),
        (s.mean_nondominant * n + r2) / (n + 1),
    )


@dataclass(frozen=True)
class PartitionSpec:
    """Uniform partition of [0,1]^d into m^d half-open boxes of edge 1/m.

    The last cell on each axis is closed at the top so that coordinate 1.0
    belongs to cell m-1. Flat indices are row-major (first axis slowest).
    """

    d: int
    m: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidInputError(f"d must be a positive integer, got {self.d}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidInputError(f"m must be a positive integer, got {self.m}")
        if self.m**self.d > INDEX_MAX:
            raise InvalidInputError(f"m^d = {self.m}^{self.d} exceeds the index range")

    @property
    def n_cells(self) -> int:
        return self.m**self.d

    def axis_indices(self, x: np.ndarray) -> tuple[int, ...]:
        x = make_context(x, self.d)
        return tuple(int(k) for k in np.minimum(np.floor(x * self.m), self.m - 1))

    def ravel(self, idx: Sequence[int]) -> int:
        if len(idx) != self.d or any(not 0 <= k < self.m for k in idx):
            raise InvalidInputError(f"bad axis indices {tuple(idx)} for m={self.m}")
        flat = 0
        for k in idx:
            flat = flat * self.m + int(k)
        return flat

    def unravel(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.n_cells:
            raise InvalidInputError(f"cell index {flat} out of range")
        out = []
        for _ in range(self.d):
            flat, k = divmod(flat, self.m)
            out.append(k)
        return tuple(reversed(out))

    def locate(self, x: Sequence[float]) -> int:
        return self.ravel(self.axis_indices(np.asarray(x, dtype=np.float64)))

    def locate_many(self, X: np.ndarray) -> np.ndarray:
        """Vectorized locate for an (n, d) array of valid contexts."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InvalidInputError(f"expected shape (n, {self.d}), got {X.shape}")
        k = np.minimum(np.floor(X * self.m), self.m - 1).astype(np.int64)
        if self.n_cells <= INDEX_MAX // 2:
            flat = np.zeros(len(X), dtype=np.int64)
            for j in range(self.d):
                flat = flat * self.m + k[:, j]
            return flat
        raise InvalidInputError("partition too large for vectorized location")


def locate(x: Sequence[float], spec: PartitionSpec) -> int:
    return spec.locate(x)


@dataclass(frozen=True)
class HyperParams:
    L: float = 1.0
    alpha: float = 1.0
    m: int = 1
    beta: float = 1.0
    T: int = 1
    num_arms: int = 2
    scale: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidInputError(f"L must be positive, got {self.L}")
        if not 0 < self.alpha <= 1:
            raise InvalidInputError(f"alpha must lie in (0,1], got {self.alpha}")
        if not self.beta > 0:
            raise InvalidInputError(f"beta must be positive, got {self.beta}")
        if not 0 < self.scale <= 1:
            raise InvalidInputError(f"scale must lie in (0,1], got {self.scale}")
        for name in ("m", "T", "num_arms"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {val}")


def margin_of_tolerance(h: HyperParams, d: int) -> float:
    """L * d^(alpha/2) * m^(-alpha): slack from the partition granularity."""
    if d < 1:
        raise InvalidInputError("d must be positive")
    return h.L * d ** (h.alpha / 2) * h.m ** (-h.alpha)


def log_confidence(num_arms: int, m: int, d: int, T: int) -> float:
    """A_{m,T} = 1 + 2 ln(4 K m^d T^(3/2))."""
    return 1.0 + 2.0 * (math.log(4 * num_arms) + d * math.log(m) + 1.5 * math.log(T))


def ceil_root(T: int, p: float) -> int:
    """ceil(T^(1/p)) robust to the root landing a few ulps above an integer."""
    r = T ** (1.0 / p)
    k = round(r)
    if abs(r - k) <= 1e-9 * max(1.0, r):
        return max(1, int(k))
    return max(1, math.ceil(r))


def default_cells_per_axis(T: int, alpha: float, d: int, mode: str = "two_d_optimal") -> int:
    if mode == "two_d_optimal":
        return ceil_root(T, 3 * alpha + d)
    if mode == "pareto_optimal":
        return ceil_root(T, 2 * alpha + d)
    raise InvalidInputError(f"unknown mode {mode!r}")


class CellRows:
    """Maps flat cell indices to rows of a statistics table.

    Dense (identity) when the table is small enough, otherwise rows are
    assigned on first visit and the caller grows its arrays to ``size``.
    """

    def __init__(self, n_cells: int, per_cell: int = 1):
        self.dense = n_cells * per_cell <= DENSE_LIMIT
        self.n_cells = n_cells
        self._rows: dict[int, int] = {}

    @property
    def size(self) -> int:
        return self.n_cells if self.dense else len(self._rows)

    def row(self, cell: int) -> int:
        if self.dense:
            return cell
        r = self._rows.get(cell)
        if r is None:
            r = self._rows[cell] = len(self._rows)
        return r

    def rows(self, cells: np.ndarray) -> np.ndarray:
        if self.dense:
            return cells
        return np.fromiter((self.row(int(c)) for c in cells), dtype=np.int64, count=len(cells))

    def known(self) -> dict[int, int]:
        if self.dense:
            return {c: c for c in range(self.n_cells)}
        return dict(self._rows)
