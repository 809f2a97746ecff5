"""Lattices in the unit hypercube and scalar fields defined on them."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FIELD_LABELS = (
    "alpha_n",
    "C_n",
    "CC_n",
    "tildeCC_n",
    "CC_n_prime",
    "limit_CC",
    "bridge_alpha",
)


class GridShapeError(ValueError):
    """Raised when a grid lacks nodes an operation depends on."""


class Grid:
    """Product lattice in [0, 1]^d.

    Parameters
    ----------
    axes : sequence of array_like
        One strictly increasing node vector per axis. Every vector must
        contain both endpoints 0 and 1.
    """

    def __init__(self, axes):
        checked = []
        for k, ax in enumerate(axes):
            a = np.asarray(ax, dtype=float).copy()
            if a.ndim != 1 or a.size < 2:
                raise ValueError(f"axis {k}: need a 1-d vector with at least 2 nodes")
            if np.any(np.diff(a) <= 0):
                raise ValueError(f"axis {k}: nodes must be strictly increasing")
            if a[0] != 0.0 or a[-1] != 1.0:
                raise GridShapeError(f"axis {k}: nodes must include 0 and 1")
            a.setflags(write=False)
            checked.append(a)
        if len(checked) < 1:
            raise ValueError("grid needs at least one axis")
        self.axes = tuple(checked)
        digest = hashlib.sha1()
        for a in self.axes:
            digest.update(a.tobytes())
            digest.update(b"|")
        self._key = digest.hexdigest()

    @classmethod
    def uniform(cls, m: int, d: int = 2) -> "Grid":
        """Uniform grid with ``m`` nodes per axis, endpoints included."""
        if m < 2:
            raise ValueError("m must be at least 2")
        return cls([np.linspace(0.0, 1.0, m)] * d)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def nodes(self) -> np.ndarray:
        """All nodes as an ``(size, d)`` array in C order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def is_uniform(self) -> bool:
        return all(np.allclose(np.diff(a), a[1] - a[0]) for a in self.axes)

    def __eq__(self, other):
        return isinstance(other, Grid) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Grid(shape={self.shape})"


@dataclass
class ProcessField:
    """One realization of a process, stored as one value per grid node."""

    grid: Grid
    values: np.ndarray
    label: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size != self.grid.size:
            raise ValueError(
                f"{self.values.size} values for a grid of {self.grid.size} nodes"
            )
        self.values = self.values.reshape(self.grid.shape)
        if self.label not in FIELD_LABELS:
            raise ValueError(f"unknown field label {self.label!r}")

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def cvm(self) -> float:
        """Grid average of the squared field."""
        return float(np.mean(self.values**2))

    def to_csv(self, path) -> Path:
        """Write one row per node: coordinates, then the value."""
        path = Path(path)
        d = self.grid.dim
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"u{k + 1}" for k in range(d)] + [self.label])
            for node, val in zip(self.grid.nodes(), self.values.ravel()):
                w.writerow([repr(float(x)) for x in node] + [repr(float(val))])
        return path


def read_field_csv(path, grid: Grid | None = None) -> ProcessField:
    """Inverse of :meth:`ProcessField.to_csv`.

    The grid is rebuilt from the distinct coordinates per column unless
    one is supplied.
    """
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    arr = np.array([[float(x) for x in r] for r in body])
    d = len(header) - 1
    if grid is None:
        grid = Grid([np.unique(arr[:, k]) for k in range(d)])
    return ProcessField(grid, arr[:, d], header[-1])


def functional_value(values: np.ndarray, functional: str) -> np.ndarray:
    """Reduce fields stored row-wise as ``(batch, nodes)`` to one scalar each.

    ``sup_abs`` is the max absolute node value, ``cvm`` the node mean of
    squares. A 1-d input is treated as a batch of one.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim > 2:
        raise ValueError("expected (batch, nodes) or (nodes,)")
    flat = np.atleast_2d(v)
    if functional == "sup_abs":
        out = np.max(np.abs(flat), axis=1)
    elif functional == "cvm":
        out = np.mean(flat**2, axis=1)
    else:
        raise ValueError(f"unknown functional {functional!r}; use 'sup_abs' or 'cvm'")
    return out
