r"""Blocking isometry between sampled functions and block vectors.

A function on the union of unit cells k + [0,1)^c, k in [-N..N]^c, is
stored by q^c samples per cell (midpoint grid, raster order).  Cutting
it into per-cell payloads is the blocking map; it is an isometry once
the cell payload carries the quadrature L_p norm

    ||v||_p = (h^c sum_i |v_i|^p)^{1/p},     h = 1/q,

and both sides here literally share one accumulation routine, so the
equality is bitwise, not just up to rounding.

A banded block operator whose blocks carry nuclear factorizations
sum_i y_i (x) a_i turns into a sampled integral kernel: the block
feeding cell k from cell l is b_{k,k-l} / h^c, assembled from the
rank-one terms, and applying the kernel with the h^c quadrature weight
reproduces the block operator exactly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .cd_operator import BlockVector, CDOperator, ShapeMismatch, lp_accumulate
from .lattice import flat_offset, window_indices, window_size, wrap_index
from .nuclear_blocks import svd_factorization

__all__ = [
    "GridFunction",
    "Kernel",
    "MissingFactorization",
    "block",
    "unblock",
    "assemble_kernel",
    "apply_kernel",
    "attach_svd_factorizations",
    "write_grid_function",
    "read_grid_function",
    "kernel_block_to_csv",
]


class MissingFactorization(ValueError):
    """A kernel was requested from blocks without nuclear factorizations."""


@dataclass
class GridFunction:
    """Samples of a function over the cells of [-N..N]^c, q^c per cell."""

    c: int
    window_radius: int
    q: int
    values: np.ndarray  # shape (n_cells, q^c); raster order inside a cell

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("need at least one sample per axis")
        v = np.asarray(self.values, dtype=np.complex128)
        want = (window_size(self.window_radius, self.c), self.q ** self.c)
        if v.shape != want:
            raise ShapeMismatch(f"sample array shape {v.shape}, want {want}")
        self.values = v

    @property
    def cell_volume_weight(self) -> float:
        return self.q ** (-self.c)

    def lp_norm(self, p) -> float:
        return lp_accumulate(self.values, p, self.cell_volume_weight)

    @classmethod
    def from_callable(cls, func, c: int, window_radius: int, q: int) -> "GridFunction":
        """Sample func at the midpoint grid of every cell."""
        cells = list(window_indices(window_radius, c))
        vals = np.zeros((len(cells), q ** c), dtype=np.complex128)
        for row, k in enumerate(cells):
            for col, i in enumerate(itertools.product(range(q), repeat=c)):
                x = tuple(ki + (ij + 0.5) / q for ki, ij in zip(k, i))
                vals[row, col] = func(x if c > 1 else x[0])
        return cls(c, window_radius, q, vals)


def block(f: GridFunction) -> BlockVector:
    """Cut a sampled function into per-cell payloads (exact relabeling)."""
    return BlockVector(f.c, f.window_radius, f.values.copy())


def unblock(v: BlockVector, q: int) -> GridFunction:
    """Reassemble a sampled function from per-cell payloads."""
    if v.local_dim != q ** v.c:
        raise ShapeMismatch(
            f"payload dim {v.local_dim} is not q^c = {q ** v.c}"
        )
    return GridFunction(v.c, v.window_radius, q, v.values.copy())


@dataclass
class Kernel:
    """A sampled integral kernel between cell pairs of the window."""

    c: int
    window_radius: int
    q: int
    blocks: Dict[Tuple[tuple, tuple], np.ndarray]

    def __post_init__(self):
        qq = self.q ** self.c
        normalized = {}
        for (k, l), blk in self.blocks.items():
            b = np.asarray(blk, dtype=np.complex128)
            if b.shape != (qq, qq):
                raise ShapeMismatch(f"kernel block at {(k, l)} has shape {b.shape}")
            for idx in (k, l):
                if max(abs(x) for x in idx) > self.window_radius:
                    raise ShapeMismatch(f"cell {idx} outside window")
            normalized[(tuple(k), tuple(l))] = b
        self.blocks = normalized


def attach_svd_factorizations(op: CDOperator) -> CDOperator:
    """Fill op.factorizations with the minimal (SVD) decompositions."""
    op.factorizations = {key: svd_factorization(blk) for key, blk in op.blocks.items()}
    return op


def assemble_kernel(op: CDOperator, q: int) -> Kernel:
    """Build the sampled kernel of a block operator with q^c = d.

    Every block must carry a nuclear factorization; the kernel block is
    its rank-one assembly divided by the cell quadrature weight h^c.
    Offsets that wrap onto the same source cell accumulate, mirroring
    the circulant apply.
    """
    if q ** op.c != op.local_dim:
        raise ShapeMismatch(
            f"local dim {op.local_dim} does not match q^c = {q ** op.c}"
        )
    if op.factorizations is None:
        raise MissingFactorization("operator carries no factorizations")
    h_pow = q ** (-op.c)
    blocks: Dict[Tuple[tuple, tuple], np.ndarray] = {}
    for (k, m) in sorted(op.blocks):
        fact = op.factorizations.get((k, m))
        if fact is None:
            raise MissingFactorization(f"block at {(k, m)} has no factorization")
        src = tuple(ki - mi for ki, mi in zip(k, m))
        if op.boundary == "circulant":
            src = wrap_index(src, op.window_radius)
        elif max(abs(x) for x in src) > op.window_radius:
            continue
        contrib = fact.assemble() / h_pow
        key = (k, src)
        if key in blocks:
            blocks[key] += contrib
        else:
            blocks[key] = contrib
    return Kernel(op.c, op.window_radius, q, blocks)


def apply_kernel(kernel: Kernel, f: GridFunction) -> GridFunction:
    """Integrate the kernel against f with the midpoint quadrature."""
    if (f.c, f.window_radius, f.q) != (kernel.c, kernel.window_radius, kernel.q):
        raise ShapeMismatch("grid function does not match kernel geometry")
    h_pow = kernel.q ** (-kernel.c)
    out = np.zeros_like(f.values)
    for (k, l) in sorted(kernel.blocks):
        rk = flat_offset(k, kernel.window_radius)
        rl = flat_offset(l, kernel.window_radius)
        out[rk] += (kernel.blocks[(k, l)] @ f.values[rl]) * h_pow
    return GridFunction(f.c, f.window_radius, f.q, out)


# ----------------------------------------------------------------- files


def write_grid_function(f: GridFunction, path) -> None:
    """One JSON header line, then the samples as little-endian complex128.

    The payload is laid out cell-major (cells in lexicographic order,
    raster order inside each cell); each sample is a little-endian pair
    of 64-bit floats (re, im).
    """
    header = {"c": f.c, "N": f.window_radius, "q": f.q}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(f.values).astype("<c16").tobytes())


def read_grid_function(path) -> GridFunction:
    with open(path, "rb") as fh:
        first = fh.readline()
        try:
            header = json.loads(first.decode("ascii"))
            c, n, q = int(header["c"]), int(header["N"]), int(header["q"])
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise ValueError(f"bad grid-function header: {exc}") from exc
        payload = fh.read()
    n_cells = window_size(n, c)
    expected = n_cells * (q ** c) * 16
    if len(payload) != expected:
        raise ValueError(
            f"payload is {len(payload)} bytes, expected {expected}"
        )
    vals = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    return GridFunction(c, n, q, vals.reshape(n_cells, q ** c))


def kernel_block_to_csv(kernel: Kernel, k, l, path) -> None:
    """Write one kernel block as rows i,j,re,im (raster indices)."""
    key = (tuple(k), tuple(l))
    if key not in kernel.blocks:
        raise KeyError(f"kernel has no block at {key}")
    blk = kernel.blocks[key]
    with open(path, "w", newline="") as fh:
        fh.write("i,j,re,im\n")
        for i in range(blk.shape[0]):
            for j in range(blk.shape[1]):
                z = complex(blk[i, j])
                fh.write(f"{i},{j},{z.real!r},{z.imag!r}\n")
