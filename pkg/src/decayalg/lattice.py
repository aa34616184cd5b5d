"""Shared helpers for finite windows of the integer lattice Z^c.

A lattice index is an ordinary tuple of Python ints of length c (plain
ints are accepted where c == 1).  Finite windows are cubes [-R, R]^c
enumerated in lexicographic order, which fixes the raster layout used by
every dense representation in this package.
"""

from __future__ import annotations

from itertools import product

import numpy as np

__all__ = ["as_index", "window_indices", "window_size", "flat_offset", "wrap_index"]


def as_index(n, c: int | None = None) -> tuple[int, ...]:
    """Normalize ``n`` to a tuple of ints, optionally checking its length."""
    if isinstance(n, (int, np.integer)):
        idx = (int(n),)
    else:
        idx = tuple(int(v) for v in n)
    if c is not None and len(idx) != c:
        raise ValueError(f"index {idx!r} does not have dimension {c}")
    return idx


def window_indices(radius: int, c: int) -> list[tuple[int, ...]]:
    """All indices of the cube [-radius, radius]^c in lexicographic order."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rng = range(-radius, radius + 1)
    return [tuple(p) for p in product(rng, repeat=c)]


def window_size(radius: int, c: int) -> int:
    return (2 * radius + 1) ** c


def flat_offset(n: tuple[int, ...], radius: int) -> int:
    """Position of index ``n`` in the lexicographic enumeration of the cube."""
    width = 2 * radius + 1
    pos = 0
    for v in n:
        if abs(v) > radius:
            raise IndexError(f"index {n} outside window of radius {radius}")
        pos = pos * width + (v + radius)
    return pos


def wrap_index(n: tuple[int, ...], radius: int) -> tuple[int, ...]:
    """Reduce ``n`` modulo the window, mapping into [-radius, radius]^c.

    The window has odd side length 2*radius + 1, so every residue class
    has exactly one representative in the cube.
    """
    width = 2 * radius + 1
    return tuple((v + radius) % width - radius for v in n)
