"""Deterministic sampling of chart points and test vectors.

All randomness in a run flows from one master seed: every consumer derives
its own counter-mode stream from (seed, purpose keys), so identical configs
reproduce byte-identical reports regardless of evaluation order.
"""

from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np


def derive_rng(seed: int, *keys: str | int) -> np.random.Generator:
    """Independent generator for (seed, *keys); stable across runs."""
    entropy = [int(seed) & 0xFFFFFFFF]
    for k in keys:
        if isinstance(k, int):
            entropy.append(k & 0xFFFFFFFF)
        else:
            entropy.append(zlib.crc32(str(k).encode()))
    return np.random.default_rng(entropy)


def sample_points(domain: Sequence[tuple[float, float]], count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the domain box, sorted lexicographically so that
    downstream reductions are order-independent."""
    lo = np.array([d[0] for d in domain])
    hi = np.array([d[1] for d in domain])
    if np.any(hi < lo):
        raise ValueError("empty domain interval")
    pts = rng.uniform(lo, hi, size=(count, len(domain)))
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def random_vectors(rng: np.random.Generator, npoints: int, nvectors: int, dim: int) -> np.ndarray:
    """Components uniform in [-1, 1], resampled while any norm < 1e-3."""
    v = rng.uniform(-1.0, 1.0, size=(npoints, nvectors, dim))
    bad = np.linalg.norm(v, axis=-1) < 1e-3
    while np.any(bad):
        v[bad] = rng.uniform(-1.0, 1.0, size=(int(bad.sum()), dim))
        bad = np.linalg.norm(v, axis=-1) < 1e-3
    return v
