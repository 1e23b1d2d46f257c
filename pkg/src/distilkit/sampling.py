"""Seeded random sampling: Haar unitaries, simplex points and derived streams."""

from __future__ import annotations

import numpy as np

__all__ = [
    "derive_rng",
    "derive_seed",
    "haar_unitary",
    "haar_column_pairs",
    "simplex_point",
]


def _key(part) -> int:
    if isinstance(part, str):
        return int.from_bytes(part.encode(), "little")
    return int(part)


def derive_rng(master_seed: int, *keys) -> np.random.Generator:
    """Return an independent generator that is a pure function of its arguments.

    Keys may be non-negative integers or short strings; the same
    ``(master_seed, *keys)`` always yields the same stream.
    """
    seq = np.random.SeedSequence([_key(master_seed), *(_key(k) for k in keys)])
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(master_seed: int, *keys) -> int:
    """Derive a 63-bit integer seed, e.g. to hand to a nested configuration."""
    seq = np.random.SeedSequence([_key(master_seed), *(_key(k) for k in keys)])
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _phase_fix(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(diag)
    phase = np.where(mag > 0, diag / np.where(mag > 0, mag, 1.0), 1.0)
    return q * phase[..., None, :]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a ``d x d`` unitary from the Haar measure.

    A complex Ginibre matrix is QR-factorised and each column of Q is divided
    by the phase of the matching diagonal entry of R, which makes R's diagonal
    positive and the distribution of Q exactly Haar.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return _phase_fix(q, r)


def haar_column_pairs(d: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Return ``size`` pairs of orthonormal vectors, shape ``(size, d, 2)``.

    Each pair is the first two columns of a Haar unitary. Householder QR of
    the leading two Gaussian columns reproduces those columns exactly, so the
    remaining ``d - 2`` columns are never generated.
    """
    if d < 2:
        raise ValueError("need at least a two-dimensional space for a pair")
    z = rng.standard_normal((size, d, 2)) + 1j * rng.standard_normal((size, d, 2))
    q, r = np.linalg.qr(z)
    return _phase_fix(q, r)


def simplex_point(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the probability simplex with ``n`` vertices."""
    if n < 1:
        raise ValueError("n must be positive")
    x = rng.standard_exponential(n)
    return x / x.sum()
