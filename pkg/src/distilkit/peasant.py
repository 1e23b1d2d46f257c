"""Randomised search for Schmidt-rank-two vectors with negative partial-transpose expectation.

For an orthonormal pair ``(a, b)`` on the B side, ``P = |0><a| + |1><b|``
compresses B to a qubit, and a negative eigenvalue of
``(I (x) P) rho^T_B (I (x) P)^dagger`` certifies 1-distillability.  The
minimum eigenvalue equals the smallest ``<psi|rho^T_B|psi>`` over Schmidt-rank-two
vectors whose B support lies in ``span{a, b}``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from .families import FamilyState
from .operators import (
    DenseOperator,
    PureVector,
    SearchCandidate,
    TensorSumOperator,
    contract_b_pairs,
    dense_a_pairs,
    dense_b_pairs,
    partial_transpose,
)
from .sampling import derive_rng, derive_seed, haar_column_pairs

__all__ = [
    "SearchConfig",
    "SearchOutcome",
    "SearchTarget",
    "project_map",
    "random_search",
    "local_optimize",
    "grid_candidates",
    "n_copy_search",
    "detection_curve",
    "certificate_vector",
    "CHUNK",
    "MAX_SEARCH_DIM_A",
]

#: Candidates are drawn in chunks; chunk ``c`` uses the stream ``(seed, "tests", c)``.
CHUNK = 256
#: Largest A-side dimension accepted by :func:`n_copy_search`.
MAX_SEARCH_DIM_A = 1024


@dataclass(frozen=True)
class SearchConfig:
    """Search budget and randomness.

    ``sampler`` is ``"haar_columns"`` or ``"grid"`` (enumerate
    :func:`grid_candidates` with ``grid_n``).  ``optimizer`` selects the
    local search run after the tests: ``"hill"`` (random unitary moves) or
    ``"seesaw"`` (alternating exact minimisation over the A and B factors).
    """

    n_tests: int = 200
    opt_steps: int = 0
    threshold: float = -1e-9
    seed: int = 0
    sampler: str = "haar_columns"
    grid_n: int = 2
    optimizer: str = "hill"

    def __post_init__(self):
        if self.n_tests < 1:
            raise ValueError("n_tests must be at least 1")
        if self.opt_steps < 0:
            raise ValueError("opt_steps must be nonnegative")
        if not self.threshold < 0:
            raise ValueError("threshold must be negative")
        if self.sampler not in ("haar_columns", "grid"):
            raise ValueError("sampler must be 'haar_columns' or 'grid'")
        if self.optimizer not in ("hill", "seesaw"):
            raise ValueError("optimizer must be 'hill' or 'seesaw'")
        if self.grid_n < 1:
            raise ValueError("grid_n must be at least 1")


@dataclass(frozen=True, eq=False)
class SearchOutcome:
    detected: bool
    best_value: float
    best_candidate: SearchCandidate
    first_hit_index: int | None
    tests_run: int
    opt_steps_run: int = 0


class SearchTarget:
    """Partially transposed, trace-normalised operator prepared for repeated projection."""

    def __init__(self, rho_tb, normalization: float = 1.0):
        if isinstance(rho_tb, TensorSumOperator):
            self.structured = rho_tb
            self._swapped = None
            self.dense = None
            self.dim_a, self.dim_b = rho_tb.dim_a, rho_tb.dim_b
        elif isinstance(rho_tb, DenseOperator):
            self.structured = None
            self.dense = rho_tb
            self.dim_a, self.dim_b = rho_tb.dims
        else:
            raise TypeError("expected a DenseOperator or TensorSumOperator")
        if self.dim_b < 2:
            raise ValueError("B side must be at least two-dimensional")
        self.scale = 1.0 / normalization

    @classmethod
    def from_state(cls, rho) -> "SearchTarget":
        """Build from a state: dense (unit trace), structured, or a family record."""
        if isinstance(rho, FamilyState):
            rho = rho.structured()
        if isinstance(rho, TensorSumOperator):
            return cls(rho.partial_transpose(), rho.normalization)
        if isinstance(rho, DenseOperator):
            tr = rho.trace().real
            return cls(partial_transpose(rho), tr)
        raise TypeError("unsupported state type")

    def project(self, pairs: np.ndarray) -> np.ndarray:
        if self.structured is not None:
            out = contract_b_pairs(self.structured, pairs)
        else:
            out = dense_b_pairs(self.dense, pairs)
        out = out * self.scale
        return (out + np.conj(np.swapaxes(out, -1, -2))) / 2

    def project_a(self, pairs: np.ndarray) -> np.ndarray:
        """Compress the A side with pairs of shape ``(K, dim_a, 2)``; result indexed by ``(B index, x)``."""
        if self.structured is not None:
            if self._swapped is None:
                self._swapped = self.structured.swap_sides()
            out = contract_b_pairs(self._swapped, pairs)
        else:
            out = dense_a_pairs(self.dense, pairs)
        out = out * self.scale
        return (out + np.conj(np.swapaxes(out, -1, -2))) / 2

    def values(self, pairs: np.ndarray) -> np.ndarray:
        """Minimum eigenvalue of the projection for each pair, shape ``(K,)``."""
        return np.linalg.eigvalsh(self.project(pairs))[:, 0]


def _pair_array(cand: SearchCandidate) -> np.ndarray:
    return np.stack([cand.a, cand.b], axis=-1)[None]


def project_map(rho_tb, cand: SearchCandidate) -> DenseOperator:
    """``(I (x) P) rho_tb (I (x) P)^dagger`` as a ``2 * dim_a`` operator."""
    target = rho_tb if isinstance(rho_tb, SearchTarget) else SearchTarget(rho_tb)
    if cand.b_dim != target.dim_b:
        raise ValueError(f"candidate dimension {cand.b_dim} does not match B dimension {target.dim_b}")
    return DenseOperator(target.project(_pair_array(cand))[0], target.dim_a, 2, hermitian=True)


def certificate_vector(target: SearchTarget, cand: SearchCandidate) -> tuple[float, PureVector]:
    """Minimum eigenvalue and the Schmidt-rank-two vector ``(I (x) P)^dagger v`` that attains it."""
    w, v = np.linalg.eigh(target.project(_pair_array(cand))[0])
    vec = v[:, 0].reshape(target.dim_a, 2)
    psi = vec[:, :1] * cand.a[None, :] + vec[:, 1:] * cand.b[None, :]
    return float(w[0]), PureVector.normalize(psi.reshape(-1), target.dim_a, target.dim_b)


# --------------------------------------------------------------------------
# candidate streams


def _haar_chunks(b_dim: int, seed: int) -> Iterator[np.ndarray]:
    c = 0
    while True:
        yield haar_column_pairs(b_dim, derive_rng(seed, "tests", c), CHUNK)
        c += 1


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size == 0:
        return v
    z = v[nz[0]]
    return v * (abs(z) / z)


def _key(v: np.ndarray) -> tuple:
    r = np.round(np.concatenate([v.real, v.imag]), 12) + 0.0
    return tuple(r.tolist())


def _grid_vectors(b_dim: int, n: int) -> list[np.ndarray]:
    ratios = sorted({Fraction(p, q) for q in range(1, n + 1) for p in range(0, q + 1)})
    phases = sorted({Fraction(r % s, s) for s in range(1, n + 1) for r in range(1, s + 1)})
    coords = list(itertools.product(ratios, phases))
    seen, out = set(), []
    for head in itertools.product(coords, repeat=b_dim - 1):
        # the norm remainder is exact, so x = 1 leaves no rounding residue
        rest = 1 - sum(x * x for x, _ in head)
        if rest < 0:
            continue
        amps = [float(x) * np.exp(2j * np.pi * float(ph)) for x, ph in head]
        last_mag = np.sqrt(float(rest))
        for ph in phases:
            v = np.array(amps + [last_mag * np.exp(2j * np.pi * float(ph))])
            v = _canonical_phase(v)
            k = _key(v)
            if k not in seen:
                seen.add(k)
                out.append(v)
    return out


def grid_candidates(b_dim: int, n: int) -> Iterator[SearchCandidate]:
    """Orthonormal pairs from the rational-amplitude grid ``G_N``.

    Vectors have entries ``(p/q) exp(2 pi i r/s)`` with ``0 <= p <= q <= N``
    and ``0 < r <= s <= N``, the last entry fixing the norm.  Ordered pairs
    of distinct vectors are Gram-Schmidt orthonormalised, phase-canonicalised
    and deduplicated; the order is deterministic.
    """
    if n < 1:
        raise ValueError("N must be at least 1")
    if b_dim < 2:
        raise ValueError("need b_dim >= 2")
    vecs = _grid_vectors(b_dim, n)
    seen = set()
    for v1, v2 in itertools.permutations(vecs, 2):
        b = v2 - np.vdot(v1, v2) * v1
        nb = np.linalg.norm(b)
        if nb < 1e-8:
            continue
        b = _canonical_phase(b / nb)
        b = b - np.vdot(v1, b) * v1
        b /= np.linalg.norm(b)
        key = _key(v1) + _key(b)
        if key in seen:
            continue
        seen.add(key)
        yield SearchCandidate(v1, b)


def _grid_chunks(b_dim: int, n: int) -> Iterator[np.ndarray]:
    it = grid_candidates(b_dim, n)
    while True:
        block = list(itertools.islice(it, CHUNK))
        if not block:
            return
        yield np.stack([np.stack([c.a, c.b], axis=-1) for c in block])


# --------------------------------------------------------------------------
# search


def _random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


def _rotate(pair: np.ndarray, h: np.ndarray, theta: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    w = w / np.max(np.abs(w))
    out = v @ (np.exp(1j * theta * w)[:, None] * (v.conj().T @ pair))
    # the map is unitary; re-orthonormalise only to stop rounding drift
    a = out[:, 0] / np.linalg.norm(out[:, 0])
    b = out[:, 1] - a * np.vdot(a, out[:, 1])
    return np.stack([a, b / np.linalg.norm(b)], axis=1)


def _orthonormal_pair(m: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of the column span of an ``(n, 2)`` matrix, padded if rank one."""
    q, r = np.linalg.qr(m)
    if abs(r[1, 1]) < 1e-12 * max(1.0, abs(r[0, 0])):
        x = rng.standard_normal(m.shape[0]) + 1j * rng.standard_normal(m.shape[0])
        x -= q[:, 0] * np.vdot(q[:, 0], x)
        q[:, 1] = x / np.linalg.norm(x)
    return q


def _hill_step(target, pair, value, theta, rng, decay):
    trial = _rotate(pair, _random_hermitian(target.dim_b, rng), theta)
    v = float(target.values(trial[None])[0])
    if v < value:
        return trial, v, theta
    return pair, value, theta * decay


def _seesaw_step(target, pair, value, rng):
    w, vec = np.linalg.eigh(target.project(pair[None])[0])
    alpha = _orthonormal_pair(vec[:, 0].reshape(target.dim_a, 2), rng)
    w2, vec2 = np.linalg.eigh(target.project_a(alpha[None])[0])
    trial = _orthonormal_pair(vec2[:, 0].reshape(target.dim_b, 2), rng)
    v = float(target.values(trial[None])[0])
    if v < value:
        return trial, v
    return pair, value


def local_optimize(
    target,
    cand: SearchCandidate,
    steps: int,
    rng: np.random.Generator,
    method: str = "hill",
    theta0: float = 0.3,
    decay: float = 0.95,
    stop_below: float | None = None,
) -> tuple[SearchCandidate, float, int | None]:
    """Improve a B-side pair; the value never increases.

    ``hill``: rotate ``(a, b)`` by ``exp(i theta H)`` for a random Hermitian
    ``H`` (spectrum scaled to ``[-1, 1]``), keep the move only if the minimum
    eigenvalue strictly decreases, and shrink ``theta`` on rejection.

    ``seesaw``: take the minimising Schmidt-rank-two vector, fix its A
    factors and solve exactly for the best B pair.  Stops early once a step
    no longer improves the value.

    Returns the final candidate, its value and the 1-based step at which the
    value first dropped below ``stop_below`` (the search stops there).
    """
    if method not in ("hill", "seesaw"):
        raise ValueError("method must be 'hill' or 'seesaw'")
    if not isinstance(target, SearchTarget):
        target = SearchTarget(target)
    pair = _pair_array(cand)[0]
    value = float(target.values(pair[None])[0])
    theta = theta0
    hit = None
    for step in range(1, steps + 1):
        if method == "hill":
            pair, value, theta = _hill_step(target, pair, value, theta, rng, decay)
        else:
            prev = value
            pair, value = _seesaw_step(target, pair, value, rng)
            if prev - value <= 1e-15 * max(1.0, abs(prev)):
                if stop_below is not None and value < stop_below:
                    hit = step
                break
        if stop_below is not None and value < stop_below:
            hit = step
            break
    return SearchCandidate(pair[:, 0], pair[:, 1]), value, hit


def _search(target: SearchTarget, cfg: SearchConfig) -> SearchOutcome:
    chunks = _haar_chunks(target.dim_b, cfg.seed) if cfg.sampler == "haar_columns" else _grid_chunks(target.dim_b, cfg.grid_n)
    best_val, best_pair, first_hit = np.inf, None, None
    done = 0
    for block in chunks:
        take = min(len(block), cfg.n_tests - done)
        block = block[:take]
        vals = target.values(block)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_pair = float(vals[k]), block[k]
        if first_hit is None:
            hits = np.flatnonzero(vals < cfg.threshold)
            if hits.size:
                first_hit = done + int(hits[0]) + 1
        done += take
        if done >= cfg.n_tests:
            break
    best = SearchCandidate(best_pair[:, 0], best_pair[:, 1])
    opt_run = 0
    if first_hit is None and cfg.opt_steps > 0:
        rng = derive_rng(cfg.seed, "opt")
        cand, val, hit = local_optimize(target, best, cfg.opt_steps, rng, cfg.optimizer, stop_below=cfg.threshold)
        opt_run = cfg.opt_steps if hit is None else hit
        if val < best_val:
            best, best_val = cand, val
        if hit is not None:
            first_hit = done + hit
    return SearchOutcome(first_hit is not None, best_val, best, first_hit, done, opt_run)


def random_search(rho, cfg: SearchConfig) -> SearchOutcome:
    """Test ``cfg.n_tests`` candidate pairs, then optimise the best one.

    ``rho`` is a state (:class:`DenseOperator`, structured operator or
    :class:`FamilyState`) or a prepared :class:`SearchTarget`.  Values are
    computed for the unit-trace state.  Candidate ``i`` depends only on
    ``(cfg.seed, i)``, so longer runs extend shorter ones; optimisation is
    skipped once a test has already detected the state.
    """
    target = rho if isinstance(rho, SearchTarget) else SearchTarget.from_state(rho)
    return _search(target, cfg)


def n_copy_search(state: FamilyState, n: int, cfg: SearchConfig) -> SearchOutcome:
    """Search ``rho^(x)n`` through the structured partial transpose."""
    if n not in (1, 2):
        raise ValueError("only one or two copies are supported")
    op = state.structured().power(n)
    if op.dim_a > MAX_SEARCH_DIM_A:
        raise ValueError(f"A dimension {op.dim_a} exceeds the search budget {MAX_SEARCH_DIM_A}")
    return random_search(op, cfg)


def detection_curve(states: Sequence, cfg: SearchConfig) -> np.ndarray:
    """Fraction of ``states`` first detected at or before each test index.

    State ``i`` is searched with seed ``derive_seed(cfg.seed, i)``.
    """
    if len(states) == 0:
        raise ValueError("need at least one state")
    counts = np.zeros(cfg.n_tests + 1)
    for i, st in enumerate(states):
        out = random_search(st, replace(cfg, seed=derive_seed(cfg.seed, i), opt_steps=0))
        if out.first_hit_index is not None:
            counts[out.first_hit_index] += 1
    return np.cumsum(counts)[1:] / len(states)
