"""Dense and structured bipartite operators.

Bipartite ordering convention: an operator on ``H_A (x) H_B`` is stored with the
A index as the slow (row-major) index.  When A and B are themselves composite
(several A subsystems and several B subsystems), the A index runs over the A
subsystems in site order, followed by the B subsystems in site order.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DenseOperator",
    "PureVector",
    "SearchCandidate",
    "TensorSumOperator",
    "ElementaryOperators",
    "DENSE_LIMIT",
    "kron",
    "partial_transpose",
    "min_eigenvalue",
    "elementary_operators",
    "schmidt_rank",
    "schmidt_decomposition",
    "contract_b_pair",
    "contract_b_pairs",
    "dense_b_pairs",
    "dense_a_pairs",
]

#: Largest total dimension that may be expanded into a dense matrix.
DENSE_LIMIT = 4096

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Square complex matrix on ``C^dim_a (x) C^dim_b``."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int
    hermitian: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        n = self.dim_a * self.dim_b
        if self.dim_a < 1 or self.dim_b < 1:
            raise ValueError("dimensions must be positive")
        if mat.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {mat.shape}")
        if self.hermitian and np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-12:
            raise ValueError("matrix flagged Hermitian but is not")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_a, self.dim_b

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def normalized(self) -> "DenseOperator":
        return DenseOperator(self.matrix / self.trace().real, self.dim_a, self.dim_b, self.hermitian)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class PureVector:
    """Unit vector on ``C^dim_a (x) C^dim_b`` (A index slow)."""

    amplitudes: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.dim_a * self.dim_b:
            raise ValueError("amplitude count does not match dimensions")
        if abs(np.linalg.norm(amp) - 1.0) > 1e-12:
            raise ValueError("vector is not normalised")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalize(cls, amplitudes, dim_a: int, dim_b: int) -> "PureVector":
        amp = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amp)
        if norm == 0:
            raise ValueError("zero vector")
        return cls(amp / norm, dim_a, dim_b)

    def as_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def projector(self) -> DenseOperator:
        v = self.amplitudes
        return DenseOperator(np.outer(v, v.conj()), self.dim_a, self.dim_b, hermitian=True)


@dataclass(frozen=True, eq=False)
class SearchCandidate:
    """Orthonormal pair defining the local filter ``P = |0><a| + |1><b|``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex).reshape(-1)
        b = np.asarray(self.b, dtype=complex).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("a and b must have the same length")
        if abs(np.vdot(a, a).real - 1) > 1e-10 or abs(np.vdot(b, b).real - 1) > 1e-10:
            raise ValueError("candidate vectors must be normalised")
        if abs(np.vdot(b, a)) > 1e-10:
            raise ValueError("candidate vectors must be orthogonal")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def b_dim(self) -> int:
        return self.a.size

    def filter(self) -> np.ndarray:
        """The ``2 x b_dim`` matrix of ``P``."""
        return np.stack([self.a.conj(), self.b.conj()])


def _matrix(x) -> np.ndarray:
    if isinstance(x, DenseOperator):
        return x.matrix
    return np.asarray(x)


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices (or DenseOperators)."""
    out = np.ones((1, 1))
    for op in ops:
        out = np.kron(out, _matrix(op))
    return out


def partial_transpose(x, dims: tuple[int, int] | None = None) -> DenseOperator:
    """Transpose the B factor: ``(X^T_B)[(i,j),(k,l)] = X[(i,l),(k,j)]``."""
    if isinstance(x, DenseOperator):
        da, db = x.dims
        mat = x.matrix
        herm = x.hermitian
    else:
        if dims is None:
            raise ValueError("bipartite dimension metadata missing")
        da, db = dims
        mat = np.asarray(x, dtype=complex)
        herm = False
    t = mat.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)
    return DenseOperator(t, da, db, herm)


def min_eigenvalue(h) -> float:
    """Smallest eigenvalue of a Hermitian operator."""
    mat = _matrix(h)
    scale = max(1.0, float(np.max(np.abs(mat), initial=0.0)))
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise ValueError("operator is not Hermitian")
    return float(np.linalg.eigvalsh(mat)[0])


class ElementaryOperators(NamedTuple):
    identity: np.ndarray
    flip: np.ndarray
    me_projector: np.ndarray
    complement: np.ndarray


def elementary_operators(d: int) -> ElementaryOperators:
    """Identity, swap ``F``, maximally entangled projector ``P`` and ``Q = 1 - P`` on d (x) d."""
    if d < 2:
        raise ValueError("d must be at least 2")
    n = d * d
    flip = np.zeros((n, n))
    idx = np.arange(d)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    flip[(i * d + j).ravel(), (j * d + i).ravel()] = 1.0
    phi = np.zeros(n)
    phi[idx * d + idx] = 1.0
    proj = np.outer(phi, phi) / d
    ident = np.eye(n)
    return ElementaryOperators(ident, flip, proj, ident - proj)


def schmidt_decomposition(v: PureVector, tol: float = 1e-10):
    """Return ``(coefficients, a_vectors, b_vectors)`` with coefficients above ``tol``."""
    u, s, vh = np.linalg.svd(v.as_matrix())
    keep = s > tol
    return s[keep], u[:, keep].T, vh[keep]


def schmidt_rank(v: PureVector, tol: float = 1e-10) -> int:
    return int(np.sum(np.linalg.svd(v.as_matrix(), compute_uv=False) > tol))


# --------------------------------------------------------------------------
# structured operators


def _identity_plus_low_rank(m: np.ndarray, tol: float = 1e-12):
    """Split ``m = alpha * I + sum_r u_r v_r^dagger`` with as few terms as possible."""
    n = m.shape[0]
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    candidates = [0.0]
    for ev in np.linalg.eigvals(m):
        if all(abs(ev - c) > 1e-9 * scale for c in candidates):
            candidates.append(complex(ev))
    best = None
    for alpha in candidates:
        u, s, vh = np.linalg.svd(m - alpha * np.eye(n))
        rank = int(np.sum(s > tol * scale))
        if best is None or rank < best[0]:
            best = (rank, alpha, u[:, :rank] * s[:rank], vh[:rank].conj())
    rank, alpha, us, vs = best
    return complex(alpha), [(us[:, r], vs[r]) for r in range(rank)]


@dataclass(frozen=True, eq=False)
class TensorSumOperator:
    """Linear combination of tensor products of small site factors.

    ``sites`` lists ``(dim_a, dim_b)`` for each site.  A site is one A
    subsystem paired with one B subsystem (either dimension may be 1 for a
    purely one-sided subsystem); its factor acts on ``C^dim_a (x) C^dim_b``
    with the A index slow.  The full operator acts on (all A subsystems) (x)
    (all B subsystems), each group in site order.

    ``normalization`` is the trace of the unnormalised sum, so
    ``to_dense() / normalization`` is the unit-trace state.
    """

    sites: tuple[tuple[int, int], ...]
    terms: tuple[tuple[complex, tuple[np.ndarray, ...]], ...]
    normalization: float = 1.0
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        sites = tuple((int(a), int(b)) for a, b in self.sites)
        terms = []
        for coef, factors in self.terms:
            if len(factors) != len(sites):
                raise ValueError("every term needs exactly one factor per site")
            fs = []
            for (da, db), f in zip(sites, factors):
                f = np.asarray(f, dtype=complex)
                if f.shape != (da * db, da * db):
                    raise ValueError(f"factor shape {f.shape} does not match site {(da, db)}")
                fs.append(f)
            terms.append((complex(coef), tuple(fs)))
        if self.normalization <= 0:
            raise ValueError("normalization must be positive")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def dim_a(self) -> int:
        return int(np.prod([a for a, _ in self.sites]))

    @property
    def dim_b(self) -> int:
        return int(np.prod([b for _, b in self.sites]))

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def trace(self) -> complex:
        return sum(c * np.prod([np.trace(f) for f in fs]) for c, fs in self.terms)

    def scaled(self, factor: float) -> "TensorSumOperator":
        return TensorSumOperator(
            self.sites, tuple((c * factor, fs) for c, fs in self.terms), self.normalization, self.labels
        )

    def normalized(self) -> "TensorSumOperator":
        """Coefficients divided by the stored normalization (unit trace for states)."""
        return TensorSumOperator(
            self.sites, tuple((c / self.normalization, fs) for c, fs in self.terms), 1.0, self.labels
        )

    def partial_transpose(self) -> "TensorSumOperator":
        terms = []
        for c, fs in self.terms:
            new = []
            for (da, db), f in zip(self.sites, fs):
                new.append(f.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db))
            terms.append((c, tuple(new)))
        return TensorSumOperator(self.sites, tuple(terms), self.normalization, self.labels)

    def swap_sides(self) -> "TensorSumOperator":
        """Exchange the roles of A and B in every site."""
        terms = []
        for c, fs in self.terms:
            new = []
            for (da, db), f in zip(self.sites, fs):
                new.append(f.reshape(da, db, da, db).transpose(1, 0, 3, 2).reshape(da * db, da * db))
            terms.append((c, tuple(new)))
        return TensorSumOperator(tuple((b, a) for a, b in self.sites), tuple(terms), self.normalization, self.labels)

    def tensor(self, other: "TensorSumOperator") -> "TensorSumOperator":
        terms = tuple(
            (c1 * c2, f1 + f2) for (c1, f1), (c2, f2) in itertools.product(self.terms, other.terms)
        )
        return TensorSumOperator(
            self.sites + other.sites, terms, self.normalization * other.normalization, self.labels + other.labels
        )

    def power(self, n: int) -> "TensorSumOperator":
        if n < 1:
            raise ValueError("power must be at least 1")
        out = self
        for _ in range(n - 1):
            out = out.tensor(self)
        return out

    def _site_to_bipartite(self, mat: np.ndarray) -> np.ndarray:
        n = len(self.sites)
        shape = [d for site in self.sites for d in site]
        t = mat.reshape(shape + shape)
        a_axes = [2 * s for s in range(n)]
        b_axes = [2 * s + 1 for s in range(n)]
        order = a_axes + b_axes
        t = t.transpose(order + [2 * n + ax for ax in order])
        return t.reshape(self.dim, self.dim)

    def to_dense(self, normalize: bool = False, max_dim: int = DENSE_LIMIT) -> DenseOperator:
        if self.dim > max_dim:
            raise ValueError(f"dense expansion of a {self.dim}-dim operator exceeds the limit {max_dim}")
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for c, fs in self.terms:
            acc += c * kron(*fs)
        acc = self._site_to_bipartite(acc)
        if normalize:
            acc /= self.normalization
        return DenseOperator(acc, self.dim_a, self.dim_b)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-vector product without densifying (vector in bipartite order)."""
        n = len(self.sites)
        da = [a for a, _ in self.sites]
        db = [b for _, b in self.sites]
        base = np.asarray(vec, dtype=complex).reshape(da + db)
        out = np.zeros_like(base)
        for c, fs in self.terms:
            t = base
            for s, f in enumerate(fs):
                m = f.reshape(da[s], db[s], da[s], db[s])
                t = np.tensordot(m, t, axes=([2, 3], [s, n + s]))
                t = np.moveaxis(t, [0, 1], [s, n + s])
            out += c * t
        return out.reshape(-1)

    def expectation(self, vec: np.ndarray) -> complex:
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        return complex(np.vdot(vec, self.apply(vec)))

    def hs_inner(self, other: "TensorSumOperator") -> complex:
        """Hilbert-Schmidt inner product ``Tr(self^dagger other)``."""
        if self.sites != other.sites:
            raise ValueError("site layouts differ")
        total = 0j
        for c1, f1 in self.terms:
            for c2, f2 in other.terms:
                total += np.conj(c1) * c2 * np.prod([np.vdot(x, y) for x, y in zip(f1, f2)])
        return total

    @cached_property
    def _contraction_plan(self):
        cache: dict[int, tuple] = {}
        plan = []
        for coef, fs in self.terms:
            if coef == 0:
                continue
            options = []
            for (da, db), f in zip(self.sites, fs):
                key = id(f)
                if key not in cache:
                    cache[key] = _identity_plus_low_rank(f)
                alpha, rank_ones = cache[key]
                opts = [] if alpha == 0 else [(alpha, None)]
                opts += [(1.0, (u.reshape(da, db), v.reshape(da, db).conj())) for u, v in rank_ones]
                options.append(opts)
            for choice in itertools.product(*options):
                c = coef * np.prod([w for w, _ in choice])
                plan.append((c, tuple(op for _, op in choice)))
        return plan


_LETTERS = string.ascii_letters


def contract_b_pairs(op: TensorSumOperator, pairs: np.ndarray) -> np.ndarray:
    """Batched ``(I (x) P) T (I (x) P)^dagger`` for pairs of shape ``(K, b_dim, 2)``.

    Returns an array of shape ``(K, 2*dim_a, 2*dim_a)`` indexed by
    ``(A index, x)`` with ``x`` in {0: a, 1: b}.  Each site factor is written
    as ``alpha*I + sum u v^dagger``; the identity part acts diagonally on A,
    the rank-one parts are contracted against the pair directly, so nothing
    of size ``dim_b`` squared is ever formed.
    """
    pairs = np.asarray(pairs, dtype=complex)
    if pairs.ndim != 3 or pairs.shape[1] != op.dim_b or pairs.shape[2] != 2:
        raise ValueError(f"pairs must have shape (K, {op.dim_b}, 2)")
    n = len(op.sites)
    da = [a for a, _ in op.sites]
    db = [b for _, b in op.sites]
    k = pairs.shape[0]
    vt = np.moveaxis(pairs, 2, 1).reshape([k, 2] + db)
    vt_conj = vt.conj()
    # letters: batch, x, y, then per site b_s, i_s, j_s
    batch, xl, yl = "k", "x", "y"
    pool = [c for c in _LETTERS if c not in "kxy"]
    bl = pool[:n]
    il = pool[n : 2 * n]
    jl = pool[2 * n : 3 * n]
    out = np.zeros([k] + da + [2] + da + [2], dtype=complex)
    for coef, opts in op._contraction_plan:
        rank_sites = [s for s, o in enumerate(opts) if o is not None]
        free_sites = [s for s, o in enumerate(opts) if o is None]
        left_in = [batch + xl + "".join(bl)]
        right_in = [batch + yl + "".join(bl)]
        left_ops = [vt_conj]
        right_ops = [vt]
        for s in rank_sites:
            u, v = opts[s]
            left_in.append(il[s] + bl[s])
            left_ops.append(u)
            right_in.append(jl[s] + bl[s])
            right_ops.append(v)
        rest = "".join(bl[s] for s in free_sites)
        i_rank = "".join(il[s] for s in rank_sites)
        j_rank = "".join(jl[s] for s in rank_sites)
        left_out = batch + xl + i_rank + rest
        right_out = batch + yl + j_rank + rest
        left = np.einsum(",".join(left_in) + "->" + left_out, *left_ops, optimize=True)
        right = np.einsum(",".join(right_in) + "->" + right_out, *right_ops, optimize=True)
        # identity sites: B indices are summed here, A indices stay diagonal below
        kernel = np.einsum(f"{left_out},{right_out}->{batch + xl + i_rank + yl + j_rank}", left, right, optimize=True)
        view = _diagonal_view(out, rank_sites, free_sites, n)
        view += (coef * kernel).reshape(kernel.shape + (1,) * len(free_sites))
    dim = 2 * op.dim_a
    return out.reshape(k, dim, dim)


def _diagonal_view(out: np.ndarray, rank_sites, free_sites, n):
    """Writable view of ``out`` with axes ``(k, x, i_rank, y, j_rank, i_free)`` and ``j_free = i_free``."""
    st = out.strides
    sh = out.shape
    axes = [0, 1 + n] + [1 + s for s in rank_sites] + [2 + 2 * n] + [2 + n + s for s in rank_sites]
    shape = [sh[a] for a in axes] + [sh[1 + s] for s in free_sites]
    strides = [st[a] for a in axes] + [st[1 + s] + st[2 + n + s] for s in free_sites]
    return np.lib.stride_tricks.as_strided(out, shape=shape, strides=strides, writeable=True)


def contract_b_pair(op: TensorSumOperator, cand: SearchCandidate) -> DenseOperator:
    """``(I (x) P) T (I (x) P)^dagger`` for a single candidate, as a ``2*dim_a`` operator."""
    if cand.b_dim != op.dim_b:
        raise ValueError(f"candidate lives in dimension {cand.b_dim}, operator B side is {op.dim_b}")
    pair = np.stack([cand.a, cand.b], axis=-1)[None]
    return DenseOperator(contract_b_pairs(op, pair)[0], op.dim_a, 2)


def dense_b_pairs(rho_tb: DenseOperator, pairs: np.ndarray) -> np.ndarray:
    """Dense counterpart of :func:`contract_b_pairs`, shape ``(K, 2*dim_a, 2*dim_a)``."""
    da, db = rho_tb.dims
    pairs = np.asarray(pairs, dtype=complex)
    k = pairs.shape[0]
    # right factor: rows (i, b, j), column c -> (K, i, b, j, y)
    right = np.matmul(rho_tb.matrix.reshape(da * db * da, db), pairs)
    right = right.reshape(k, da, db, da * 2)
    # left factor contracts b with conj(pair)
    out = np.matmul(pairs.conj().transpose(0, 2, 1)[:, None], right)  # (K, i, x, (j, y))
    return out.reshape(k, 2 * da, 2 * da)


def bipartite_dims(sites: Sequence[tuple[int, int]]) -> tuple[int, int]:
    return int(np.prod([a for a, _ in sites])), int(np.prod([b for _, b in sites]))


def dense_a_pairs(rho_tb: DenseOperator, pairs: np.ndarray) -> np.ndarray:
    """Compress the A side instead: shape ``(K, 2*dim_b, 2*dim_b)`` indexed by ``(B index, x)``."""
    da, db = rho_tb.dims
    pairs = np.asarray(pairs, dtype=complex)
    k = pairs.shape[0]
    t = rho_tb.matrix.reshape(da, db, da, db).transpose(1, 3, 0, 2)  # (b, c, i, j)
    right = np.matmul(np.ascontiguousarray(t).reshape(db * db, da, da)[None], pairs[:, None])
    out = np.matmul(pairs.conj().transpose(0, 2, 1)[:, None], right)  # (K, (b, c), x, y)
    return out.reshape(k, db, db, 2, 2).transpose(0, 1, 3, 2, 4).reshape(k, 2 * db, 2 * db)
