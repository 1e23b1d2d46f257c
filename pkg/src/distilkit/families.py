"""Symmetric state families, random states, twirls and invariant coordinates.

Pair ordering: a multi-pair state lives on sites ``1,2 | 3,4 | ...`` where
each site is one ``(A, B)`` pair, A holding the odd and B the even labels.
Kets are written pair by pair as ``|a_1 b_1>|a_2 b_2>...``; :func:`pair_ket`
converts that into the bipartite (all A, then all B) vector order used by
:class:`~distilkit.operators.TensorSumOperator`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .operators import (
    DenseOperator,
    PureVector,
    TensorSumOperator,
    elementary_operators,
    min_eigenvalue,
)
from .sampling import haar_unitary, simplex_point

__all__ = [
    "InvalidParameters",
    "FamilyState",
    "CoordinateVector",
    "BOUNDARY_SLACK",
    "werner",
    "isotropic",
    "uuvvf",
    "watrous",
    "watrous_delta",
    "rainbow",
    "uuvvf_inequalities",
    "rainbow_inequalities",
    "rainbow_top_delta",
    "rainbow_top_line",
    "random_density",
    "twirl_to_werner",
    "invariant_coordinates",
    "pair_ket",
    "canonical_vectors",
    "qp_basis",
    "if_basis",
    "primal_basis",
    "dual_basis",
    "one_copy_dual_basis",
]

#: Family inequalities tolerate violations this small so boundary states construct.
BOUNDARY_SLACK = 1e-12


class InvalidParameters(ValueError):
    """Raised when family parameters violate a positivity inequality."""

    def __init__(self, family: str, inequality: str, value: float):
        self.family = family
        self.inequality = inequality
        self.value = value
        super().__init__(f"invalid {family} parameters: inequality {inequality!r} evaluates to {float(value):.6g} < 0")


def _check(family: str, values: Mapping[str, float]) -> None:
    for name, value in values.items():
        if value < -BOUNDARY_SLACK:
            raise InvalidParameters(family, name, value)


def _site_ops(d: int):
    ops = elementary_operators(d)
    return ops.identity, ops.flip, ops.me_projector, ops.complement


@dataclass(frozen=True)
class FamilyState:
    """Tagged parameter record of a symmetric family member.

    ``kind`` is one of ``werner``, ``isotropic``, ``uuvvf``, ``watrous``,
    ``rainbow``.  A Watrous state is stored with its ``epsilon`` and the
    implied ``delta``.
    """

    kind: str
    d: int
    params: tuple[tuple[str, float], ...]
    m: int | None = None

    def __getitem__(self, key: str):
        return dict(self.params)[key]

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    @property
    def epsilon(self):
        return self["epsilon"]

    @property
    def delta(self):
        return self["delta"]

    def structured(self) -> TensorSumOperator:
        """Unnormalised operator with the printed coefficients; ``normalization`` holds its trace."""
        return _structured(self)

    def structured_pt(self) -> TensorSumOperator:
        return self.structured().partial_transpose()

    def dense(self) -> DenseOperator:
        """Unit-trace density matrix (bipartite order)."""
        op = self.structured().to_dense(normalize=True)
        mat = (op.matrix + op.matrix.conj().T) / 2
        return DenseOperator(mat, op.dim_a, op.dim_b, hermitian=True)

    def dense_pt(self) -> DenseOperator:
        op = self.structured_pt().to_dense(normalize=True)
        mat = (op.matrix + op.matrix.conj().T) / 2
        return DenseOperator(mat, op.dim_a, op.dim_b, hermitian=True)

    def pt_coefficients(self) -> dict[str, float]:
        """Closed-form coefficients of the partial transpose in the ``Q/P`` product basis."""
        d = self.d
        if self.kind in ("uuvvf", "watrous"):
            e, dl = self.epsilon, self.delta
            return {"QQ": 1, "QP": d * e, "PQ": d * e, "PP": dl * d * d}
        if self.kind == "rainbow":
            m, e, dl = self.m, self.epsilon, self.delta
            return {"QQ": 1, "PQ": m * e, "QP": d * e, "PP": m * d * dl}
        if self.kind == "werner":
            b = self["beta"]
            return {"Q": 1, "P": 1 + b * d}
        if self.kind == "isotropic":
            a = self["alpha"]
            # (I + aP)^TB = I + (a/d) F
            return {"I": 1, "F": a / d}
        raise ValueError(f"unknown family {self.kind!r}")


def _structured(state: FamilyState) -> TensorSumOperator:
    d = state.d
    ident, flip, proj, _ = _site_ops(d)
    if state.kind == "werner":
        b = state["beta"]
        terms = ((1.0, (ident,)), (b, (flip,)))
        return TensorSumOperator(((d, d),), terms, float(d * d + b * d), ("werner",))
    if state.kind == "isotropic":
        a = state["alpha"]
        terms = ((1.0, (ident,)), (a, (proj,)))
        return TensorSumOperator(((d, d),), terms, float(d * d + a), ("isotropic",))
    if state.kind in ("uuvvf", "watrous"):
        e, dl = state.epsilon, state.delta
        c1 = (e * d - 1) / d
        c2 = (1 - 2 * e * d + dl * d * d) / (d * d)
        terms = (
            (1.0, (ident, ident)),
            (c1, (ident, flip)),
            (c1, (flip, ident)),
            (c2, (flip, flip)),
        )
        norm = d**4 + 2 * c1 * d**3 + c2 * d * d
        return TensorSumOperator(((d, d), (d, d)), terms, float(norm), ("pair12", "pair34"))
    if state.kind == "rainbow":
        m, e, dl = state.m, state.epsilon, state.delta
        im, fm, _, _ = _site_ops(m)
        cd = (d * e - 1) / d
        cm = (m * e - 1) / m
        cf = (1 - (m + d) * e + d * m * dl) / (d * m)
        terms = (
            (1.0, (im, ident)),
            (cd, (im, flip)),
            (cm, (fm, ident)),
            (cf, (fm, flip)),
        )
        norm = m * m * d * d + cd * m * m * d + cm * m * d * d + cf * m * d
        return TensorSumOperator(((m, m), (d, d)), terms, float(norm), ("pair_m", "pair_d"))
    raise ValueError(f"unknown family {state.kind!r}")


def _check_dim(d: int, low: int = 2) -> None:
    if int(d) != d or d < low:
        raise ValueError(f"dimension must be an integer >= {low}")


def werner(d: int, beta: float) -> FamilyState:
    """Werner state ``1 + beta F`` on d (x) d, ``-1 <= beta <= 1``."""
    _check_dim(d)
    _check("werner", {"beta >= -1": beta + 1, "beta <= 1": 1 - beta})
    return FamilyState("werner", int(d), (("beta", beta),))


def isotropic(d: int, alpha: float) -> FamilyState:
    """Isotropic state ``1 + alpha P`` on d (x) d, ``alpha >= -1``."""
    _check_dim(d)
    _check("isotropic", {"alpha >= -1": alpha + 1})
    return FamilyState("isotropic", int(d), (("alpha", alpha),))


def uuvvf_inequalities(d: int, epsilon, delta) -> dict[str, float]:
    """Left-hand sides of the three UUVVF positivity conditions (all must be >= 0)."""
    return {
        "(d-1)^2+2ed(d-1)+dl d^2": (d - 1) ** 2 + 2 * epsilon * d * (d - 1) + delta * d * d,
        "d^2-1+2ed-dl d^2": d * d - 1 + 2 * epsilon * d - delta * d * d,
        "(d+1)^2-2ed(d+1)+dl d^2": (d + 1) ** 2 - 2 * epsilon * d * (d + 1) + delta * d * d,
    }


def uuvvf(d: int, epsilon: float, delta: float) -> FamilyState:
    """Two-pair UUVVF-invariant state with parameters ``(epsilon, delta)``."""
    _check_dim(d)
    _check("uuvvf", uuvvf_inequalities(d, epsilon, delta))
    return FamilyState("uuvvf", int(d), (("epsilon", epsilon), ("delta", delta)))


def watrous_delta(d: int, epsilon):
    """``delta`` of the Watrous member, fixed by a unit ``F (x) F`` coefficient."""
    return (d * d - 1 + 2 * epsilon * d) / (d * d)


def watrous(d: int, epsilon: float) -> FamilyState:
    """Watrous state, ``1/d - 1 < epsilon < 1 + 1/d`` (endpoints within slack)."""
    _check_dim(d)
    _check("watrous", {"epsilon > 1/d-1": epsilon - (1 / d - 1), "epsilon < 1+1/d": 1 + 1 / d - epsilon})
    dl = watrous_delta(d, epsilon)
    return FamilyState("watrous", int(d), (("epsilon", epsilon), ("delta", dl)))


def rainbow_inequalities(m: int, d: int, epsilon, delta) -> dict[str, float]:
    """Eigenvalues of the rainbow state on the four ``F_m, F_d`` symmetry sectors.

    The last entry (m-symmetric, d-antisymmetric) is the binding upper bound
    on ``delta`` when ``m < d``.
    """
    md = m * d
    s = (m + d) / md
    return {
        "1+dl+2e+1/md-(e+1)(m+d)/md": 1 + delta + 2 * epsilon + 1 / md - (epsilon + 1) * s,
        "1-1/md+e(m+d)/md-dl+1/m-1/d": 1 - 1 / md + epsilon * s - delta + 1 / m - 1 / d,
        "1+dl-2e+1/md+(1-e)(m+d)/md": 1 + delta - 2 * epsilon + 1 / md + (1 - epsilon) * s,
        "1-1/md+e(m+d)/md-dl-1/m+1/d": 1 - 1 / md + epsilon * s - delta - 1 / m + 1 / d,
    }


def rainbow(m: int, d: int, epsilon: float, delta: float) -> FamilyState:
    """Rainbow state on (m (x) d) (x) (m (x) d), ``3 <= m < d``."""
    _check_dim(m, 3)
    _check_dim(d)
    if not m < d:
        raise ValueError("rainbow states need 3 <= m < d")
    _check("rainbow", rainbow_inequalities(m, d, epsilon, delta))
    return FamilyState("rainbow", int(d), (("epsilon", epsilon), ("delta", delta)), m=int(m))


def rainbow_top_delta(m: int, d: int, epsilon):
    """``delta`` on the upper boundary of the rainbow parameter region."""
    md = m * d
    return 1 - 1 / md + epsilon * (m + d) / md - 1 / m + 1 / d


def rainbow_top_line(m: int, d: int) -> tuple[float, float]:
    """Range of ``epsilon`` for which the upper boundary point is a valid state."""
    lo, hi = -np.inf, np.inf
    for name in rainbow_inequalities(m, d, 0.0, 0.0):
        f0 = rainbow_inequalities(m, d, 0.0, rainbow_top_delta(m, d, 0.0))[name]
        f1 = rainbow_inequalities(m, d, 1.0, rainbow_top_delta(m, d, 1.0))[name]
        a, b = f0, f1 - f0
        if abs(b) < 1e-14:
            continue
        root = -a / b
        if b > 0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    return float(lo), float(hi)


def random_density(dim_a: int, dim_b: int, rng: np.random.Generator) -> DenseOperator:
    """Draw ``U D U^dagger`` from the product of the simplex and Haar measures."""
    if dim_a < 2 or dim_b < 2:
        raise ValueError("dimensions must be at least 2")
    n = dim_a * dim_b
    u = haar_unitary(n, rng)
    lam = simplex_point(n, rng)
    rho = (u * lam) @ u.conj().T
    rho = (rho + rho.conj().T) / 2
    return DenseOperator(rho, dim_a, dim_b, hermitian=True)


def twirl_to_werner(rho) -> float:
    """Werner ``beta`` with the same flip expectation as ``rho``."""
    if not isinstance(rho, DenseOperator):
        raise TypeError("expected a DenseOperator")
    if rho.dim_a != rho.dim_b:
        raise ValueError("twirl needs a d (x) d operator")
    d = rho.dim_a
    flip = elementary_operators(d).flip
    f = float(np.real(np.sum(flip * rho.matrix.T)))
    if abs(f) > 1 + 1e-10:
        raise ValueError(f"flip expectation {f} outside [-1, 1]; input is not a state")
    f = min(1.0, max(-1.0, f))
    return (f * d - 1) / (d - f)


# --------------------------------------------------------------------------
# coordinates


@dataclass(frozen=True)
class CoordinateVector:
    """Coordinates of a twirled operator in a labelled basis."""

    basis_labels: tuple[str, ...]
    coords: np.ndarray
    convention: str = "raw"

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1)
        if coords.size != len(self.basis_labels):
            raise ValueError("coordinate count does not match basis size")
        if self.convention not in ("raw", "tilde"):
            raise ValueError("convention must be 'raw' or 'tilde'")
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))
        object.__setattr__(self, "coords", coords)

    def __getitem__(self, label: str) -> float:
        return float(self.coords[self.basis_labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.basis_labels, self.coords.tolist()))

    def relative_to(self, label: str) -> "CoordinateVector":
        """Divide by the coordinate ``label`` and drop it (fixes the normalisation)."""
        k = self.basis_labels.index(label)
        keep = [i for i in range(len(self.coords)) if i != k]
        return CoordinateVector(
            tuple(self.basis_labels[i] for i in keep), self.coords[keep] / self.coords[k], self.convention
        )

    def select(self, labels: Sequence[str]) -> "CoordinateVector":
        return CoordinateVector(tuple(labels), [self[x] for x in labels], self.convention)

    def _rescale(self, d: int, sign: int) -> np.ndarray:
        factor = d / 2 - 1
        out = self.coords.copy()
        for i, label in enumerate(self.basis_labels):
            digits = label.lstrip("xy")
            if label[:1] in ("x", "y") and digits.isdigit():
                out[i] *= factor ** (sign * int(digits))
        return out

    def to_tilde(self, d: int) -> "CoordinateVector":
        """Apply ``x~_i = (d/2 - 1)^i x_i`` to every ``x<i>``/``y<i>`` label."""
        if self.convention == "tilde":
            return self
        return CoordinateVector(self.basis_labels, self._rescale(d, 1), "tilde")

    def to_raw(self, d: int) -> "CoordinateVector":
        if self.convention == "raw":
            return self
        return CoordinateVector(self.basis_labels, self._rescale(d, -1), "raw")


def _as_basis_matrix(b):
    if isinstance(b, DenseOperator):
        return b.matrix
    return np.asarray(b, dtype=complex)


def invariant_coordinates(rho, basis: Sequence, labels: Sequence[str] | None = None) -> CoordinateVector:
    """Coordinates of the twirl of ``rho`` onto the span of ``basis``.

    Solves ``G c = t`` with ``G_ij = Tr(B_i^dagger B_j)`` and
    ``t_i = Tr(B_i^dagger rho)``.  Because the twirl is the Hilbert-Schmidt
    orthogonal projection onto the commutant, this gives its exact image
    whenever ``basis`` spans the commutant.  ``rho`` may be a dense matrix,
    a :class:`PureVector` (taken as its projector) or a structured operator;
    the basis may be dense or structured.
    """
    if labels is None:
        labels = tuple(f"b{i}" for i in range(len(basis)))
    if len(labels) != len(basis):
        raise ValueError("one label per basis element required")
    structured = all(isinstance(b, TensorSumOperator) for b in basis)
    n = len(basis)
    gram = np.zeros((n, n), dtype=complex)
    t = np.zeros(n, dtype=complex)
    if structured:
        for i, j in itertools.product(range(n), repeat=2):
            gram[i, j] = basis[i].hs_inner(basis[j])
        for i, b in enumerate(basis):
            if isinstance(rho, PureVector):
                t[i] = np.conj(b.expectation(rho.amplitudes))
            elif isinstance(rho, TensorSumOperator):
                t[i] = b.hs_inner(rho)
            else:
                t[i] = np.vdot(b.to_dense().matrix, _as_basis_matrix(rho))
    else:
        mats = [b.to_dense().matrix if isinstance(b, TensorSumOperator) else _as_basis_matrix(b) for b in basis]
        if isinstance(rho, PureVector):
            v = rho.amplitudes
            target = None
        elif isinstance(rho, TensorSumOperator):
            target = rho.to_dense().matrix
        else:
            target = _as_basis_matrix(rho)
        for i, j in itertools.product(range(n), repeat=2):
            gram[i, j] = np.vdot(mats[i], mats[j])
        for i, m in enumerate(mats):
            t[i] = np.vdot(v, m.conj().T @ v) if target is None else np.vdot(m, target)
    if np.linalg.cond(gram) > 1e12:
        raise ValueError("basis is (numerically) linearly dependent")
    c = np.linalg.solve(gram, t)
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c.imag)) > 1e-9 * scale:
        raise ValueError("coordinates are not real; operator is not Hermitian in this basis")
    return CoordinateVector(tuple(labels), c.real)


# --------------------------------------------------------------------------
# bases


def _sym_sums(site_factors_q, site_factor_p, n: int):
    """``[sum over placements of k copies of P among n sites, k = 0..n]`` as term lists."""
    out = []
    for k in range(n + 1):
        terms = []
        for pos in itertools.combinations(range(n), k):
            terms.append(tuple(site_factor_p if s in pos else site_factors_q for s in range(n)))
        out.append(terms)
    return out


def qp_basis(d: int, n: int = 2, normalized_q: bool = False) -> tuple[list[TensorSumOperator], tuple[str, ...]]:
    """Symmetrised ``Q/P`` products on n pairs, indexed by the number of ``P`` factors.

    Labels are ``q`` (no ``P``) then ``x1 .. xn``.
    """
    _, _, proj, comp = _site_ops(d)
    q = comp / (d * d - 1) if normalized_q else comp
    sites = tuple((d, d) for _ in range(n))
    basis = [TensorSumOperator(sites, tuple((1.0, t) for t in terms)) for terms in _sym_sums(q, proj, n)]
    labels = ("q",) + tuple(f"x{k}" for k in range(1, n + 1))
    return basis, labels


def primal_basis(d: int, n: int):
    """Basis of the n-copy ``U_i U_i^* F``-invariant operators with normalised ``Q~``."""
    return qp_basis(d, n, normalized_q=True)


def if_basis(d: int, m: int | None = None):
    """``{I, F} (x) {I, F}`` on two pairs (dimensions m then d when m is given)."""
    m = d if m is None else m
    im, fm, _, _ = _site_ops(m)
    idd, fd, _, _ = _site_ops(d)
    sites = ((m, m), (d, d))
    combos = [("II", im, idd), ("IF", im, fd), ("FI", fm, idd), ("FF", fm, fd)]
    basis = [TensorSumOperator(sites, ((1.0, (a, b)),)) for _, a, b in combos]
    return basis, tuple(c[0] for c in combos)


def dual_basis(d: int, n: int):
    """Basis of the ``UU^*(V_i V_i^* F)``-invariant operators on 2 (x) (d (x) d)^n.

    Site 0 is the qubit pair.  Labels: ``norm`` (the ``Q~_2 (x) Q~^n`` term),
    ``y1 .. yn`` and ``x0 .. xn``; the index counts ``P`` factors on the d-pairs.
    """
    _, _, p2, q2 = _site_ops(2)
    _, _, proj, comp = _site_ops(d)
    qt = comp / (d * d - 1)
    q2t = q2 / 3
    sites = ((2, 2),) + tuple((d, d) for _ in range(n))
    sums = _sym_sums(qt, proj, n)
    basis, labels = [], []
    for head, prefix in ((q2t, "y"), (p2, "x")):
        for k, terms in enumerate(sums):
            basis.append(TensorSumOperator(sites, tuple((1.0, (head,) + t) for t in terms)))
            labels.append("norm" if (prefix == "y" and k == 0) else f"{prefix}{k}")
    return basis, tuple(labels)


def one_copy_dual_basis(d: int):
    """``Q~_2 (x) Q~``, ``P_2 (x) Q~``, ``Q~_2 (x) P``, ``P_2 (x) P`` with labels ``norm, x, y, z``."""
    _, _, p2, q2 = _site_ops(2)
    _, _, proj, comp = _site_ops(d)
    qt = comp / (d * d - 1)
    q2t = q2 / 3
    sites = ((2, 2), (d, d))
    pieces = [(q2t, qt), (p2, qt), (q2t, proj), (p2, proj)]
    return [TensorSumOperator(sites, ((1.0, pc),)) for pc in pieces], ("norm", "x", "y", "z")


# --------------------------------------------------------------------------
# kets


def pair_ket(dims: Sequence[int] | Sequence[tuple[int, int]], terms) -> PureVector:
    """Normalised sum of pair-ordered basis kets.

    ``dims`` lists each site's dimension (or ``(dim_a, dim_b)``); every term
    is a sequence of ``(a_digit, b_digit)`` per site, optionally preceded by
    a coefficient as ``(coef, digits)``.
    """
    sites = [(x, x) if np.isscalar(x) else tuple(x) for x in dims]
    da = [a for a, _ in sites]
    db = [b for _, b in sites]
    dim_a, dim_b = int(np.prod(da)), int(np.prod(db))
    amp = np.zeros(dim_a * dim_b, dtype=complex)
    for term in terms:
        if len(term) == 2 and np.isscalar(term[0]) and not isinstance(term[0], tuple):
            coef, digits = term
        else:
            coef, digits = 1.0, term
        if len(digits) != len(sites):
            raise ValueError("one digit pair per site required")
        ia = int(np.ravel_multi_index([a for a, _ in digits], da))
        ib = int(np.ravel_multi_index([b for _, b in digits], db))
        amp[ia * dim_b + ib] += coef
    return PureVector.normalize(amp, dim_a, dim_b)


_BELL = [(0, 0), (1, 1)]


def canonical_vectors(kind: str, **params) -> PureVector:
    """Named test vectors.

    kinds: ``psi_A``, ``psi_B``, ``psi_C`` (two UUVVF pairs, ``d``);
    ``werner_sr2`` (``d``); ``primal_psi`` (``d, n, k``): the n-pair vector
    ``|00>^k |01>^(n-k-1) (|00>+|11>)``; ``dual_row`` (``d, row`` in 1..5) and
    ``dual_first`` (``d, n, k``) / ``dual_last`` (``d, n, k``) on
    ``2 (x) (d (x) d)^n``; ``rainbow_1`` / ``rainbow_2`` (``m, d``).
    """
    d = params.get("d")
    if kind == "psi_A":
        return pair_ket([d, d], [[(0, 0), b] for b in _BELL])
    if kind == "psi_B":
        return pair_ket([d, d], [[(0, 1), b] for b in _BELL])
    if kind == "psi_C":
        terms = []
        for i in range(d):
            for j in range(d):
                terms.append([(i, j), (i, j)])
                terms.append([(i, j), ((i + 1) % d, (j + 1) % d)])
        return pair_ket([d, d], terms)
    if kind == "werner_sr2":
        return pair_ket([d], [[b] for b in _BELL])
    if kind == "primal_psi":
        n, k = params["n"], params["k"]
        if not 0 <= k <= n - 1:
            raise ValueError("need 0 <= k <= n-1")
        head = [(0, 0)] * k + [(0, 1)] * (n - k - 1)
        return pair_ket([d] * n, [head + [b] for b in _BELL])
    if kind == "dual_row":
        row = params["row"]
        dims = [2, d, d]
        two = [(i, j) for i in range(2) for j in range(2)]
        table = {
            1: [[(0, 1), (0, 1), (0, 1)]],
            2: [[(0, 1), (0, 0), (0, 1)]],
            3: [[(0, 1), (0, 0), (0, 0)]],
            4: [[p, p, (0, 0)] for p in two],
            5: [[p, p, (0, 1)] for p in two],
        }
        if row not in table:
            raise ValueError("row must be in 1..5")
        return pair_ket(dims, table[row])
    if kind == "dual_first":
        n, k = params["n"], params["k"]
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        return pair_ket([2] + [d] * n, [[(0, 1)] + [(0, 0)] * k + [(0, 1)] * (n - k)])
    if kind == "dual_last":
        n, k = params["n"], params["k"]
        if not 0 <= k <= n - 1:
            raise ValueError("need 0 <= k <= n-1")
        two = [(i, j) for i in range(2) for j in range(2)]
        tail = [(0, 0)] * (n - k - 1) + [(0, 1)] * k
        return pair_ket([2] + [d] * n, [[p, p] + tail for p in two])
    if kind in ("rainbow_1", "rainbow_2"):
        m = params["m"]
        b_d = 0 if kind == "rainbow_1" else 1
        # |x y>_A |x' y'>_B with x on the m-pair and y on the d-pair
        return pair_ket([m, d], [[(0, 0), (0, b_d)], [(1, 1), (0, b_d)]])
    raise ValueError(f"unknown vector kind {kind!r}")


def is_psd(op: DenseOperator, tol: float = 1e-10) -> bool:
    return min_eigenvalue(op) >= -tol
