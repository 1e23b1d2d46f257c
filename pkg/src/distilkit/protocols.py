"""Two-copy distillation recursions for the UUVVF, Watrous and rainbow families."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .families import (
    FamilyState,
    if_basis,
    invariant_coordinates,
    rainbow,
    uuvvf,
    uuvvf_inequalities,
)
from .operators import TensorSumOperator, elementary_operators

__all__ = [
    "ProtocolTrace",
    "uuvvf_step",
    "watrous_step",
    "rainbow_step",
    "trace_identities",
    "pair_projection_scalar",
    "oracle_project_two_copies",
    "iterate_protocol",
    "DEFAULT_MAX_ITERS",
]

DEFAULT_MAX_ITERS = 64
CONVERGENCE_TOL = 1e-14


def _recursion(d, epsilon, delta):
    den = d * d * epsilon * epsilon + d * d - 1
    e_new = epsilon * (d * d * delta + d * d - 1) / den
    dl_new = (epsilon * epsilon * (d * d - 1) + d * d * delta * delta) / den
    return e_new, dl_new


def uuvvf_step(d: int, epsilon, delta):
    """One round of the two-copy protocol: ``(epsilon, delta) -> (epsilon', delta')``.

    Works with floats or :class:`fractions.Fraction` inputs (exact arithmetic).
    """
    uuvvf(d, epsilon, delta)
    return _recursion(d, epsilon, delta)


def watrous_step(d: int, epsilon):
    """Closed form of :func:`uuvvf_step` restricted to the Watrous line."""
    return epsilon * 2 * (epsilon * d + d * d - 1) / (d * d * epsilon * epsilon + d * d - 1)


def rainbow_step(m: int, d: int, epsilon, delta):
    """Project two rainbow copies onto the d-pairs; returns ``(m, epsilon', delta')``.

    The result is a UUVVF state on ``m^2 (x) m^2``.  The coefficients follow
    the same rational maps as :func:`uuvvf_step` evaluated with ``d``.
    """
    rainbow(m, d, epsilon, delta)
    e_new, dl_new = _recursion(d, epsilon, delta)
    return m, e_new, dl_new


def pair_projection_scalar(x: np.ndarray, xp: np.ndarray, d: int):
    """``Tr((P_{1,5} (x) P_{2,6}) (X_{1,2} (x) X'_{5,6}))`` by explicit contraction.

    ``X`` acts on systems (1,2) and ``X'`` on (5,6).  Integer inputs give an
    exact :class:`~fractions.Fraction`.
    """
    big = np.kron(x, xp).reshape([d] * 8)  # rows (1,2,5,6), then columns
    # <Phi_15 Phi_26| . |Phi_15 Phi_26> with unnormalised |Phi> = sum_i |ii>
    val = np.einsum("ijijklkl->", big)
    if np.issubdtype(np.asarray(x).dtype, np.integer) and np.issubdtype(np.asarray(xp).dtype, np.integer):
        return Fraction(int(val), d * d)
    return complex(val) / (d * d)


def trace_identities(d: int):
    """The three projection traces for ``(I, F)``, ``(F, I)`` and ``(F, F)``."""
    ops = elementary_operators(d)
    ident = ops.identity.astype(np.int64)
    flip = ops.flip.astype(np.int64)
    return (
        pair_projection_scalar(ident, flip, d),
        pair_projection_scalar(flip, ident, d),
        pair_projection_scalar(flip, flip, d),
    )


def _project(op1: TensorSumOperator, op2: TensorSumOperator, site: int) -> TensorSumOperator:
    keep = 1 - site
    d_proj = op1.sites[site][0]
    terms = []
    cache = {}
    for c1, f1 in op1.terms:
        for c2, f2 in op2.terms:
            key = (id(f1[site]), id(f2[site]))
            if key not in cache:
                cache[key] = pair_projection_scalar(f1[site], f2[site], d_proj)
            s = cache[key]
            if s != 0:
                terms.append((c1 * c2 * complex(s), (f1[keep], f2[keep])))
    sites = (op1.sites[keep], op2.sites[keep])
    out = TensorSumOperator(sites, tuple(terms))
    return TensorSumOperator(sites, out.terms, abs(out.trace().real) or 1.0)


def oracle_project_two_copies(state: FamilyState, target: str = "d") -> FamilyState:
    """Brute-force reference for the recursion maps.

    Two copies of ``state`` are projected onto ``P (x) P`` of one pair from
    each copy and the kept pairs are re-expressed in the ``{I,F} (x) {I,F}``
    basis by a Gram solve.  For rainbow states ``target`` chooses whether the
    d-pairs (``"d"``, the protocol) or the m-pairs (``"m"``) are projected.
    """
    op = state.structured()
    if state.kind in ("uuvvf", "watrous"):
        site = 0
    elif state.kind == "rainbow":
        if target not in ("d", "m"):
            raise ValueError("target must be 'd' or 'm'")
        site = 1 if target == "d" else 0
    else:
        raise ValueError(f"no two-copy projection for {state.kind!r}")
    out = _project(op, op, site)
    k = out.sites[0][0]
    basis, labels = if_basis(k)
    c = invariant_coordinates(out, basis, labels).as_dict()
    c_if = c["IF"] / c["II"]
    c_fi = c["FI"] / c["II"]
    c_ff = c["FF"] / c["II"]
    if abs(c_if - c_fi) > 1e-9 * max(1.0, abs(c_if)):
        raise ValueError("projected state is not pair-symmetric")
    eps = (k * c_if + 1) / k
    dl = (c_ff * k * k - 1 + 2 * eps * k) / (k * k)
    return uuvvf(k, eps, dl)


@dataclass(frozen=True)
class ProtocolTrace:
    """Parameter trajectory of repeated two-copy projections.

    ``steps[0]`` is the input; ``distillable_after`` is the number of rounds
    after which a single-copy certificate fired (``None`` if none did within
    ``max_iters`` rounds).
    """

    family: str
    d: int
    steps: tuple[tuple[float, float], ...]
    distillable_after: int | None
    max_iters: int
    certificate: tuple[tuple[str, float], ...] = ()

    @property
    def verdict(self) -> str:
        if self.distillable_after is None:
            return f"Inconclusive({self.max_iters})"
        return f"DistillableAfter({self.distillable_after})"

    @property
    def rounds(self) -> int:
        return len(self.steps) - 1


def _uuvvf_fires(d, e, dl, tol):
    from .criteria import uuvvf_one_distillability

    vals = uuvvf_one_distillability(d, e, dl)
    hits = [(k, v) for k, v in vals.items() if v < -tol]
    return hits


def iterate_protocol(state: FamilyState, max_iters: int = DEFAULT_MAX_ITERS, tol: float = 1e-12) -> ProtocolTrace:
    """Apply the two-copy recursion until a single-copy certificate fires.

    Rainbow inputs are first checked with the rainbow vectors, then mapped
    once by :func:`rainbow_step` into an m-dimensional UUVVF state which is
    iterated further.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    from .criteria import rainbow_one_distillability

    e, dl = state.epsilon, state.delta
    steps = [(e, dl)]
    if state.kind == "rainbow":
        vals = rainbow_one_distillability(state.m, state.d, e, dl)
        hits = [(k, v) for k, v in vals.items() if v < -tol]
        if hits:
            return ProtocolTrace("rainbow", state.d, tuple(steps), 0, max_iters, tuple(hits))
        dim, e, dl = rainbow_step(state.m, state.d, e, dl)
        steps.append((e, dl))
        start = 1
    elif state.kind in ("uuvvf", "watrous"):
        dim = state.d
        start = 0
    else:
        raise ValueError(f"no recursion for {state.kind!r}")
    rounds = start
    while True:
        hits = _uuvvf_fires(dim, e, dl, tol)
        if hits:
            return ProtocolTrace(state.kind, state.d, tuple(steps), rounds, max_iters, tuple(hits))
        if rounds >= max_iters:
            break
        e_new, dl_new = _recursion(dim, e, dl)
        steps.append((e_new, dl_new))
        rounds += 1
        if abs(e_new - e) < CONVERGENCE_TOL and abs(dl_new - dl) < CONVERGENCE_TOL:
            break
        e, dl = e_new, dl_new
    return ProtocolTrace(state.kind, state.d, tuple(steps), None, max_iters)


def output_is_valid(d: int, epsilon, delta, slack: float = 1e-12) -> bool:
    return all(v >= -slack for v in uuvvf_inequalities(d, epsilon, delta).values())
