"""Entanglement and distillability criteria and region classifiers."""

from __future__ import annotations

import enum
from fractions import Fraction
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .families import (
    CoordinateVector,
    FamilyState,
    canonical_vectors,
    isotropic,
    rainbow,
    uuvvf,
    werner,
)
from .operators import (
    DenseOperator,
    PureVector,
    TensorSumOperator,
    elementary_operators,
    min_eigenvalue,
    partial_transpose,
    schmidt_rank,
)

__all__ = [
    "Region",
    "RegionVerdict",
    "STRICT_TOL",
    "is_ppt",
    "sr2_expectation",
    "werner_sr2_boundary",
    "uuvvf_one_distillability",
    "uuvvf_undistillability_bounds",
    "uuvvf_asymptotic_margin",
    "uuvvf_region",
    "werner_region",
    "isotropic_region",
    "isotropic_schmidt_number",
    "werner_one_distillable_dual",
    "rainbow_witness_closed_form",
    "rainbow_witness_trace",
    "rainbow_entangled",
    "rainbow_one_distillability",
    "rainbow_separable_certificate",
    "rainbow_region",
    "hyperplane_value",
    "one_copy_dual_planes",
]

#: Distillable labels require values strictly below ``-STRICT_TOL``.
STRICT_TOL = 1e-12


class Region(str, enum.Enum):
    SEPARABLE = "Separable"
    PPT_ENTANGLED = "PptEntangled"
    ONE_DISTILLABLE = "OneDistillable"
    TWO_DISTILLABLE = "TwoDistillableByProtocol"
    ASYMPTOTIC = "AsymptoticallyDistillable"
    ONE_UNDISTILLABLE = "ProvablyOneUndistillable"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RegionVerdict:
    label: Region
    certificates: tuple[tuple[str, float], ...]

    def certificate(self, name: str) -> float:
        return dict(self.certificates)[name]


def _cert(values: dict) -> tuple[tuple[str, float], ...]:
    return tuple((k, float(v)) for k, v in values.items())


# --------------------------------------------------------------------------
# generic tests


def is_ppt(rho, tol: float = 1e-10, dims: tuple[int, int] | None = None) -> bool:
    """True iff the partial transpose has no eigenvalue below ``-tol``."""
    return min_eigenvalue(partial_transpose(rho, dims)) >= -tol


def sr2_expectation(psi: PureVector, rho) -> float:
    """``<psi| rho^T_B |psi>`` for a Schmidt-rank-two (or product) ``psi``.

    ``rho`` may be a unit-trace :class:`DenseOperator`, a structured operator
    (divided by its stored normalization) or a :class:`FamilyState`.
    """
    if schmidt_rank(psi) > 2:
        raise ValueError("vector has Schmidt rank above two")
    if isinstance(rho, FamilyState):
        rho = rho.structured()
    if isinstance(rho, TensorSumOperator):
        val = rho.partial_transpose().expectation(psi.amplitudes) / rho.normalization
    else:
        if isinstance(rho, DenseOperator):
            rho_tb = partial_transpose(rho)
        else:
            rho_tb = partial_transpose(rho, (psi.dim_a, psi.dim_b))
        v = psi.amplitudes
        val = np.vdot(v, rho_tb.matrix @ v)
    if abs(val.imag) > 1e-10:
        raise ValueError("expectation has a non-negligible imaginary part")
    return float(val.real)


def werner_sr2_boundary(d: int, tol: float = 1e-12) -> float:
    """Bisect for the ``beta`` where the Bell-vector expectation on the Werner state changes sign."""
    psi = canonical_vectors("werner_sr2", d=d)
    lo, hi = -1.0, 0.0  # negative at -1, positive at 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if sr2_expectation(psi, werner(d, mid).dense()) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# --------------------------------------------------------------------------
# UUVVF


def _scalars(d, *xs):
    """``(d, 1/2)`` as Fractions when any parameter is a Fraction, floats otherwise."""
    if any(isinstance(x, Fraction) for x in xs):
        return Fraction(d), Fraction(1, 2)
    return float(d), 0.5


def uuvvf_one_distillability(d: int, epsilon, delta) -> dict:
    """Sign tests of the three Schmidt-rank-two vectors; negative means 1-distillable."""
    q, half = _scalars(d, epsilon, delta)
    return {
        "psi_A": q * q + 3 * q * (epsilon * q - 1) + 2 * (1 - 2 * epsilon * q + delta * q * q),
        "psi_B": epsilon - (1 / q - half),
        "psi_C": delta - (1 / (q * q) - half),
    }


def uuvvf_undistillability_bounds(d: int, epsilon, delta) -> dict:
    """Two sufficient conditions for 1-undistillability; nonnegative means undistillable."""
    q, _ = _scalars(d, epsilon, delta)
    return {
        "undistillable_1": (1 - 2 / q) ** 2 + min(4 * epsilon, 0) + min(2 * delta, 0),
        "undistillable_2": q * q + min(4 * q * (epsilon * q - 1), 0) + min(2 * (delta * q * q - 1), 0),
    }


def uuvvf_asymptotic_margin(d: int, epsilon, delta):
    """Positive strictly inside the region reached by iterating the two-copy protocol."""
    if d < 3:
        raise ValueError("asymptotic region needs d >= 3")
    q, _ = _scalars(d, epsilon, delta)
    slope = (3 * q * q + 4 * q - 8) / (2 * q * (q - 2))
    return delta - (slope * epsilon + 1 - 1 / (q * q))


def uuvvf_region(d: int, epsilon, delta, tol: float = STRICT_TOL) -> RegionVerdict:
    """Classify a UUVVF state.

    Priority: Separable, OneDistillable, TwoDistillableByProtocol,
    AsymptoticallyDistillable, ProvablyOneUndistillable, Unknown.  Exact
    :class:`fractions.Fraction` parameters are evaluated exactly.
    """
    from .protocols import _recursion

    uuvvf(d, epsilon, delta)
    one = uuvvf_one_distillability(d, epsilon, delta)
    und = uuvvf_undistillability_bounds(d, epsilon, delta)
    asym = uuvvf_asymptotic_margin(d, epsilon, delta) if d >= 3 else float("nan")
    e2, dl2 = _recursion(d, epsilon, delta)
    two = {k + "'": v for k, v in uuvvf_one_distillability(d, e2, dl2).items()}
    certs = {"epsilon": epsilon, "delta": delta, **one, **und, "asymptotic": asym, **two}
    if epsilon >= -tol and delta >= -tol:
        label = Region.SEPARABLE
    elif min(one.values()) < -tol:
        label = Region.ONE_DISTILLABLE
    elif min(two.values()) < -tol:
        label = Region.TWO_DISTILLABLE
    elif d >= 3 and asym > tol:
        label = Region.ASYMPTOTIC
    elif max(und.values()) >= -tol:
        label = Region.ONE_UNDISTILLABLE
    else:
        label = Region.UNKNOWN
    return RegionVerdict(label, _cert(certs))


# --------------------------------------------------------------------------
# Werner and isotropic


def werner_region(d: int, beta: float, tol: float = STRICT_TOL) -> RegionVerdict:
    """Separable for ``beta >= -1/d``; OneDistillable when ``1 + 2 beta < 0``."""
    werner(d, beta)
    certs = {"beta": beta, "1+beta*d": 1 + beta * d, "1+2beta": 1 + 2 * beta}
    if 1 + beta * d >= -tol:
        label = Region.SEPARABLE
    elif 1 + 2 * beta < -tol:
        label = Region.ONE_DISTILLABLE
    else:
        # entangled Werner states with -1/2 <= beta < -1/d: no SR2 vector helps
        label = Region.ONE_UNDISTILLABLE
    return RegionVerdict(label, _cert(certs))


def isotropic_schmidt_number(d: int, alpha: float) -> int:
    """Smallest ``k`` with ``alpha <= d(kd - 1)/(d - k)`` (``d`` if none)."""
    isotropic(d, alpha)
    for k in range(1, d):
        if alpha <= d * (k * d - 1) / (d - k):
            return k
    return d


def isotropic_region(d: int, alpha: float, tol: float = STRICT_TOL) -> RegionVerdict:
    """Isotropic states are separable for ``alpha <= d`` and 1-distillable otherwise."""
    isotropic(d, alpha)
    # <Phi|(1 + alpha P)^T_B|Phi> for |Phi> = (|00>+|11>)/sqrt2 equals 1 - alpha/d
    certs = {"alpha": alpha, "1-alpha/d": 1 - alpha / d, "schmidt_number": isotropic_schmidt_number(d, alpha)}
    label = Region.SEPARABLE if alpha <= d + tol else Region.ONE_DISTILLABLE
    return RegionVerdict(label, _cert(certs))


class DualThreshold(NamedTuple):
    alpha: float
    beta: float


def werner_one_distillable_dual(d: int) -> DualThreshold:
    """Schmidt-number-two isotropic boundary ``alpha`` and the Werner ``beta`` where
    ``Tr(rho_W^T_B rho_alpha)`` changes sign."""
    if d < 3:
        raise ValueError("dual threshold needs d >= 3")
    alpha = d * (2 * d - 1) / (d - 2)
    ops = elementary_operators(d)
    rho_alpha = ops.identity + alpha * ops.me_projector

    def f(beta):
        w_tb = partial_transpose(ops.identity + beta * ops.flip, (d, d)).matrix
        return float(np.real(np.trace(w_tb @ rho_alpha)))

    f0, f1 = f(0.0), f(1.0)
    return DualThreshold(alpha, -f0 / (f1 - f0))


# --------------------------------------------------------------------------
# rainbow


def rainbow_witness_closed_form(m: int, d: int, epsilon, delta):
    return epsilon * m * m * (d * d - 1) + d * m * delta * (m - d)


def rainbow_witness(m: int, d: int) -> TensorSumOperator:
    """``F_m (x) (I_d - F_d / m)`` on the (m-pair, d-pair) sites."""
    om, od = elementary_operators(m), elementary_operators(d)
    terms = ((1.0, (om.flip, od.identity)), (-1.0 / m, (om.flip, od.flip)))
    return TensorSumOperator(((m, m), (d, d)), terms)


def rainbow_witness_trace(state: FamilyState, dense: bool = False) -> float:
    """``Tr(W rho)`` with the unnormalised rainbow operator."""
    w = rainbow_witness(state.m, state.d)
    rho = state.structured()
    if dense:
        return float(np.real(np.vdot(w.to_dense().matrix, rho.to_dense().matrix)))
    return float(np.real(w.hs_inner(rho)))


def rainbow_entangled(m: int, d: int, epsilon, delta, tol: float = STRICT_TOL):
    """``(entangled, certificate)`` from NPT or the printed witness."""
    state = rainbow(m, d, epsilon, delta)
    closed = rainbow_witness_closed_form(m, d, epsilon, delta)
    numeric = rainbow_witness_trace(state)
    npt = epsilon < -tol or delta < -tol
    cert = {"epsilon": epsilon, "delta": delta, "witness_closed_form": closed, "witness_trace": numeric}
    return bool(npt or closed < -tol), cert


def rainbow_one_distillability(m: int, d: int, epsilon, delta) -> dict:
    return {
        "vector_1": 2 + 2 * (d * epsilon - 1) / d + 4 * (m * epsilon - 1) / m + 4 * (1 - (m + d) * epsilon + d * m * delta) / (m * d),
        "vector_2": epsilon - (1 / m - 0.5),
    }


def _rainbow_generators(m: int):
    """``(<F_m (x) 1>, <1 (x) F_d>, <F_m (x) F_d>)`` of pure product states ``|alpha>|beta>``.

    Each point is the twirl image of a product of two vectors in
    ``C^m (x) C^d`` (the A and B halves of the pair of pairs).
    """
    pts = [(1.0, 1.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 0.0)]
    pts += [(1.0 / r, 1.0 / r, 1.0) for r in range(1, m + 1)]
    return np.array(pts)


def rainbow_separable_certificate(m: int, d: int, epsilon, delta):
    """Convex weights over twirled product states reproducing the state, or ``None``.

    A feasible point of the linear program is a constructive separable
    decomposition of the twirled (hence the original) state.
    """
    state = rainbow(m, d, epsilon, delta)
    rho = state.structured()
    om, od = elementary_operators(m), elementary_operators(d)
    obs = [
        TensorSumOperator(rho.sites, ((1.0, (om.flip, od.identity)),)),
        TensorSumOperator(rho.sites, ((1.0, (om.identity, od.flip)),)),
        TensorSumOperator(rho.sites, ((1.0, (om.flip, od.flip)),)),
    ]
    target = np.array([np.real(o.hs_inner(rho)) for o in obs]) / rho.normalization
    pts = _rainbow_generators(m)
    n = len(pts)
    res = linprog(
        np.zeros(n),
        A_eq=np.vstack([pts.T, np.ones(n)]),
        b_eq=np.append(target, 1.0),
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        return None
    return res.x


def rainbow_region(m: int, d: int, epsilon, delta, tol: float = STRICT_TOL, max_iters: int = 64) -> RegionVerdict:
    """Classify a rainbow state.

    NPT states: OneDistillable, then TwoDistillableByProtocol (one rainbow
    projection followed by the m-dimensional UUVVF vectors), then
    AsymptoticallyDistillable (further UUVVF rounds), else Unknown.  PPT
    states: PptEntangled when the witness fires, Separable when a
    product-state decomposition is found, Unknown otherwise.
    """
    from .protocols import iterate_protocol, rainbow_step

    state = rainbow(m, d, epsilon, delta)
    ent, wcert = rainbow_entangled(m, d, epsilon, delta, tol)
    one = rainbow_one_distillability(m, d, epsilon, delta)
    certs = {**wcert, **one}
    npt = epsilon < -tol or delta < -tol
    if npt:
        if min(one.values()) < -tol:
            return RegionVerdict(Region.ONE_DISTILLABLE, _cert(certs))
        _, e2, dl2 = rainbow_step(m, d, epsilon, delta)
        two = {k + "'": v for k, v in uuvvf_one_distillability(m, e2, dl2).items()}
        certs.update(two)
        if min(two.values()) < -tol:
            return RegionVerdict(Region.TWO_DISTILLABLE, _cert(certs))
        trace = iterate_protocol(state, max_iters=max_iters, tol=tol)
        certs["rounds"] = trace.rounds
        if trace.distillable_after is not None:
            return RegionVerdict(Region.ASYMPTOTIC, _cert(certs))
        return RegionVerdict(Region.UNKNOWN, _cert(certs))
    if ent:
        return RegionVerdict(Region.PPT_ENTANGLED, _cert(certs))
    weights = rainbow_separable_certificate(m, d, epsilon, delta)
    if weights is not None:
        certs["product_states"] = int(np.sum(weights > 1e-12))
        return RegionVerdict(Region.SEPARABLE, _cert(certs))
    return RegionVerdict(Region.UNKNOWN, _cert(certs))


# --------------------------------------------------------------------------
# hyperplanes


def hyperplane_value(coords: CoordinateVector, n: int, d: int, dual: bool) -> float:
    """Evaluate the n-copy hyperplane on ``x`` coordinates.

    Primal: ``1 + sum_{i=1}^n C(n,i) (1 - d/2)^i x_i`` on labels ``x1..xn``.
    Dual: ``sum_{i=0}^n C(n,i) (1 - d/2)^i x_i`` on labels ``x0..xn`` (any
    ``y`` labels are ignored).  Tilde coordinates are converted back first.
    """
    raw = coords.to_raw(d)
    lo = 0 if dual else 1
    needed = [f"x{i}" for i in range(lo, n + 1)]
    have = [lab for lab in raw.basis_labels if lab.startswith("x")]
    if sorted(have) != sorted(needed):
        kind = "dual" if dual else "primal"
        raise ValueError(f"{kind} hyperplane for n={n} needs labels {needed}, got {have}")
    total = 0.0 if dual else 1.0
    for i in range(lo, n + 1):
        total += comb(n, i) * (1 - d / 2) ** i * raw[f"x{i}"]
    return total


def one_copy_dual_planes(d: int, x: float, y: float, z: float) -> dict:
    """Slack of the three PPT planes of the one-copy ``UU^*VV^*`` polyhedron (>= 0 inside)."""
    return {
        "ABCE": (1 + 3 * x) / (d - 1) - y - 3 * z,
        "ECD": (1 - x) / (d + 1) + y - z,
        "EAD": z - (x - 1) / (d - 1) - y,
    }
