"""Entropy functionals in nats.

Covers the von Neumann entropy of block states, relative entropy with an
explicit infinity sentinel for unsupported pairs, the mutual information of
compound states, the dimensional (q-) entropy with its closed form and
breakdown, the derived conditional quantities, and a monotonicity check
under completely positive maps on the probe side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import blockmat as bm
from .algebra import DensityState
from .channel import Channel, apply_to_compound
from .entangle import CompoundState, marginals, standard_compound
from .errors import ShapeError

MONOTONICITY_TOL = 1e-8
_NEG_CLAMP = 1e-9  # round tiny negative values of provably nonnegative sums


@dataclass
class EntropyReport:
    """Value of an entropy functional, with an infinity tag and subterms.

    ``finite`` is False exactly when the value is the +infinity sentinel;
    arithmetic with the sentinel is never done in floating point.
    """

    value: float
    finite: bool = True
    breakdown: dict[str, float] = field(default_factory=dict)

    @classmethod
    def infinite(cls) -> "EntropyReport":
        return cls(value=math.inf, finite=False)

    def to_wire(self) -> dict:
        out = {"value": self.value if self.finite else "inf"}
        if self.breakdown:
            out["breakdown"] = dict(self.breakdown)
        return out


def _shannon(weights) -> float:
    """-sum w ln w over entries above the support cutoff."""
    w = np.asarray(weights, dtype=np.float64)
    w = w[w > bm.EIG_CUTOFF]
    return float(-np.sum(w * np.log(w))) + 0.0 if w.size else 0.0


def vn_entropy_matrix(m) -> float:
    """Von Neumann entropy of a raw density matrix."""
    w = np.clip(bm.psd_eigvals(m), 0.0, None)
    return _shannon(w)


def vn_entropy(rho: DensityState) -> float:
    """Entropy of the full block-diagonal spectrum; 0 <= S <= ln(rank)."""
    return sum(vn_entropy_matrix(b) for b in rho.blocks)


def _clamp(value: float) -> float:
    return 0.0 if -_NEG_CLAMP <= value < 0.0 else value


def relative_entropy(omega, phi) -> EntropyReport:
    """Relative entropy tr w (ln w - ln p) of two density matrices.

    Returns the +infinity sentinel when more than the support tolerance of
    omega's mass lies outside phi's support.  Finite values are clamped at 0
    when they dip negative within rounding.
    """
    w_mat = bm.check_psd(omega, "omega")
    p_mat = bm.check_psd(phi, "phi")
    if w_mat.shape != p_mat.shape:
        raise ShapeError(
            f"dimension mismatch: {w_mat.shape} vs {p_mat.shape}"
        )
    ew, vw = bm.herm_eig(w_mat)
    ep, vp = bm.herm_eig(p_mat)
    ew = np.clip(ew, 0.0, None)
    ep = np.clip(ep, 0.0, None)

    # Mass of omega on phi's null space decides absolute continuity.
    null = ep <= bm.EIG_CUTOFF
    if np.any(null):
        vecs = vp[:, null]
        outside = float(np.real(np.einsum("ij,ik,kj->", vecs.conj(), w_mat, vecs)))
        if outside > bm.PSD_TOL:
            return EntropyReport.infinite()

    term_w = float(np.sum(ew[ew > bm.EIG_CUTOFF] * np.log(ew[ew > bm.EIG_CUTOFF])))
    support = ~null
    # tr(omega ln phi) evaluated in phi's eigenbasis, support only.
    overlap = np.real(
        np.einsum("ij,ik,kj->j", vp[:, support].conj(), w_mat, vp[:, support])
    )
    term_p = float(np.sum(overlap * np.log(ep[support])))
    return EntropyReport(value=_clamp(term_w - term_p))


def mutual_information(cs: CompoundState) -> EntropyReport:
    """Information carried by a compound state over its product of marginals.

    Computed as S(sigma) + S(rho) - S(omega), the better-conditioned path
    near rank deficiency; equals the relative entropy against the product
    state (see :func:`mutual_information_direct`).  Always finite here and
    nonnegative up to rounding.
    """
    sigma, rho = marginals(cs)
    s_b = vn_entropy(sigma)
    s_a = vn_entropy(rho)
    s_joint = vn_entropy_matrix(cs.omega)
    return EntropyReport(
        value=_clamp(s_b + s_a - s_joint),
        breakdown={"S_B": s_b, "S_A": s_a, "S_joint": s_joint},
    )


def mutual_information_direct(cs: CompoundState) -> EntropyReport:
    """Cross-check path: relative entropy against the marginal product."""
    sigma, rho = marginals(cs)
    product = bm.kron(sigma.full_matrix(), rho.full_matrix())
    return relative_entropy(cs.omega, product)


def q_entropy(rho: DensityState) -> EntropyReport:
    """Dimensional entropy of a block state, with its closed form.

    Value sum_i ( nu(i) ln nu(i) - 2 tr rho(i) ln rho(i) ), split in the
    breakdown into the central entropy S_C and the doubled conditional part
    H_{A|C}.  Equals the mutual information of the standard compound state
    and is bounded by ln(dim) of the algebra.
    """
    nu = rho.nu()
    s_c = _shannon(nu)
    cond = 0.0
    for i, b in enumerate(rho.blocks):
        if nu[i] <= bm.EIG_CUTOFF:
            continue
        w = np.clip(bm.psd_eigvals(b), 0.0, None)
        w = w[w > bm.EIG_CUTOFF]
        # -2 sum nu(i) tr rho_i ln rho_i, written via the raw block spectrum.
        cond += -2.0 * float(np.sum(w * np.log(w / nu[i])))
    value = _clamp(s_c + cond)
    return EntropyReport(value=value, breakdown={"S_C": s_c, "H_A|C": cond})


def q_entropy_via_compound(rho: DensityState) -> EntropyReport:
    """Same quantity evaluated as mutual information of the standard compound."""
    return mutual_information(standard_compound(rho))


def conditional_q_entropy(cs: CompoundState, h_b: float) -> float:
    """Conditional dimensional entropy H_B - I for a compound state.

    ``h_b`` must be the q-entropy of the G-side marginal.  Nonnegative up to
    rounding; +infinity propagates if the information is infinite.
    """
    info = mutual_information(cs)
    if not info.finite:
        return math.inf
    return h_b - info.value


def disentanglement(cs: CompoundState) -> float:
    """Degree of disentanglement S(sigma) - I; negative values certify
    truly quantum correlation."""
    sigma, _ = marginals(cs)
    info = mutual_information(cs)
    if not info.finite:
        return -math.inf
    return vn_entropy(sigma) - info.value


@dataclass
class MonotonicityResult:
    info_before: float
    info_after: float
    ok: bool

    def to_wire(self) -> dict:
        return {
            "info_before": self.info_before,
            "info_after": self.info_after,
            "ok": self.ok,
        }


def monotonicity_check(cs: CompoundState, k_map: Channel) -> MonotonicityResult:
    """Verify information does not grow under a CP map on the probe side.

    The map is ampliated to act on the G factor only; the check allows the
    usual rounding slack.
    """
    before = mutual_information(cs).value
    moved = apply_to_compound(k_map, cs, side="b")
    after = mutual_information(moved).value
    return MonotonicityResult(before, after, after <= before + MONOTONICITY_TOL)
