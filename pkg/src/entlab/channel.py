"""Quantum channels in Kraus form and measurement instruments.

A channel stores its Kraus family together with input and output block
structures.  Trace preservation (the Kraus operators resolving the input
identity) is enforced on construction, as is block compatibility: the
channel must map states that are block-diagonal for the input structure to
states block-diagonal for the output structure.
"""

from __future__ import annotations

import logging

import numpy as np

from . import blockmat as bm
from .algebra import BlockStructure, DensityState
from .entangle import CompoundState
from .errors import DomainError, ShapeError, StructureError

log = logging.getLogger(__name__)

KRAUS_TOL = 1e-10
ZERO_OUTCOME = 1e-12


class Channel:
    """Completely positive trace-preserving map given by Kraus operators."""

    def __init__(self, kraus, structure_in: BlockStructure, structure_out: BlockStructure):
        if not kraus:
            raise ShapeError("channel needs at least one Kraus operator")
        din, dout = structure_in.rank, structure_out.rank
        ops = []
        for k, raw in enumerate(kraus):
            op = bm.as_cmat(raw, f"Kraus {k}")
            if op.shape != (dout, din):
                raise ShapeError(
                    f"Kraus {k} must be {dout}x{din}, got {op.shape}"
                )
            op.setflags(write=False)
            ops.append(op)
        total = sum(op.conj().T @ op for op in ops)
        if bm.max_abs(total - np.eye(din)) > KRAUS_TOL:
            raise DomainError(
                "Kraus operators must resolve the identity on the input space"
            )
        self.kraus = tuple(ops)
        self.structure_in = structure_in
        self.structure_out = structure_out
        self._check_block_compatibility()

    @property
    def dim_in(self) -> int:
        return self.structure_in.rank

    @property
    def dim_out(self) -> int:
        return self.structure_out.rank

    @property
    def deterministic(self) -> bool:
        """True for a single isometric Kraus operator."""
        if len(self.kraus) != 1:
            return False
        y = self.kraus[0]
        return bm.max_abs(y.conj().T @ y - np.eye(self.dim_in)) <= KRAUS_TOL

    def _check_block_compatibility(self) -> None:
        """States diagonal for the input blocks must stay diagonal.

        For every input block m and output block pair i != i' the bilinear
        map A -> sum_k (Y_k A Y_k†) restricted accordingly must vanish; as a
        linear map that is sum_k L_k (x) conj(R_k) = 0 for the restricted
        slices L_k, R_k of the Kraus operators.
        """
        if self.structure_in.trivial and self.structure_out.trivial:
            return
        for m in range(self.structure_in.num_blocks):
            sm = self.structure_in.block_slice(m)
            for i in range(self.structure_out.num_blocks):
                si = self.structure_out.block_slice(i)
                for j in range(self.structure_out.num_blocks):
                    if i == j:
                        continue
                    sj = self.structure_out.block_slice(j)
                    acc = None
                    for y in self.kraus:
                        term = np.kron(y[si, sm], y[sj, sm].conj())
                        acc = term if acc is None else acc + term
                    if acc is not None and bm.max_abs(acc) > bm.BLOCK_TOL:
                        raise StructureError(
                            "channel does not preserve the declared block "
                            f"structure (input block {m}, output pair {i},{j})"
                        )

    def to_wire(self) -> dict:
        return {
            "kraus": [bm.to_wire(k) for k in self.kraus],
            "in_blocks": list(self.structure_in.dims),
            "out_blocks": list(self.structure_out.dims),
        }

    @classmethod
    def from_wire(cls, data) -> "Channel":
        kraus = [bm.from_wire(k, f"Kraus {i}") for i, k in enumerate(data["kraus"])]
        return cls(
            kraus,
            BlockStructure(tuple(data["in_blocks"])),
            BlockStructure(tuple(data["out_blocks"])),
        )


def apply(ch: Channel, rho0: DensityState) -> DensityState:
    """Send a state through the channel: sum_k Y_k rho Y_k†."""
    if rho0.structure != ch.structure_in:
        raise ShapeError("state structure does not match the channel input")
    full = rho0.full_matrix()
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=np.complex128)
    for y in ch.kraus:
        out += y @ full @ y.conj().T
    return DensityState.from_full(bm.hermitize(out), ch.structure_out)


def apply_matrix(ch: Channel, matrix) -> np.ndarray:
    """Kraus sum on a raw matrix, without block bookkeeping."""
    m = bm.as_cmat(matrix)
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=np.complex128)
    for y in ch.kraus:
        out += y @ m @ y.conj().T
    return out


def apply_to_compound(ch: Channel, cs: CompoundState, side: str = "a") -> CompoundState:
    """Ampliate the channel to one factor of a compound state.

    ``side="a"`` acts on the H factor with operators I (x) Y_k, leaving the
    G-marginal untouched; ``side="b"`` symmetrically acts on the G factor.
    """
    if side == "a":
        if cs.structure_a != ch.structure_in:
            raise ShapeError("compound A-side does not match the channel input")
        lifted = [
            bm.kron(np.eye(cs.dim_g, dtype=np.complex128), y) for y in ch.kraus
        ]
        sb, sa = cs.structure_b, ch.structure_out
    elif side == "b":
        if cs.structure_b != ch.structure_in:
            raise ShapeError("compound B-side does not match the channel input")
        lifted = [
            bm.kron(y, np.eye(cs.dim_h, dtype=np.complex128)) for y in ch.kraus
        ]
        sb, sa = ch.structure_out, cs.structure_a
    else:
        raise DomainError(f"side must be 'a' or 'b', got {side!r}")
    out = np.zeros((sb.rank * sa.rank,) * 2, dtype=np.complex128)
    for y in lifted:
        out += y @ cs.omega @ y.conj().T
    return CompoundState(bm.hermitize(out), sb, sa)


def identity_channel(structure: BlockStructure) -> Channel:
    return Channel([np.eye(structure.rank)], structure, structure)


def isometry_channel(
    matrix, structure_in: BlockStructure, structure_out: BlockStructure
) -> Channel:
    """Deterministic channel from a single isometry."""
    y = bm.as_cmat(matrix, "isometry")
    if bm.max_abs(y.conj().T @ y - np.eye(y.shape[1])) > KRAUS_TOL:
        raise DomainError("matrix is not an isometry within tolerance")
    return Channel([y], structure_in, structure_out)


_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def depolarizing_channel(p: float = 1.0) -> Channel:
    """Qubit depolarizing mix; p = 1 replaces every input with I/2."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("depolarizing strength must lie in [0, 1]")
    s = BlockStructure((2,))
    kraus = [
        np.sqrt(1.0 - 3.0 * p / 4.0) * _PAULI["I"],
        np.sqrt(p / 4.0) * _PAULI["X"],
        np.sqrt(p / 4.0) * _PAULI["Y"],
        np.sqrt(p / 4.0) * _PAULI["Z"],
    ]
    return Channel([k for k in kraus if bm.max_abs(k) > 0.0], s, s)


def dephasing_channel(p: float = 0.5) -> Channel:
    """Qubit dephasing in the computational basis; p = 1/2 kills coherences."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("dephasing strength must lie in [0, 1]")
    s = BlockStructure((2,))
    kraus = [np.sqrt(1.0 - p) * _PAULI["I"], np.sqrt(p) * _PAULI["Z"]]
    return Channel([k for k in kraus if bm.max_abs(k) > 0.0], s, s)


def amplitude_damping_channel(gamma: float) -> Channel:
    """Qubit energy-loss channel with decay probability gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("damping strength must lie in [0, 1]")
    s = BlockStructure((2,))
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return Channel([k0, k1] if gamma > 0.0 else [k0], s, s)


def random_channel(
    structure_in: BlockStructure,
    structure_out: BlockStructure,
    num_kraus: int,
    rng: np.random.Generator,
) -> Channel:
    """Random CPTP map via a Haar isometry into output (x) environment."""
    if num_kraus < 1:
        raise DomainError("need at least one Kraus operator")
    din, dout = structure_in.rank, structure_out.rank
    v = bm.haar_isometry(num_kraus * dout, din, rng)
    kraus = [v[e * dout : (e + 1) * dout, :] for e in range(num_kraus)]
    return Channel(kraus, structure_in, structure_out)


class Instrument:
    """Measurement with operators from H0 (x) F into H, one per outcome.

    The operators must resolve the identity on H0 (x) F so that outcome
    probabilities sum to one for every input state and reference state.
    """

    def __init__(self, ops, dim_h0: int, dim_f: int, dim_h: int):
        if not ops:
            raise ShapeError("instrument needs at least one operator")
        cleaned = []
        for n, raw in enumerate(ops):
            op = bm.as_cmat(raw, f"outcome {n}")
            if op.shape != (dim_h, dim_h0 * dim_f):
                raise ShapeError(
                    f"outcome {n} must be {dim_h}x{dim_h0 * dim_f}, got {op.shape}"
                )
            op.setflags(write=False)
            cleaned.append(op)
        total = sum(op.conj().T @ op for op in cleaned)
        if bm.max_abs(total - np.eye(dim_h0 * dim_f)) > KRAUS_TOL:
            raise DomainError(
                "instrument operators must resolve the identity on H0 (x) F"
            )
        self.ops = tuple(cleaned)
        self.dim_h0, self.dim_f, self.dim_h = int(dim_h0), int(dim_f), int(dim_h)

    def to_wire(self) -> dict:
        return {
            "ops": [bm.to_wire(op) for op in self.ops],
            "dim_h0": self.dim_h0,
            "dim_f": self.dim_f,
            "dim_h": self.dim_h,
        }

    @classmethod
    def from_wire(cls, data) -> "Instrument":
        ops = [bm.from_wire(op, f"outcome {i}") for i, op in enumerate(data["ops"])]
        return cls(ops, int(data["dim_h0"]), int(data["dim_f"]), int(data["dim_h"]))


def projective_instrument(basis) -> Instrument:
    """Instrument of rank-one projectors onto the columns of a unitary."""
    b = bm.as_cmat(basis, "basis")
    if b.shape[0] != b.shape[1]:
        raise ShapeError("projective instrument needs a square basis matrix")
    if bm.max_abs(b.conj().T @ b - np.eye(b.shape[0])) > 1e-8:
        raise DomainError("basis columns must be orthonormal")
    ops = [np.outer(b[:, n], b[:, n].conj()) for n in range(b.shape[1])]
    return Instrument(ops, b.shape[0], 1, b.shape[0])


def posterior_states(
    ins: Instrument, rho0: DensityState, tau=None
) -> list[tuple[float, np.ndarray]]:
    """Outcome probabilities and normalized posterior states.

    The reference state on F defaults to the pure state on its first basis
    vector.  Outcomes with probability below the cutoff are dropped (their
    posterior is undefined) with a debug log entry.
    """
    if rho0.dim != ins.dim_h0:
        raise ShapeError("state dimension does not match the instrument input")
    if tau is None:
        tau = np.zeros((ins.dim_f, ins.dim_f), dtype=np.complex128)
        tau[0, 0] = 1.0
    else:
        tau = bm.check_psd(tau, "tau")
        if tau.shape != (ins.dim_f, ins.dim_f):
            raise ShapeError("tau must act on the instrument's F space")
        if abs(float(np.trace(tau).real) - 1.0) > bm.TRACE_TOL:
            raise DomainError("tau must have trace 1")
    joint = bm.kron(rho0.full_matrix(), tau)
    out = []
    total = 0.0
    for n, op in enumerate(ins.ops):
        raw = op @ joint @ op.conj().T
        mu = float(np.trace(raw).real)
        total += mu
        if mu <= ZERO_OUTCOME:
            log.debug("dropping zero-probability outcome %d (mu=%.3e)", n, mu)
            continue
        out.append((mu, bm.hermitize(raw / mu)))
    if abs(total - 1.0) > bm.TRACE_TOL:
        raise DomainError(f"outcome probabilities sum to {total!r}, not 1")
    return out


def orthogonality_of_posteriors(ins: Instrument) -> bool:
    """True when distinct outcome operators have vanishing cross products,
    which makes the posteriors orthogonal for every input state."""
    for m in range(len(ins.ops)):
        for n in range(m + 1, len(ins.ops)):
            if bm.max_abs(ins.ops[m].conj().T @ ins.ops[n]) >= KRAUS_TOL:
                return False
    return True
