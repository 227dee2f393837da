"""Compound states, entangling operators, and the entanglement classes.

Conventions fixed here and relied on everywhere else:

* A compound state lives on G (x) H with G the left (slow) tensor factor,
  carrying the probe/output-side block structure, and H the right factor.
* The conjugation J is entrywise complex conjugation in the computational
  basis, so the basis transposition is the plain entrywise transpose.
* An amplitude operator u maps F into G (x) H and squares to the compound
  density w = u u†.  The entangling operator reconstructed from it maps G
  into F (x) H and satisfies, entry for entry, k[(f,h), g] = u[(g,h), f];
  with that index swap the pairing identity

      tr_G( transpose(B) k† (I (x) A) k ) = tr_F( u† (B (x) A) u )

  holds exactly for all B, A.  Its Gram matrix k†k is then the transpose of
  the G-marginal of w (they coincide whenever that marginal is symmetric,
  e.g. in its own eigenbasis), while tr_F(k k†) is exactly the H-marginal.
"""

from __future__ import annotations

import numpy as np

from . import blockmat as bm
from .algebra import BlockStructure, DensityState, schatten
from .errors import DomainError, ShapeError, StructureError

RANK1_TOL = 1e-10  # second eigenvalue below this counts as rank one
ORTH_TOL = 1e-10  # max-entry norm of part products for orthogonality


class AmplitudeOperator:
    """Normalized operator from an auxiliary space F into G (x) H.

    Columns with norm below the support cutoff are dropped on construction,
    keeping F minimal.  Normalization tr(u†u) = 1 is enforced.
    """

    def __init__(self, matrix, dim_g: int, dim_h: int):
        m = bm.as_cmat(matrix, "amplitude")
        if dim_g < 1 or dim_h < 1 or m.shape[0] != dim_g * dim_h:
            raise ShapeError(
                f"amplitude rows {m.shape[0]} do not factor as {dim_g}*{dim_h}"
            )
        keep = [j for j in range(m.shape[1]) if np.linalg.norm(m[:, j]) >= bm.EIG_CUTOFF]
        if not keep:
            raise DomainError("amplitude operator is numerically zero")
        m = m[:, keep]
        norm = float(np.real(np.vdot(m, m)))
        if abs(norm - 1.0) > bm.TRACE_TOL:
            raise DomainError(f"tr(u†u) must be 1, got {norm!r}")
        m.setflags(write=False)
        self.matrix = m
        self.dim_g = int(dim_g)
        self.dim_h = int(dim_h)
        self.dim_f = m.shape[1]

    def to_wire(self) -> dict:
        return {
            "matrix": bm.to_wire(self.matrix),
            "dim_g": self.dim_g,
            "dim_h": self.dim_h,
        }

    @classmethod
    def from_wire(cls, data) -> "AmplitudeOperator":
        return cls(
            bm.from_wire(data["matrix"], "amplitude"),
            int(data["dim_g"]),
            int(data["dim_h"]),
        )


class CompoundState:
    """Density operator on G (x) H tagged with both block structures."""

    def __init__(
        self,
        omega,
        structure_b: BlockStructure,
        structure_a: BlockStructure,
        support_tol: float = bm.BLOCK_TOL,
    ):
        w = bm.require_square(omega, "omega")
        self.structure_b = structure_b
        self.structure_a = structure_a
        dg, dh = structure_b.rank, structure_a.rank
        if w.shape[0] != dg * dh:
            raise ShapeError(
                f"omega size {w.shape[0]} does not match {dg}*{dh}"
            )
        if bm.max_abs(w - w.conj().T) > bm.HERM_TOL:
            raise DomainError("omega is not Hermitian within tolerance")
        w = bm.check_psd(w, "omega")
        tr = float(np.trace(w).real)
        if abs(tr - 1.0) > bm.TRACE_TOL:
            raise DomainError(f"omega must have trace 1, got {tr!r}")
        self._check_support(w, support_tol)
        w.setflags(write=False)
        self.omega = w

    @property
    def dim_g(self) -> int:
        return self.structure_b.rank

    @property
    def dim_h(self) -> int:
        return self.structure_a.rank

    def _check_support(self, w: np.ndarray, tol: float) -> None:
        if self.structure_b.trivial and self.structure_a.trivial:
            return
        probe = np.array(w, copy=True)
        dh = self.dim_h
        for j in range(self.structure_b.num_blocks):
            sb = self.structure_b.block_slice(j)
            for i in range(self.structure_a.num_blocks):
                sa = self.structure_a.block_slice(i)
                rows = [g * dh + h for g in range(sb.start, sb.stop)
                        for h in range(sa.start, sa.stop)]
                probe[np.ix_(rows, rows)] = 0.0
        defect = bm.max_abs(probe)
        if defect > tol:
            raise StructureError(
                f"omega has mass {defect:.3e} off the block diagonal of the "
                f"declared structures"
            )

    def to_wire(self) -> dict:
        return {
            "omega": bm.to_wire(self.omega),
            "structure_b": self.structure_b.to_wire(),
            "structure_a": self.structure_a.to_wire(),
        }

    @classmethod
    def from_wire(cls, data) -> "CompoundState":
        return cls(
            bm.from_wire(data["omega"], "omega"),
            BlockStructure.from_wire(data["structure_b"]),
            BlockStructure.from_wire(data["structure_a"]),
        )


class EntanglingOperator:
    """Operator from G into F (x) H realizing a compound state.

    Both k†k and tr_F(k k†) are validated as density operators.  The
    G-marginal of the realized compound state is ``sigma()``, the basis
    transpose of the Gram matrix; the H-marginal is ``rho()``.
    """

    def __init__(self, matrix, dim_f: int, dim_g: int, dim_h: int):
        m = bm.as_cmat(matrix, "entangling operator")
        if m.shape != (dim_f * dim_h, dim_g):
            raise ShapeError(
                f"entangling operator must be {dim_f * dim_h}x{dim_g}, "
                f"got {m.shape}"
            )
        self.dim_f, self.dim_g, self.dim_h = int(dim_f), int(dim_g), int(dim_h)
        gram = m.conj().T @ m
        bm.check_psd(gram, "k†k")
        if abs(float(np.trace(gram).real) - 1.0) > bm.TRACE_TOL:
            raise DomainError("k†k must have trace 1")
        bm.check_psd(self._rho_from(m), "tr_F(k k†)")
        m.setflags(write=False)
        self.matrix = m

    def _rho_from(self, m: np.ndarray) -> np.ndarray:
        return bm.partial_trace(m @ m.conj().T, self.dim_f, self.dim_h, "left")

    def gram(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix

    def sigma(self) -> np.ndarray:
        """G-marginal density of the realized compound state."""
        return bm.transpose_tilde(self.gram())

    def rho(self) -> np.ndarray:
        """H-marginal density tr_F(k k†)."""
        return bm.hermitize(self._rho_from(self.matrix))

    def psi(self, n: int) -> np.ndarray:
        """Slice operator F -> H for the n-th basis vector of G."""
        if not 0 <= n < self.dim_g:
            raise ShapeError(f"slice index {n} out of range for dim {self.dim_g}")
        return self.matrix[:, n].reshape(self.dim_f, self.dim_h).T.copy()


def compound_from_amplitude(
    ups: AmplitudeOperator,
    structure_b: BlockStructure | None = None,
    structure_a: BlockStructure | None = None,
) -> CompoundState:
    """Square the amplitude into the compound density w = u u†."""
    sb = structure_b or BlockStructure((ups.dim_g,))
    sa = structure_a or BlockStructure((ups.dim_h,))
    omega = bm.hermitize(ups.matrix @ ups.matrix.conj().T)
    return CompoundState(omega, sb, sa)


def marginals(cs: CompoundState) -> tuple[DensityState, DensityState]:
    """Both reduced states, validated against their declared structures."""
    sigma_full = bm.hermitize(
        bm.partial_trace(cs.omega, cs.dim_g, cs.dim_h, "right")
    )
    rho_full = bm.hermitize(
        bm.partial_trace(cs.omega, cs.dim_g, cs.dim_h, "left")
    )
    sigma = DensityState.from_full(sigma_full, cs.structure_b)
    rho = DensityState.from_full(rho_full, cs.structure_a)
    return sigma, rho


def entangling_from_amplitude(ups: AmplitudeOperator) -> EntanglingOperator:
    """Reconstruct the entangling operator from an amplitude operator.

    Uses the index swap k[(f,h), g] = u[(g,h), f], the computational-basis
    form of the defining identity with the free isometry fixed to the
    identity on the minimal domain F.
    """
    u = ups.matrix.reshape(ups.dim_g, ups.dim_h, ups.dim_f)
    k = u.transpose(2, 1, 0).reshape(ups.dim_f * ups.dim_h, ups.dim_g)
    return EntanglingOperator(k, ups.dim_f, ups.dim_g, ups.dim_h)


def amplitude_expectation(ups: AmplitudeOperator, b, a) -> complex:
    """Value tr_F( u† (B (x) A) u ) of the compound state on B (x) A."""
    ba = bm.kron(bm.as_cmat(b, "B"), bm.as_cmat(a, "A"))
    return complex(np.trace(ups.matrix.conj().T @ ba @ ups.matrix))


def entangled_expectation(kappa: EntanglingOperator, b, a) -> complex:
    """Value tr_G( transpose(B) k† (I (x) A) k ) realized by k."""
    b = bm.as_cmat(b, "B")
    a = bm.as_cmat(a, "A")
    ia = bm.kron(np.eye(kappa.dim_f, dtype=np.complex128), a)
    m = kappa.matrix.conj().T @ ia @ kappa.matrix
    return complex(np.trace(b.T @ m))


def symmetric_sqrt(block) -> np.ndarray:
    """Factor M with M M† = block, M†M = conj(block), M = transpose(M).

    This is the square root taken in the conjugation-adapted eigenbasis:
    M = V diag(sqrt(w)) V^T for the phase-fixed eigensystem (w, V).  For real
    inputs it coincides with the ordinary PSD square root.
    """
    w, v = bm.herm_eig(block)
    if w.size and w[-1] < -bm.PSD_TOL:
        raise DomainError("symmetric square root needs a PSD input")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def standard_amplitude(rho: DensityState) -> AmplitudeOperator:
    """Amplitude of the standard compound state of ``rho``.

    One column per nonzero-weight block: sqrt(nu(i)) times the row-major
    vectorization of the symmetric square root of the normalized block,
    embedded in H_i (x) H_i inside H (x) H.
    """
    d = rho.dim
    nu = rho.nu()
    cols = []
    for i in range(rho.structure.num_blocks):
        if nu[i] <= bm.EIG_CUTOFF:
            continue
        m = symmetric_sqrt(rho.normalized_block(i))
        s = rho.structure.block_slice(i)
        theta = np.zeros(d * d, dtype=np.complex128)
        for g in range(s.start, s.stop):
            for h in range(s.start, s.stop):
                theta[g * d + h] = m[g - s.start, h - s.start]
        cols.append(np.sqrt(nu[i]) * theta)
    return AmplitudeOperator(np.stack(cols, axis=1), d, d)


def standard_compound(rho: DensityState) -> CompoundState:
    """Purest compound extension of ``rho`` with both marginals equal to it.

    Block-diagonal over the paired blocks H_i (x) H_i with weights nu(i),
    each block a rank-one projector.
    """
    ups = standard_amplitude(rho)
    return compound_from_amplitude(ups, rho.structure, rho.structure)


def c_compound(
    sigma_parts: list[DensityState],
    rho_parts: list[DensityState],
    mu,
) -> CompoundState:
    """Separable mixture sum_n mu(n) sigma_n (x) rho_n."""
    mu = np.asarray(mu, dtype=np.float64)
    if len(sigma_parts) != len(rho_parts) or len(sigma_parts) != mu.size:
        raise ShapeError("sigma parts, rho parts and mu must have equal length")
    if mu.size == 0:
        raise ShapeError("at least one term is required")
    if np.any(mu < -bm.EIG_CUTOFF) or abs(float(mu.sum()) - 1.0) > bm.TRACE_TOL:
        raise DomainError("mu must be a probability vector")
    sb = sigma_parts[0].structure
    sa = rho_parts[0].structure
    if any(p.structure != sb for p in sigma_parts) or any(
        p.structure != sa for p in rho_parts
    ):
        raise ShapeError("all parts must share their side's block structure")
    omega = np.zeros((sb.rank * sa.rank,) * 2, dtype=np.complex128)
    for w, s_n, r_n in zip(mu, sigma_parts, rho_parts):
        omega += w * bm.kron(s_n.full_matrix(), r_n.full_matrix())
    return CompoundState(omega, sb, sa)


class Decomposition:
    """Sub-normalized positive parts summing to a density operator."""

    KINDS = ("general", "pure", "orthogonal")

    def __init__(self, parts, kind: str = "general"):
        if kind not in self.KINDS:
            raise DomainError(f"kind must be one of {self.KINDS}, got {kind!r}")
        if not parts:
            raise ShapeError("decomposition needs at least one part")
        cleaned = []
        dim = None
        total = 0.0
        for n, raw in enumerate(parts):
            p = bm.check_psd(raw, f"part {n}")
            if dim is None:
                dim = p.shape[0]
            elif p.shape[0] != dim:
                raise ShapeError("all parts must have the same dimension")
            p.setflags(write=False)
            cleaned.append(p)
            total += float(np.trace(p).real)
        if abs(total - 1.0) > bm.TRACE_TOL:
            raise DomainError(f"parts must sum to trace 1, got {total!r}")
        self.parts = tuple(cleaned)
        self.kind = kind
        self.dim = dim
        if kind == "pure":
            flags = self.pure_flags()
            if not all(flags):
                raise DomainError("kind 'pure' requires every part rank one")
        if kind == "orthogonal" and self.orthogonality_defect() >= ORTH_TOL:
            raise DomainError("kind 'orthogonal' requires vanishing part products")

    @classmethod
    def _trusted(cls, parts, kind: str) -> "Decomposition":
        """Wrap parts a caller has already proven valid (hot search loops)."""
        dec = object.__new__(cls)
        dec.parts = tuple(parts)
        dec.kind = kind
        dec.dim = dec.parts[0].shape[0]
        return dec

    def weights(self) -> np.ndarray:
        return np.array([max(float(np.trace(p).real), 0.0) for p in self.parts])

    def total(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for p in self.parts:
            out = out + p
        return out

    def pure_flags(self, tol: float = RANK1_TOL) -> list[bool]:
        """Whether each part is rank one (second eigenvalue below tol)."""
        flags = []
        for p in self.parts:
            w = bm.psd_eigvals(p)
            flags.append(bool(w.size < 2 or w[1] < tol))
        return flags

    def orthogonality_defect(self) -> float:
        """max over m != n of the max-entry norm of part_m @ part_n."""
        worst = 0.0
        for m in range(len(self.parts)):
            for n in range(m + 1, len(self.parts)):
                worst = max(worst, bm.max_abs(self.parts[m] @ self.parts[n]))
        return worst

    def commutation_defect(self) -> float:
        """Diagnostic: max over pairs of the max-entry norm of commutators."""
        worst = 0.0
        for m in range(len(self.parts)):
            for n in range(m + 1, len(self.parts)):
                pm, pn = self.parts[m], self.parts[n]
                worst = max(worst, bm.max_abs(pm @ pn - pn @ pm))
        return worst

    def to_wire(self) -> dict:
        return {"parts": [bm.to_wire(p) for p in self.parts], "kind": self.kind}

    @classmethod
    def from_wire(cls, data) -> "Decomposition":
        parts = [bm.from_wire(p, f"part {i}") for i, p in enumerate(data["parts"])]
        return cls(parts, data.get("kind", "general"))


def schatten_decomposition(rho: DensityState) -> Decomposition:
    """Spectral decomposition of a state as an orthogonal pure Decomposition."""
    parts = [lam * np.outer(vec, vec.conj()) for lam, vec, _ in schatten(rho)]
    return Decomposition(parts, kind="orthogonal")


class Classification:
    """Result of classifying a decomposition into the c/d/o hierarchy."""

    def __init__(self, label, pure_flags, orthogonality_defect, commutation_defect):
        self.label = label
        self.pure_flags = pure_flags
        self.orthogonality_defect = orthogonality_defect
        self.commutation_defect = commutation_defect

    def to_wire(self) -> dict:
        return {
            "label": self.label,
            "pure_flags": list(self.pure_flags),
            "orthogonality_defect": self.orthogonality_defect,
            "commutation_defect": self.commutation_defect,
        }


def classify(dec: Decomposition) -> Classification:
    """Label a decomposition: 'o' if parts are pairwise orthogonal, 'd' if
    all parts are pure, otherwise 'c'.  Orthogonality is part products
    vanishing; pairwise commutation is reported as a diagnostic only.
    """
    flags = dec.pure_flags()
    orth = dec.orthogonality_defect()
    comm = dec.commutation_defect()
    if orth < ORTH_TOL:
        label = "o"
    elif all(flags):
        label = "d"
    else:
        label = "c"
    return Classification(label, flags, orth, comm)


def d_compound(
    dec: Decomposition, structure_a: BlockStructure | None = None
) -> CompoundState:
    """Diagonal compound state sum_n |n><n| (x) part_n.

    The probe side is the Abelian algebra with one atom per part, so the
    G-marginal is diag of the part weights and the H-marginal is the
    reassembled state.
    """
    n_parts = len(dec.parts)
    dh = dec.dim
    omega = np.zeros((n_parts * dh, n_parts * dh), dtype=np.complex128)
    for n, p in enumerate(dec.parts):
        s = slice(n * dh, (n + 1) * dh)
        omega[s, s] = p
    sb = BlockStructure((1,) * n_parts)
    sa = structure_a or BlockStructure((dh,))
    return CompoundState(omega, sb, sa)


def entangling_from_decomposition(dec: Decomposition) -> EntanglingOperator:
    """Diagonal entangling operator of the compound built by d_compound.

    F splits as the direct sum of the part supports; the slice for part n is
    a square-root factor of that part, so slices of different parts have
    disjoint F-support and the strong orthogonality holds by construction.
    """
    dh = dec.dim
    factors = []
    for p in dec.parts:
        w, v = bm.herm_eig(p)
        keep = w > bm.EIG_CUTOFF
        if not np.any(keep):
            factors.append(np.zeros((dh, 1), dtype=np.complex128))
            continue
        factors.append(v[:, keep] * np.sqrt(w[keep]))
    f_dims = [f.shape[1] for f in factors]
    dim_f = sum(f_dims)
    n_parts = len(dec.parts)
    k = np.zeros((dim_f * dh, n_parts), dtype=np.complex128)
    f_off = 0
    for n, fac in enumerate(factors):
        for j in range(fac.shape[1]):
            row0 = (f_off + j) * dh
            k[row0 : row0 + dh, n] = fac[:, j]
        f_off += fac.shape[1]
    return EntanglingOperator(k, dim_f, n_parts, dh)


def weak_orthogonality_defect(
    kappa: EntanglingOperator, basis, mu=None
) -> float:
    """Weak orthogonality defect of k in a given orthonormal basis of G.

    With psi(n) the slice of k along the n-th basis vector, reports the max
    of |tr_F psi(m)† psi(n)| over m != n and |tr_F psi(n)† psi(n) - mu(n)|
    over n.  When ``mu`` is omitted the diagonal values themselves are used
    as the weights, so the defect reduces to the off-diagonal part.
    """
    b = bm.as_cmat(basis, "basis")
    if b.shape != (kappa.dim_g, kappa.dim_g):
        raise ShapeError("basis must be a square matrix of G's dimension")
    if bm.max_abs(b.conj().T @ b - np.eye(kappa.dim_g)) > 1e-8:
        raise DomainError("basis columns must be orthonormal")
    slices = []
    for n in range(kappa.dim_g):
        col = kappa.matrix @ b[:, n].conj()
        slices.append(col.reshape(kappa.dim_f, kappa.dim_h).T)
    gram = np.zeros((kappa.dim_g, kappa.dim_g), dtype=np.complex128)
    for m in range(kappa.dim_g):
        for n in range(kappa.dim_g):
            gram[m, n] = np.vdot(slices[m], slices[n])
    if mu is None:
        mu = np.real(np.diagonal(gram))
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (kappa.dim_g,):
        raise ShapeError("mu must have one weight per basis vector")
    off = gram - np.diag(np.diagonal(gram))
    return max(bm.max_abs(off), bm.max_abs(np.real(np.diagonal(gram)) - mu))


def strong_orthogonality_defect(
    kappa: EntanglingOperator, parts=None
) -> float:
    """Strong orthogonality defect: slices must multiply to the parts.

    Reports the max over m != n of the max-entry norm of psi(m) psi(n)† and,
    when reference ``parts`` are supplied, the max over n of the deviation of
    psi(n) psi(n)† from part n.
    """
    slices = [kappa.psi(n) for n in range(kappa.dim_g)]
    worst = 0.0
    for m in range(kappa.dim_g):
        for n in range(kappa.dim_g):
            prod = slices[m] @ slices[n].conj().T
            if m == n:
                if parts is not None:
                    worst = max(worst, bm.max_abs(prod - parts[m]))
            else:
                worst = max(worst, bm.max_abs(prod))
    return worst
