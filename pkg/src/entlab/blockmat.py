"""Dense complex linear-algebra kernel.

Everything downstream (states, compound states, channels, entropies) is built
on the conventions fixed here: row-major tensor indexing for Kronecker
products, Hermitian eigendecompositions with a deterministic phase convention,
spectral matrix functions with eigenvalue clipping, and the entrywise
transpose used as the basis transposition.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, NotPSDError, ShapeError, SizeError

# Tolerances used across the package.  Chosen well above float64 rounding
# noise at dimensions <= 64 and well below any physically meaningful value.
MAX_TENSOR_DIM = 4096
HERM_TOL = 1e-8  # accepted input asymmetry before hermitizing
PSD_TOL = 1e-10  # eigenvalues >= -PSD_TOL count as nonnegative
EIG_CUTOFF = 1e-12  # spectral support threshold / clipping level
TRACE_TOL = 1e-10
BLOCK_TOL = 1e-9  # off-block mass allowed by structure checks


def as_cmat(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a 2-d complex128 array with finite entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a


def require_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = as_cmat(m, name)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    return a


def max_abs(m) -> float:
    """Max-entry norm; the residual norm used by every tolerance check."""
    a = np.asarray(m)
    return 0.0 if a.size == 0 else float(np.max(np.abs(a)))


def hermitize(m) -> np.ndarray:
    """Hermitian part (m + m†)/2, absorbing accumulated asymmetry."""
    a = as_cmat(m)
    return (a + a.conj().T) / 2.0


def kron(a, b, max_dim: int = MAX_TENSOR_DIM) -> np.ndarray:
    """Kronecker product with the row-major pair index (i*b.rows + k)."""
    a = as_cmat(a, "a")
    b = as_cmat(b, "b")
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > max_dim or cols > max_dim:
        raise SizeError(
            f"kron result {rows}x{cols} exceeds maximum tensor dimension {max_dim}"
        )
    return np.kron(a, b)


def partial_trace(m, dim_left: int, dim_right: int, side: str) -> np.ndarray:
    """Trace out one tensor factor of an operator on a bipartite space.

    ``side="left"`` removes the left (slow, row-major leading) factor and
    returns a ``dim_right`` square matrix ``sum_k m[(k,i),(k,j)]``;
    ``side="right"`` symmetrically removes the right factor.
    """
    a = require_square(m)
    if dim_left < 1 or dim_right < 1 or a.shape[0] != dim_left * dim_right:
        raise ShapeError(
            f"matrix of size {a.shape[0]} does not factor as {dim_left}*{dim_right}"
        )
    r = a.reshape(dim_left, dim_right, dim_left, dim_right)
    if side == "left":
        return np.einsum("kikj->ij", r)
    if side == "right":
        return np.einsum("ikjk->ij", r)
    raise DomainError(f"side must be 'left' or 'right', got {side!r}")


def herm_eig(h, herm_tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, descending eigenvalues.

    The input is hermitized first; asymmetry beyond ``herm_tol`` is rejected.
    Each eigenvector is rephased so its first largest-modulus component is
    real nonnegative, which makes spectral decompositions reproducible.
    """
    a = require_square(h)
    if max_abs(a - a.conj().T) > herm_tol:
        raise DomainError(
            f"matrix deviates from Hermitian by more than {herm_tol}"
        )
    w, v = np.linalg.eigh((a + a.conj().T) / 2.0)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if abs(pivot) > 0.0:
            v[:, j] = col * (pivot.conjugate() / abs(pivot))
    return w.astype(np.float64), v


def spectral_fn(h, fn: str) -> np.ndarray:
    """Apply ``ln`` or ``sqrt`` to a PSD matrix through its spectrum.

    Eigenvalues in [-PSD_TOL, 0) are clipped to 0; anything lower raises.
    For ``ln``, eigenvalues below the support threshold map to 0 (the
    0*ln 0 := 0 convention), so the result is only meaningful inside traces
    against operators supported on the same subspace.
    """
    w, v = herm_eig(h)
    if w.size and w[-1] < -PSD_TOL:
        raise NotPSDError(f"eigenvalue {w[-1]:.3e} below PSD tolerance")
    w = np.clip(w, 0.0, None)
    if fn == "ln":
        fw = np.where(w > EIG_CUTOFF, np.log(np.where(w > EIG_CUTOFF, w, 1.0)), 0.0)
    elif fn == "sqrt":
        fw = np.sqrt(w)
    else:
        raise DomainError(f"fn must be 'ln' or 'sqrt', got {fn!r}")
    return hermitize((v * fw) @ v.conj().T)


def transpose_tilde(b) -> np.ndarray:
    """Basis transposition B~ = J B† J with J = entrywise conjugation.

    Reduces to the plain entrywise transpose in the computational basis and
    is idempotent.
    """
    return require_square(b, "b").T.copy()


def psd_eigvals(m, herm_tol: float = HERM_TOL) -> np.ndarray:
    """Descending eigenvalues of a hermitized matrix (no PSD check)."""
    a = require_square(m)
    if max_abs(a - a.conj().T) > herm_tol:
        raise DomainError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh((a + a.conj().T) / 2.0)[::-1]


def check_psd(m, name: str = "matrix", tol: float = PSD_TOL) -> np.ndarray:
    """Validate PSD-ness within ``tol``; returns the hermitized matrix."""
    a = hermitize(m)
    w = np.linalg.eigvalsh(a)
    if w.size and w[0] < -tol:
        raise NotPSDError(f"{name} has eigenvalue {w[0]:.3e} below -{tol}")
    return a


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``rows x cols`` matrix with orthonormal columns."""
    if cols > rows:
        raise ShapeError(f"isometry needs rows >= cols, got {rows} < {cols}")
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def to_wire(m) -> list:
    """Matrix as a JSON-ready array of rows of [re, im] pairs."""
    a = as_cmat(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def from_wire(rows, name: str = "matrix") -> np.ndarray:
    """Parse the interchange format produced by :func:`to_wire`."""
    try:
        a = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{name}: malformed matrix payload") from exc
    if a.ndim != 3 or a.shape[2] != 2:
        raise ShapeError(
            f"{name}: expected rows of [re, im] pairs, got shape {a.shape}"
        )
    return as_cmat(a[:, :, 0] + 1j * a[:, :, 1], name)
