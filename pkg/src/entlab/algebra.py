"""Block-decomposable algebras and their normal states.

An algebra here is a direct sum of full matrix blocks, described by the list
of block dimensions.  Its rank (size of a maximal Abelian subalgebra, equal
to the underlying Hilbert-space dimension) is the sum of the block sizes; its
linear dimension is the sum of their squares.  States are kept block-wise as
positive matrices summing to trace one, never as a pre-assembled direct sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import blockmat as bm
from .errors import DomainError, ShapeError, StructureError


@dataclass(frozen=True)
class BlockStructure:
    """Dimensions (d_1, ..., d_k) of the blocks of a decomposable algebra."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims:
            raise ShapeError("block structure needs at least one block")
        clean = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in clean):
            raise ShapeError(f"block dimensions must be >= 1, got {self.dims}")
        object.__setattr__(self, "dims", clean)

    @property
    def rank(self) -> int:
        return sum(self.dims)

    @property
    def dim(self) -> int:
        return sum(d * d for d in self.dims)

    @property
    def num_blocks(self) -> int:
        return len(self.dims)

    @property
    def trivial(self) -> bool:
        return len(self.dims) == 1

    def offsets(self) -> list[int]:
        out = [0]
        for d in self.dims:
            out.append(out[-1] + d)
        return out

    def block_slice(self, i: int) -> slice:
        off = self.offsets()
        return slice(off[i], off[i + 1])

    def embed(self, i: int, block: np.ndarray) -> np.ndarray:
        """Place a block matrix into the full rank x rank direct sum."""
        b = bm.as_cmat(block, f"block {i}")
        if b.shape != (self.dims[i], self.dims[i]):
            raise ShapeError(
                f"block {i} must be {self.dims[i]}x{self.dims[i]}, got {b.shape}"
            )
        full = np.zeros((self.rank, self.rank), dtype=np.complex128)
        s = self.block_slice(i)
        full[s, s] = b
        return full

    def to_wire(self) -> dict:
        return {"blocks": list(self.dims)}

    @classmethod
    def from_wire(cls, data) -> "BlockStructure":
        if not isinstance(data, dict) or "blocks" not in data:
            raise ShapeError("block structure payload must be {'blocks': [...]}")
        return cls(tuple(data["blocks"]))


def rank_dim(structure: BlockStructure) -> tuple[int, int]:
    """(rank, dim) of the algebra; dim <= rank**2 always holds."""
    return structure.rank, structure.dim


class DensityState:
    """Block-diagonal density operator: PSD blocks with total trace one.

    Zero-weight blocks are permitted; they are skipped by spectral
    decompositions and entropy sums (the 0 ln 0 = 0 convention).
    """

    def __init__(self, structure: BlockStructure, blocks):
        self.structure = structure
        if len(blocks) != structure.num_blocks:
            raise ShapeError(
                f"expected {structure.num_blocks} blocks, got {len(blocks)}"
            )
        cleaned = []
        total = 0.0
        for i, raw in enumerate(blocks):
            b = bm.as_cmat(raw, f"block {i}")
            d = structure.dims[i]
            if b.shape != (d, d):
                raise ShapeError(f"block {i} must be {d}x{d}, got {b.shape}")
            if bm.max_abs(b - b.conj().T) > bm.HERM_TOL:
                raise DomainError(f"block {i} is not Hermitian within tolerance")
            b = bm.check_psd(b, f"block {i}")
            b.setflags(write=False)
            cleaned.append(b)
            total += float(np.trace(b).real)
        if abs(total - 1.0) > bm.TRACE_TOL:
            raise DomainError(f"blocks must sum to trace 1, got {total!r}")
        self.blocks = tuple(cleaned)

    @property
    def dim(self) -> int:
        return self.structure.rank

    def nu(self) -> np.ndarray:
        """Central weights nu(i) = tr of each block."""
        return np.array([max(float(np.trace(b).real), 0.0) for b in self.blocks])

    def normalized_block(self, i: int) -> np.ndarray:
        w = float(np.trace(self.blocks[i]).real)
        if w <= bm.EIG_CUTOFF:
            raise DomainError(f"block {i} has zero weight; no normalized state")
        return self.blocks[i] / w

    def full_matrix(self) -> np.ndarray:
        """Assemble the direct-sum matrix on demand."""
        full = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for i, b in enumerate(self.blocks):
            s = self.structure.block_slice(i)
            full[s, s] = b
        return full

    def spectral_rank(self, cutoff: float = bm.EIG_CUTOFF) -> int:
        """Number of eigenvalues above ``cutoff`` across all blocks."""
        return sum(
            int(np.sum(bm.psd_eigvals(b) > cutoff)) for b in self.blocks
        )

    def to_wire(self) -> dict:
        return {"blocks": [bm.to_wire(b) for b in self.blocks]}

    @classmethod
    def from_wire(cls, data, structure: BlockStructure) -> "DensityState":
        if not isinstance(data, dict) or "blocks" not in data:
            raise ShapeError("state payload must be {'blocks': [matrix, ...]}")
        blocks = [bm.from_wire(b, f"block {i}") for i, b in enumerate(data["blocks"])]
        return cls(structure, blocks)

    @classmethod
    def from_full(
        cls, matrix, structure: BlockStructure, tol: float = bm.BLOCK_TOL
    ) -> "DensityState":
        """Extract blocks from a full matrix, rejecting off-block mass."""
        m = bm.require_square(matrix)
        if m.shape[0] != structure.rank:
            raise ShapeError(
                f"matrix size {m.shape[0]} does not match rank {structure.rank}"
            )
        blocks = []
        probe = np.array(m, copy=True)
        for i in range(structure.num_blocks):
            s = structure.block_slice(i)
            blocks.append(m[s, s])
            probe[s, s] = 0.0
        if bm.max_abs(probe) > tol:
            raise StructureError(
                f"off-block mass {bm.max_abs(probe):.3e} exceeds tolerance {tol}"
            )
        return cls(structure, blocks)


def central_distribution(rho: DensityState) -> np.ndarray:
    """Probability vector nu(i) = tr rho(i) induced on the center."""
    return rho.nu()


def tracial_state(structure: BlockStructure) -> DensityState:
    """State with blocks I_{d_i} * d_i / dim, i.e. nu(i) = d_i**2 / dim."""
    dim = structure.dim
    blocks = [np.eye(d, dtype=np.complex128) * (d / dim) for d in structure.dims]
    return DensityState(structure, blocks)


def central_uniform_state(structure: BlockStructure) -> DensityState:
    """The normalized identity I / rank, with nu(i) = d_i / rank.

    Maximizes the von Neumann entropy over the structure, whereas the
    tracial state maximizes the dimensional entropy.
    """
    r = structure.rank
    blocks = [np.eye(d, dtype=np.complex128) / r for d in structure.dims]
    return DensityState(structure, blocks)


def schatten(rho: DensityState) -> list[tuple[float, np.ndarray, int]]:
    """Spectral decomposition into weighted unit eigenvectors.

    Returns (weight, unit vector embedded in the full space, block index)
    triples with weights below the support cutoff dropped.  Eigenvectors are
    orthonormal inside each block and carry the deterministic phase fixing of
    :func:`blockmat.herm_eig`.
    """
    out = []
    for i, b in enumerate(rho.blocks):
        w, v = bm.herm_eig(b)
        s = rho.structure.block_slice(i)
        for j, lam in enumerate(w):
            if lam < bm.EIG_CUTOFF:
                continue
            vec = np.zeros(rho.dim, dtype=np.complex128)
            vec[s] = v[:, j]
            out.append((float(lam), vec, i))
    return out
