"""Channel information quantities and capacity estimates.

For a fixed input state the three quantities are: the value at the standard
(maximally informative) input coupling, the supremum over diagonal couplings
built from pure decompositions of the input, and the supremum over diagonal
couplings built from its orthogonal (spectral) decompositions.  The first is
a single exact evaluation; the other two are suprema over infinite families
and are estimated from known analytic witnesses plus seeded stochastic
search, so reported values are lower bounds that are exact whenever the
witness families contain the true maximizer (deterministic channels do).

Capacities sweep the input state as well; the sweep mixes the analytic
candidates (tracial state, normalized identity, pure basis states) with
seeded random states.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import blockmat as bm
from .algebra import (
    BlockStructure,
    DensityState,
    central_uniform_state,
    schatten,
    tracial_state,
)
from .channel import Channel, apply, apply_matrix, apply_to_compound
from .entangle import (
    Decomposition,
    d_compound,
    schatten_decomposition,
    standard_compound,
)
from .entropy import mutual_information, vn_entropy, vn_entropy_matrix
from .errors import ConsistencyError, DomainError, RefusalError

ORDERING_TOL = 1e-7
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SamplerConfig:
    """Seeded search budget for the suprema estimates.

    ``ensemble_sizes`` defaults to (rank, rank + 1, 2 * rank) of the state
    being decomposed; explicit sizes must not go below that rank.
    """

    seed: int
    samples: int = 2000
    ensemble_sizes: tuple[int, ...] | None = None
    state_samples: int = 500

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if self.state_samples < 1:
            raise DomainError("state_samples must be >= 1")
        if self.ensemble_sizes is not None:
            sizes = tuple(int(m) for m in self.ensemble_sizes)
            if not sizes or any(m < 1 for m in sizes):
                raise DomainError("ensemble sizes must be positive")
            object.__setattr__(self, "ensemble_sizes", sizes)

    def sizes_for(self, rank: int) -> tuple[int, ...]:
        if self.ensemble_sizes is None:
            return tuple(sorted({rank, rank + 1, 2 * rank}))
        if any(m < rank for m in self.ensemble_sizes):
            raise DomainError(
                f"ensemble sizes {self.ensemble_sizes} below state rank {rank}"
            )
        return self.ensemble_sizes

    def rng(self, stream: int) -> np.random.Generator:
        """Independent deterministic generator for a named sub-stream."""
        return np.random.default_rng([int(self.seed), int(stream)])

    def to_wire(self) -> dict:
        return {
            "seed": int(self.seed),
            "samples": int(self.samples),
            "ensemble_sizes": (
                None if self.ensemble_sizes is None else list(self.ensemble_sizes)
            ),
            "state_samples": int(self.state_samples),
        }


# Sub-stream tags; info_o and info_d_sup share the orthogonal stream so the
# sampled d-supremum dominates the o-supremum by construction.
_STREAM_ORTHO = 0
_STREAM_PURE = 1
_STREAM_STATES = 2


def _worker_count() -> int:
    raw = os.environ.get("ENTLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _eval_all(fn, items: list) -> list:
    workers = _worker_count()
    if workers <= 1 or len(items) < 4:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def random_density_state(
    structure: BlockStructure, rng: np.random.Generator
) -> DensityState:
    """Random state: Dirichlet block weights, Dirichlet spectra per block,
    Haar eigenvectors."""
    nu = rng.dirichlet(np.ones(structure.num_blocks))
    blocks = []
    for i, d in enumerate(structure.dims):
        lam = rng.dirichlet(np.ones(d)) * nu[i]
        v = bm.haar_unitary(d, rng)
        blocks.append((v * lam) @ v.conj().T)
    return DensityState(structure, blocks)


def _spectral_cache(rho0: DensityState) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """Per-block spectral data (block index, eigenvalues, embedded vectors)."""
    per_block: dict[int, list[tuple[float, np.ndarray]]] = {}
    for lam, vec, i in schatten(rho0):
        per_block.setdefault(i, []).append((lam, vec))
    cache = []
    for i in sorted(per_block):
        lams = np.array([lam for lam, _ in per_block[i]])
        vecs = np.stack([vec for _, vec in per_block[i]], axis=1)
        cache.append((i, lams, vecs))
    return cache


def _sample_pure_parts(
    cache, nu: np.ndarray, m: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Raw parts of a Haar-random pure decomposition (shared rng stream)."""
    total_rank = sum(len(lams) for _, lams, _ in cache)
    if m < total_rank:
        raise DomainError(f"ensemble size {m} below state rank {total_rank}")
    counts = [len(lams) for _, lams, _ in cache]
    extra = m - total_rank
    if extra:
        weights = np.array([nu[i] for i, _, _ in cache])
        weights = weights / weights.sum()
        for pick in rng.choice(len(cache), size=extra, p=weights):
            counts[int(pick)] += 1
    parts = []
    for (_, lams, vecs), m_i in zip(cache, counts):
        mix = bm.haar_isometry(m_i, len(lams), rng)
        amps = vecs @ (np.sqrt(lams)[:, None] * mix.T)
        for n in range(m_i):
            eta = amps[:, n]
            parts.append(np.outer(eta, eta.conj()))
    return parts


def decomposition_sampler(
    rho0: DensityState, m: int, rng: np.random.Generator | int
) -> Decomposition:
    """Random pure decomposition of a state into ``m`` parts.

    Per block, the spectral vectors are mixed through a Haar-random isometry
    with one row per part assigned to that block; every block keeps at least
    its spectral rank many parts and extra parts are assigned to blocks with
    probability given by the central weights.  The parts always reassemble
    the input state exactly (up to rounding).
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    parts = _sample_pure_parts(_spectral_cache(rho0), rho0.nu(), m, rng)
    return Decomposition(parts, kind="pure")


def _rotated_schatten_parts(
    rho0: DensityState, rng: np.random.Generator
) -> list[np.ndarray]:
    """Schatten parts with Haar-rotated degenerate eigenspaces."""
    parts = []
    for i, b in enumerate(rho0.blocks):
        w, v = bm.herm_eig(b)
        v = np.array(v)
        j = 0
        while j < len(w):
            k = j + 1
            while k < len(w) and abs(w[k] - w[j]) < DEGENERACY_TOL:
                k += 1
            if k - j > 1 and w[j] > bm.EIG_CUTOFF:
                v[:, j:k] = v[:, j:k] @ bm.haar_unitary(k - j, rng)
            j = k
        s = rho0.structure.block_slice(i)
        for j, lam in enumerate(w):
            if lam < bm.EIG_CUTOFF:
                continue
            vec = np.zeros(rho0.dim, dtype=np.complex128)
            vec[s] = v[:, j]
            parts.append(lam * np.outer(vec, vec.conj()))
    return parts


def _has_degeneracy(rho0: DensityState) -> bool:
    for b in rho0.blocks:
        w = bm.psd_eigvals(b)
        w = w[w > bm.EIG_CUTOFF]
        if len(w) > 1 and np.any(np.abs(np.diff(w)) < DEGENERACY_TOL):
            return True
    return False


def _ortho_candidates(rho0: DensityState, cfg: SamplerConfig) -> list[Decomposition]:
    cands = [schatten_decomposition(rho0)]
    if _has_degeneracy(rho0):
        rng = cfg.rng(_STREAM_ORTHO)
        cands.extend(
            Decomposition._trusted(_rotated_schatten_parts(rho0, rng), "orthogonal")
            for _ in range(cfg.samples)
        )
    return cands


def _info_of(ch: Channel, dec: Decomposition, structure: BlockStructure) -> float:
    """Contractual evaluation: information of the channelled diagonal compound."""
    cs = apply_to_compound(ch, d_compound(dec, structure))
    return mutual_information(cs).value


def _part_entropy(m: np.ndarray) -> float:
    w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
    w = w[w > bm.EIG_CUTOFF]
    return float(-np.sum(w * np.log(w))) if w.size else 0.0


def _fast_d_info(ch: Channel, dec: Decomposition, s_output: float) -> float:
    """Rank candidates cheaply via the block-diagonal entropy identity.

    The channelled diagonal compound is block diagonal with one block per
    part, so its joint entropy is the pooled entropy of the channelled
    parts, its probe marginal is diag of the part weights, and its output
    marginal entropy ``s_output`` is shared by all decompositions of the
    same state.  Agrees with :func:`_info_of` to rounding; tests pin that.
    """
    mus = []
    s_joint = 0.0
    for p in dec.parts:
        out = apply_matrix(ch, p)
        mus.append(max(float(np.trace(out).real), 0.0))
        s_joint += _part_entropy(out)
    mus = np.asarray(mus)
    mus = mus[mus > bm.EIG_CUTOFF]
    s_probe = float(-np.sum(mus * np.log(mus))) if mus.size else 0.0
    return s_probe + s_output - s_joint


def info_q(rho0: DensityState, ch: Channel) -> float:
    """Information through the channel at the standard input coupling."""
    cs = apply_to_compound(ch, standard_compound(rho0))
    return mutual_information(cs).value


def _search_best(
    ch: Channel, rho0: DensityState, cands: list[Decomposition]
) -> tuple[float, Decomposition]:
    """Rank with the fast evaluator, report the winner contractually."""
    s_output = vn_entropy(apply(ch, rho0))
    values = _eval_all(lambda d: _fast_d_info(ch, d, s_output), cands)
    best = int(np.argmax(values))
    witness = Decomposition(list(cands[best].parts), cands[best].kind)
    return _info_of(ch, witness, rho0.structure), witness


def info_o(
    rho0: DensityState, ch: Channel, cfg: SamplerConfig
) -> tuple[float, Decomposition]:
    """Best orthogonal-coupling information for a fixed input state.

    The spectral decomposition is the sole candidate unless the spectrum is
    degenerate, in which case the eigenbasis freedom is searched with
    ``cfg.samples`` Haar rotations of each degenerate eigenspace.
    """
    return _search_best(ch, rho0, _ortho_candidates(rho0, cfg))


def info_d_sup(
    rho0: DensityState, ch: Channel, cfg: SamplerConfig
) -> tuple[float, Decomposition]:
    """Sampled supremum of the diagonal-coupling information.

    Candidates are the orthogonal family of :func:`info_o` plus
    ``cfg.samples`` Haar-random pure decompositions for every ensemble size;
    the reported value is a lower bound of the true supremum, with the
    witnessing decomposition returned alongside.  Ties break toward the
    earliest candidate, so results are reproducible bit for bit.
    """
    cands = _ortho_candidates(rho0, cfg)
    cache = _spectral_cache(rho0)
    nu = rho0.nu()
    rank = sum(len(lams) for _, lams, _ in cache)
    rng = cfg.rng(_STREAM_PURE)
    for m in cfg.sizes_for(rank):
        cands.extend(
            Decomposition._trusted(_sample_pure_parts(cache, nu, m, rng), "pure")
            for _ in range(cfg.samples)
        )
    return _search_best(ch, rho0, cands)


@dataclass
class InfoBundle:
    """The three information quantities with their search witnesses."""

    i_q: float
    i_d: float
    i_o: float
    witness_d: Decomposition
    witness_o: Decomposition
    config: SamplerConfig

    def __post_init__(self):
        if self.i_q < self.i_d - 1e-8 or self.i_d < self.i_o - 2e-8:
            raise ConsistencyError(
                f"information ordering violated: iq={self.i_q!r} "
                f"id={self.i_d!r} io={self.i_o!r}"
            )

    def to_wire(self) -> dict:
        return {
            "iq": self.i_q,
            "id": self.i_d,
            "io": self.i_o,
            "witness_id": self.witness_d.to_wire(),
            "witness_io": self.witness_o.to_wire(),
            "config": self.config.to_wire(),
        }


def info_bundle(
    rho0: DensityState,
    ch: Channel,
    cfg: SamplerConfig,
    ordering_tol: float = ORDERING_TOL,
) -> InfoBundle:
    """Assemble all three quantities and enforce their ordering.

    A violation beyond ``ordering_tol`` raises a consistency error: the
    sampled searches are constructed so the orderings can only fail through
    a numerics bug, never through unlucky sampling.
    """
    i_q = info_q(rho0, ch)
    i_d, wit_d = info_d_sup(rho0, ch, cfg)
    i_o, wit_o = info_o(rho0, ch, cfg)
    if i_q < i_d - ordering_tol or i_d < i_o - ordering_tol:
        raise ConsistencyError(
            f"information ordering violated beyond {ordering_tol}: "
            f"iq={i_q!r} id={i_d!r} io={i_o!r}"
        )
    return InfoBundle(i_q, i_d, i_o, wit_d, wit_o, cfg)


def _pure_basis_states(structure: BlockStructure) -> list[DensityState]:
    out = []
    for i, d in enumerate(structure.dims):
        for k in range(d):
            blocks = [
                np.zeros((dj, dj), dtype=np.complex128) for dj in structure.dims
            ]
            blocks[i][k, k] = 1.0
            out.append(DensityState(structure, blocks))
    return out


def capacity_estimate(
    ch: Channel, kind: str, cfg: SamplerConfig
) -> tuple[float, DensityState]:
    """Lower-bound capacity estimate with the achieving input state.

    Sweeps the tracial state, the normalized identity, every basis pure
    state, and ``cfg.state_samples`` random input states; each candidate is
    scored with the information quantity selected by ``kind`` ("q", "d" or
    "o").  The analytic candidates make the estimate exact for deterministic
    channels.
    """
    kind = kind.lower()
    if kind not in ("q", "d", "o"):
        raise DomainError(f"kind must be 'q', 'd' or 'o', got {kind!r}")
    structure = ch.structure_in
    states = [tracial_state(structure), central_uniform_state(structure)]
    states.extend(_pure_basis_states(structure))
    rng = cfg.rng(_STREAM_STATES)
    states.extend(random_density_state(structure, rng) for _ in range(cfg.state_samples))

    if kind == "q":
        scores = _eval_all(lambda s: info_q(s, ch), states)
    elif kind == "d":
        scores = _eval_all(lambda s: info_d_sup(s, ch, cfg)[0], states)
    else:
        scores = _eval_all(lambda s: info_o(s, ch, cfg)[0], states)
    best = int(np.argmax(scores))
    return float(scores[best]), states[best]


def bruteforce_info_oracle(
    rho0: DensityState, ch: Channel, resolution: int = 64
) -> float:
    """Independent grid oracle for the diagonal-coupling supremum.

    Uses the identity that a diagonal compound state through the channel
    carries information S(ch(rho0)) minus the weighted output entropies of
    the parts, and that at fixed central weights the minimization decouples
    over blocks.  One-dimensional blocks are exact; two-dimensional blocks
    are searched exhaustively over the two-angle family of two-part pure
    decompositions.  Blocks larger than 2x2 are refused.
    """
    if any(d > 2 for d in rho0.structure.dims):
        raise RefusalError("oracle only enumerates blocks of dimension <= 2")
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    if rho0.structure != ch.structure_in:
        raise DomainError("state structure does not match the channel input")

    s_out = vn_entropy(apply(ch, rho0))

    def out_entropy(vec: np.ndarray) -> float:
        return vn_entropy_matrix(apply_matrix(ch, np.outer(vec, vec.conj())))

    cost = 0.0
    for i, b in enumerate(rho0.blocks):
        w, v = bm.herm_eig(b)
        keep = w > bm.EIG_CUTOFF
        w = w[keep]
        v = v[:, keep]
        if w.size == 0:
            continue
        s = rho0.structure.block_slice(i)
        vecs = np.zeros((rho0.dim, w.size), dtype=np.complex128)
        vecs[s, :] = v
        if w.size == 1:
            cost += float(w[0]) * out_entropy(vecs[:, 0])
            continue
        # Rank-two block: exhaustive (theta, phi) grid over two-part splits.
        sq = np.sqrt(w)
        best = None
        thetas = np.linspace(0.0, np.pi / 2.0, resolution)
        phis = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
        for theta in thetas:
            c, sn = np.cos(theta), np.sin(theta)
            for phi in phis:
                e = np.exp(1j * phi)
                eta1 = c * sq[0] * vecs[:, 0] + sn * e * sq[1] * vecs[:, 1]
                eta2 = -sn * np.conj(e) * sq[0] * vecs[:, 0] + c * sq[1] * vecs[:, 1]
                point = 0.0
                for eta in (eta1, eta2):
                    mu = float(np.real(np.vdot(eta, eta)))
                    if mu > bm.EIG_CUTOFF:
                        point += mu * out_entropy(eta / np.sqrt(mu))
                if best is None or point < best:
                    best = point
        cost += best
    return s_out - cost
