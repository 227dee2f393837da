"""Seeded invariant battery behind the CLI's verify-suite task.

Each check returns (name, passed, detail); the battery is deterministic for
a fixed seed and sized to finish in seconds, so it can run as a smoke test
on any install.
"""

from __future__ import annotations

import numpy as np

from . import blockmat as bm
from .algebra import BlockStructure, DensityState, tracial_state
from .capacity import (
    SamplerConfig,
    capacity_estimate,
    decomposition_sampler,
    info_bundle,
    random_density_state,
)
from .channel import identity_channel, random_channel
from .entangle import (
    AmplitudeOperator,
    compound_from_amplitude,
    entangling_from_amplitude,
    marginals,
    standard_compound,
)
from .entropy import (
    monotonicity_check,
    mutual_information,
    q_entropy,
    relative_entropy,
    vn_entropy,
)


def _random_amplitude(rng, max_dim=4) -> AmplitudeOperator:
    dg, dh, df = (int(rng.integers(1, max_dim + 1)) for _ in range(3))
    m = rng.standard_normal((dg * dh, df)) + 1j * rng.standard_normal((dg * dh, df))
    m /= np.sqrt(np.real(np.vdot(m, m)))
    return AmplitudeOperator(m, dg, dh)


def _check_kernel(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(10):
        d = int(rng.integers(2, 13))
        h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (h + h.conj().T) / 2
        w, v = bm.herm_eig(h)
        worst = max(worst, bm.max_abs((v * w) @ v.conj().T - h))
        p = h @ h.conj().T
        s = bm.spectral_fn(p, "sqrt")
        worst = max(worst, bm.max_abs(s @ s - p) / max(1.0, bm.max_abs(p)))
    return worst < 1e-10, f"worst residual {worst:.2e}"


def _check_reconstruction(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(12):
        ups = _random_amplitude(rng)
        kappa = entangling_from_amplitude(ups)
        omega = ups.matrix @ ups.matrix.conj().T
        worst = max(
            worst,
            bm.max_abs(
                kappa.rho()
                - bm.partial_trace(omega, ups.dim_g, ups.dim_h, "left")
            ),
            bm.max_abs(
                kappa.sigma()
                - bm.partial_trace(omega, ups.dim_g, ups.dim_h, "right")
            ),
        )
    return worst < 1e-10, f"worst marginal residual {worst:.2e}"


def _check_standard_marginals(rng) -> tuple[bool, str]:
    worst = 0.0
    for dims in [(2,), (3,), (2, 1), (2, 2)]:
        rho = random_density_state(BlockStructure(dims), rng)
        sig, marg = marginals(standard_compound(rho))
        for a, b in zip(sig.blocks, rho.blocks):
            worst = max(worst, bm.max_abs(np.asarray(a) - np.asarray(b)))
        for a, b in zip(marg.blocks, rho.blocks):
            worst = max(worst, bm.max_abs(np.asarray(a) - np.asarray(b)))
    return worst < 1e-10, f"worst deviation {worst:.2e}"


def _check_q_entropy_identity(rng) -> tuple[bool, str]:
    worst = 0.0
    for dims in [(2,), (3,), (1, 1), (2, 1), (2, 2)]:
        rho = random_density_state(BlockStructure(dims), rng)
        h = q_entropy(rho).value
        mi = mutual_information(standard_compound(rho)).value
        worst = max(worst, abs(h - mi))
    return worst < 1e-9, f"worst gap {worst:.2e}"


def _check_klein(rng) -> tuple[bool, str]:
    low = 0.0
    for _ in range(40):
        d = int(rng.integers(2, 9))
        s = BlockStructure((d,))
        a = random_density_state(s, rng).full_matrix()
        b = random_density_state(s, rng).full_matrix()
        rep = relative_entropy(a, b)
        if not rep.finite:
            continue
        low = min(low, rep.value)
    return low >= -1e-9, f"lowest value {low:.2e}"


def _check_monotonicity(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(20):
        ups = _random_amplitude(rng, max_dim=3)
        cs = compound_from_amplitude(ups)
        k = random_channel(
            cs.structure_b, cs.structure_b, int(rng.integers(1, 4)), rng
        )
        res = monotonicity_check(cs, k)
        worst = max(worst, res.info_after - res.info_before)
        if not res.ok:
            return False, f"information grew by {worst:.2e}"
    return True, f"worst increase {worst:.2e}"


def _check_ordering(rng) -> tuple[bool, str]:
    s2 = BlockStructure((2,))
    for trial in range(6):
        ch = random_channel(s2, s2, 4, rng)
        rho = random_density_state(s2, rng)
        cfg = SamplerConfig(seed=int(rng.integers(0, 2**32)), samples=40)
        b = info_bundle(rho, ch, cfg)
        if b.i_q < b.i_d - 1e-8 or b.i_d < b.i_o - 1e-8:
            return False, f"ordering violated at trial {trial}"
    return True, "iq >= id >= io on all sampled channels"


def _check_sampler(rng) -> tuple[bool, str]:
    worst = 0.0
    for dims in [(2,), (3,), (2, 1)]:
        rho = random_density_state(BlockStructure(dims), rng)
        rank = rho.spectral_rank()
        dec = decomposition_sampler(rho, rank + 2, rng)
        worst = max(worst, bm.max_abs(dec.total() - rho.full_matrix()))
        if not all(dec.pure_flags()):
            return False, "sampled part not rank one"
    return worst < 1e-10, f"worst reassembly residual {worst:.2e}"


def _check_capacity_identity(rng) -> tuple[bool, str]:
    s2 = BlockStructure((2,))
    ch = identity_channel(s2)
    cfg = SamplerConfig(seed=7, samples=10, state_samples=20)
    cq, _ = capacity_estimate(ch, "q", cfg)
    co, _ = capacity_estimate(ch, "o", cfg)
    ok = abs(cq - np.log(4)) < 1e-6 and abs(co - np.log(2)) < 1e-6
    return ok, f"cq={cq:.6f} co={co:.6f}"


def _check_tracial_maximum(rng) -> tuple[bool, str]:
    worst = 0.0
    for dims in [(2,), (3,), (2, 1), (1, 1)]:
        s = BlockStructure(dims)
        h = q_entropy(tracial_state(s)).value
        worst = max(worst, abs(h - np.log(s.dim)))
    return worst < 1e-12, f"worst |H - ln dim| {worst:.2e}"


def _check_identity_info(rng) -> tuple[bool, str]:
    worst = 0.0
    for dims in [(2,), (3,), (2, 1)]:
        s = BlockStructure(dims)
        rho = random_density_state(s, rng)
        ch = identity_channel(s)
        cfg = SamplerConfig(seed=11, samples=10)
        b = info_bundle(rho, ch, cfg)
        worst = max(
            worst,
            abs(b.i_q - q_entropy(rho).value),
            abs(b.i_d - vn_entropy(rho)),
            abs(b.i_o - vn_entropy(rho)),
        )
    return worst < 1e-9, f"worst deviation {worst:.2e}"


CHECKS = [
    ("kernel_spectral", _check_kernel),
    ("reconstruction_marginals", _check_reconstruction),
    ("standard_marginal_symmetry", _check_standard_marginals),
    ("q_entropy_closed_form", _check_q_entropy_identity),
    ("tracial_maximum", _check_tracial_maximum),
    ("klein_inequality", _check_klein),
    ("monotonicity", _check_monotonicity),
    ("information_ordering", _check_ordering),
    ("sampler_soundness", _check_sampler),
    ("deterministic_collapse", _check_identity_info),
    ("capacity_identity_channel", _check_capacity_identity),
]


def run_suite(seed: int) -> list[dict]:
    """Run every check with a generator derived from ``seed``."""
    results = []
    for index, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, index])
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(ok), "detail": detail})
    return results
