"""Batch command-line front end.

Usage::

    entlab <task> --config scenario.json [--seed N] [--samples M]
                  [--tol T] [--out report.json]

Tasks: entropy, q-entropy, mutual-info, reconstruct, info-bundle, capacity,
verify-suite.  The scenario file is a single self-describing JSON document;
flag overrides are folded into the effective configuration, which every
report embeds for provenance.  Exit codes: 0 success, 1 validation error,
2 internal consistency failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import blockmat as bm
from .algebra import BlockStructure, DensityState
from .capacity import SamplerConfig, capacity_estimate, info_bundle
from .channel import Channel
from .entangle import (
    AmplitudeOperator,
    CompoundState,
    Decomposition,
    amplitude_expectation,
    d_compound,
    entangled_expectation,
    entangling_from_amplitude,
    marginals,
)
from .entropy import mutual_information, q_entropy, vn_entropy
from .errors import ConsistencyError, DomainError, EntlabError, ShapeError
from .verify import run_suite

SCHEMA_VERSION = 1
TASKS = (
    "entropy",
    "q-entropy",
    "mutual-info",
    "reconstruct",
    "info-bundle",
    "capacity",
    "verify-suite",
)


class Scenario:
    """Parsed scenario config with per-task required inputs."""

    def __init__(self, task: str, raw: dict):
        if task not in TASKS:
            raise DomainError(f"unknown task {task!r}")
        if not isinstance(raw, dict):
            raise ShapeError("scenario config must be a JSON object")
        cfg_task = raw.get("task")
        if cfg_task is not None and cfg_task != task:
            raise DomainError(
                f"config declares task {cfg_task!r} but {task!r} was requested"
            )
        self.task = task
        self.raw = raw
        self.algebra = None
        if "algebra" in raw:
            self.algebra = BlockStructure.from_wire(raw["algebra"])
        self.state = None
        if "state" in raw:
            if self.algebra is None:
                raise DomainError("a state requires an 'algebra' entry")
            self.state = DensityState.from_wire(raw["state"], self.algebra)
        self.channel = None
        if "channel" in raw:
            self.channel = Channel.from_wire(raw["channel"])
        self.compound = None
        self.decomposition = None
        if "compound" in raw:
            payload = raw["compound"]
            if "omega" in payload:
                self.compound = CompoundState.from_wire(payload)
            elif "parts" in payload:
                self.decomposition = Decomposition.from_wire(payload)
            else:
                raise ShapeError(
                    "compound payload needs either 'omega' or 'parts'"
                )
        self.amplitude = None
        if "amplitude" in raw:
            self.amplitude = AmplitudeOperator.from_wire(raw["amplitude"])
        sampler_raw = dict(raw.get("sampler", {}))
        sampler_raw.setdefault("seed", 0)
        self.sampler = SamplerConfig(
            seed=int(sampler_raw["seed"]),
            samples=int(sampler_raw.get("samples", 2000)),
            ensemble_sizes=(
                tuple(sampler_raw["ensemble_sizes"])
                if sampler_raw.get("ensemble_sizes")
                else None
            ),
            state_samples=int(sampler_raw.get("state_samples", 500)),
        )
        self.kind = raw.get("kind")
        self.tolerances = dict(raw.get("tolerances", {}))
        for key, value in self.tolerances.items():
            if key not in ("ordering",):
                raise DomainError(f"unknown tolerance override {key!r}")
            if not isinstance(value, (int, float)) or value <= 0:
                raise DomainError(f"tolerance {key!r} must be a positive number")

    def require(self, *fields):
        for f in fields:
            if getattr(self, f) is None:
                raise DomainError(f"task {self.task!r} requires a {f!r} entry")

    def effective_config(self) -> dict:
        out = dict(self.raw)
        out["task"] = self.task
        out["sampler"] = self.sampler.to_wire()
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out


def _state_wire(state: DensityState) -> dict:
    return {
        "algebra": state.structure.to_wire(),
        "state": state.to_wire(),
    }


def _run_entropy(sc: Scenario) -> dict:
    sc.require("state")
    return {"value": vn_entropy(sc.state)}


def _run_q_entropy(sc: Scenario) -> dict:
    sc.require("state")
    return q_entropy(sc.state).to_wire()


def _run_mutual_info(sc: Scenario) -> dict:
    if sc.compound is None and sc.decomposition is None:
        raise DomainError("task 'mutual-info' requires a 'compound' entry")
    cs = sc.compound
    if cs is None:
        cs = d_compound(sc.decomposition, sc.algebra)
    report = mutual_information(cs).to_wire()
    sigma, rho = marginals(cs)
    report["marginal_b"] = sigma.to_wire()
    report["marginal_a"] = rho.to_wire()
    return report


def _run_reconstruct(sc: Scenario) -> dict:
    sc.require("amplitude")
    ups = sc.amplitude
    kappa = entangling_from_amplitude(ups)
    omega = ups.matrix @ ups.matrix.conj().T
    worst = 0.0
    for n in range(ups.dim_g):
        for m in range(ups.dim_g):
            b = np.zeros((ups.dim_g, ups.dim_g), dtype=np.complex128)
            b[n, m] = 1.0
            for h in range(ups.dim_h):
                for hh in range(ups.dim_h):
                    a = np.zeros((ups.dim_h, ups.dim_h), dtype=np.complex128)
                    a[h, hh] = 1.0
                    worst = max(
                        worst,
                        abs(
                            amplitude_expectation(ups, b, a)
                            - entangled_expectation(kappa, b, a)
                        ),
                    )
    return {
        "kappa": bm.to_wire(kappa.matrix),
        "dim_f": kappa.dim_f,
        "dim_g": kappa.dim_g,
        "dim_h": kappa.dim_h,
        "pairing_residual": worst,
        "sigma_residual": bm.max_abs(
            kappa.sigma() - bm.partial_trace(omega, ups.dim_g, ups.dim_h, "right")
        ),
        "rho_residual": bm.max_abs(
            kappa.rho() - bm.partial_trace(omega, ups.dim_g, ups.dim_h, "left")
        ),
    }


def _run_info_bundle(sc: Scenario) -> dict:
    sc.require("state", "channel")
    tol = float(sc.tolerances.get("ordering", 1e-7))
    bundle = info_bundle(sc.state, sc.channel, sc.sampler, ordering_tol=tol)
    return bundle.to_wire()


def _run_capacity(sc: Scenario) -> dict:
    sc.require("channel")
    if sc.kind is None:
        raise DomainError("task 'capacity' requires a 'kind' entry (q, d or o)")
    value, witness = capacity_estimate(sc.channel, str(sc.kind), sc.sampler)
    return {
        "kind": str(sc.kind).lower(),
        "value": value,
        "bound": "lower",
        "witness_state": _state_wire(witness),
    }


def _run_verify(sc: Scenario) -> dict:
    results = run_suite(int(sc.sampler.seed))
    for r in results:
        status = "pass" if r["passed"] else "FAIL"
        print(f"[{status}] {r['name']}: {r['detail']}", file=sys.stderr)
    if not all(r["passed"] for r in results):
        raise ConsistencyError("verification suite reported failures")
    return {"checks": results, "all_passed": True}


_RUNNERS = {
    "entropy": _run_entropy,
    "q-entropy": _run_q_entropy,
    "mutual-info": _run_mutual_info,
    "reconstruct": _run_reconstruct,
    "info-bundle": _run_info_bundle,
    "capacity": _run_capacity,
    "verify-suite": _run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entlab",
        description="Compound-state, entropy and capacity computations "
        "for block-decomposable algebras.",
    )
    parser.add_argument("task", choices=TASKS, help="computation to run")
    parser.add_argument(
        "--config", required=False, help="path to the scenario JSON file"
    )
    parser.add_argument("--seed", type=int, help="override sampler seed")
    parser.add_argument("--samples", type=int, help="override sampler budget")
    parser.add_argument(
        "--tol", type=float, help="override the ordering tolerance"
    )
    parser.add_argument(
        "--out", help="write the report here instead of stdout"
    )
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.task != "verify-suite":
                raise DomainError(f"task {args.task!r} requires --config")
            raw = {}
        else:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    raw = json.load(fh)
            except OSError as exc:
                print(f"error[io]: cannot read config: {exc}", file=sys.stderr)
                return 3
            except json.JSONDecodeError as exc:
                raise ShapeError(f"config is not valid JSON: {exc}") from exc
        if args.seed is not None or args.samples is not None:
            sampler = dict(raw.get("sampler", {}))
            if args.seed is not None:
                sampler["seed"] = args.seed
            if args.samples is not None:
                sampler["samples"] = args.samples
            raw["sampler"] = sampler
        if args.tol is not None:
            tolerances = dict(raw.get("tolerances", {}))
            tolerances["ordering"] = args.tol
            raw["tolerances"] = tolerances

        scenario = Scenario(args.task, raw)
        result = _RUNNERS[args.task](scenario)
        report = {
            "schema_version": SCHEMA_VERSION,
            "task": args.task,
            "generated_at": datetime.datetime.now(datetime.timezone.utc)
            .isoformat(timespec="seconds"),
            "config": scenario.effective_config(),
            "result": result,
        }
        payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
        if args.out:
            try:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(payload)
            except OSError as exc:
                print(f"error[io]: cannot write report: {exc}", file=sys.stderr)
                return 3
        else:
            sys.stdout.write(payload)
        return 0
    except ConsistencyError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except EntlabError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
