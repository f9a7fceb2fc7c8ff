"""Pluggable embedding/migration solvers and the two built-in baselines.

A solver receives the request, a catalog view, the current snapshot, and a
read-only residual view of the ledger, and answers with a complete mapping
table or a rejection reason.  Any accepted plan must hold up under the
orchestrator's own plan check against the same residuals; the baselines
self-validate before answering.  Decisions must be deterministic given the
input and the provided RNG state.
"""

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping

from .mano import (EmbeddingPlan, FailureReason, build_plan, check_plan_against,
                   leg_band_demands)
from .topology import SubstrateSnapshot, edge_key, path_latency, shortest_feasible_path
from .workload import SfcRequest, VnfCatalog


class SolveMode(Enum):
    EMBED = "embed"
    MIGRATE = "migrate"


@dataclass(frozen=True)
class SolverInput:
    """Everything a solver may look at for one decision."""

    request: SfcRequest
    catalog: VnfCatalog
    snapshot: SubstrateSnapshot
    cpu_free: tuple[Fraction, ...]
    ram_free: tuple[Fraction, ...]
    band_free: Mapping[tuple[int, int], Fraction]
    mode: SolveMode = SolveMode.EMBED
    old_plan: EmbeddingPlan | None = None


@dataclass(frozen=True)
class SolverDecision:
    plan: EmbeddingPlan | None = None
    reason: FailureReason | None = None

    def __post_init__(self):
        if (self.plan is None) == (self.reason is None):
            raise ValueError("decision must carry exactly one of plan / reason")

    @property
    def accepted(self) -> bool:
        return self.plan is not None

    @classmethod
    def accept(cls, plan: EmbeddingPlan) -> "SolverDecision":
        return cls(plan=plan)

    @classmethod
    def reject(cls, reason: FailureReason) -> "SolverDecision":
        return cls(reason=reason)


class Solver:
    """Solver contract; subclass and implement :meth:`solve`."""

    name = "base"

    def solve(self, inp: SolverInput, rng: random.Random) -> SolverDecision:
        raise NotImplementedError


def _solve_sequential(inp: SolverInput, choose) -> SolverDecision:
    """Shared position-by-position skeleton for the baseline solvers.

    Walks the chain in order keeping tentative residuals: ``choose`` picks a
    node among those with enough free cpu and ram, each virtual link is routed
    with the minimum-latency bandwidth-feasible path, and the first empty
    candidate set / missing path / QoS excess aborts with that reason.
    No backtracking.
    """
    req, cat, snap = inp.request, inp.catalog, inp.snapshot
    cpu = list(inp.cpu_free)
    ram = list(inp.ram_free)
    band = dict(inp.band_free)
    demands = leg_band_demands(req, cat)

    placement: list[int] = []
    paths = []
    latency = 0.0

    def route(src: int, dst: int, demand: Fraction):
        nonlocal latency
        path = shortest_feasible_path(snap, src, dst, demand, band)
        if path is None:
            return None
        latency += path_latency(snap, path)
        if demand > 0:
            for a, b in path.edges():
                key = edge_key(a, b)
                band[key] -= demand
                assert band[key] >= 0
        return path

    prev = req.ingress
    for pos, vnf_id in enumerate(req.vnf_chain):
        template = cat.templates[vnf_id]
        cpu_ok = [n for n in range(snap.node_count) if cpu[n] >= template.cpu_demand]
        if not cpu_ok:
            return SolverDecision.reject(FailureReason.NODE_CPU_INSUFFICIENT)
        candidates = [n for n in cpu_ok if ram[n] >= template.ram_demand]
        if not candidates:
            return SolverDecision.reject(FailureReason.NODE_RAM_INSUFFICIENT)
        node = choose(candidates, cpu, ram)
        path = route(prev, node, demands[pos])
        if path is None:
            return SolverDecision.reject(FailureReason.NO_PATH)
        if latency > req.qos_max_latency:
            return SolverDecision.reject(FailureReason.QOS_LATENCY_VIOLATED)
        cpu[node] -= template.cpu_demand
        ram[node] -= template.ram_demand
        assert cpu[node] >= 0 and ram[node] >= 0
        placement.append(node)
        paths.append(path)
        prev = node

    path = route(prev, req.egress, demands[-1])
    if path is None:
        return SolverDecision.reject(FailureReason.NO_PATH)
    if latency > req.qos_max_latency:
        return SolverDecision.reject(FailureReason.QOS_LATENCY_VIOLATED)
    paths.append(path)

    plan = build_plan(req, cat, snap, placement, paths)
    # Contract self-check: an Accept must survive the orchestrator's gate.
    verdict = check_plan_against(plan, req, snap, inp.cpu_free, inp.ram_free,
                                 inp.band_free)
    if verdict is not None:
        return SolverDecision.reject(verdict)
    return SolverDecision.accept(plan)


class RandomSolver(Solver):
    """Uniformly samples each VNF's host among the resource-feasible nodes.

    Sampling is integer-indexed off the provided RNG, so a fixed seed gives
    the same placement on every platform.
    """

    name = "random"

    def solve(self, inp: SolverInput, rng: random.Random) -> SolverDecision:
        def choose(candidates, cpu, ram):
            return candidates[rng.randrange(len(candidates))]
        return _solve_sequential(inp, choose)


class GreedySolver(Solver):
    """Deterministic baseline: prefer the most spacious node.

    Each position takes the feasible node with the highest
    ``cpu_free + ram_free`` score, both normalized by the snapshot-wide
    maximum capacity so the two resources weigh equally and bigger nodes win
    while they have headroom.  Ties go to the smallest node index; the RNG is
    never touched.
    """

    name = "greedy"

    def solve(self, inp: SolverInput, rng: random.Random) -> SolverDecision:
        snap = inp.snapshot
        max_cpu = max(snap.node_cpu_capacity)
        max_ram = max(snap.node_ram_capacity)

        def choose(candidates, cpu, ram):
            def score(n):
                s = Fraction(0)
                if max_cpu:
                    s += cpu[n] / max_cpu
                if max_ram:
                    s += ram[n] / max_ram
                return s
            best = candidates[0]
            best_score = score(best)
            for n in candidates[1:]:
                s = score(n)
                if s > best_score:
                    best, best_score = n, s
            return best
        return _solve_sequential(inp, choose)


SOLVERS: dict[str, type[Solver]] = {
    RandomSolver.name: RandomSolver,
    GreedySolver.name: GreedySolver,
}


def make_solver(name: str) -> Solver:
    try:
        return SOLVERS[name]()
    except KeyError:
        raise KeyError(f"unknown solver {name!r}; available: {sorted(SOLVERS)}") from None
