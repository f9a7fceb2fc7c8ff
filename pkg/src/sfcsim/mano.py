"""Resource ledger, embedding plans, and orchestration-side plan validation.

The ledger plays the infrastructure-manager role: it tracks how much of each
node's cpu/ram and each edge's bandwidth is occupied by active service chains
and enforces conservation exactly (Fraction arithmetic, no float drift).
Plan checking is the orchestrator-side gate every solver decision passes
through before resources move.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping

from .topology import (PhysicalPath, SubstrateSnapshot, edge_key, path_is_valid,
                       path_latency)
from .workload import SfcRequest, VnfCatalog


class DuplicateSfc(ValueError):
    """An allocation already exists for this sfc_id."""


class UnknownSfc(KeyError):
    """No active allocation for this sfc_id."""


class InsufficientResources(ValueError):
    """Defensive re-check failed: the plan no longer fits the free resources."""


class FailureReason(Enum):
    """Why an SFC was rejected, or why a running SFC was cut short."""

    NODE_CPU_INSUFFICIENT = "NodeCpuInsufficient"
    NODE_RAM_INSUFFICIENT = "NodeRamInsufficient"
    LINK_BANDWIDTH_INSUFFICIENT = "LinkBandwidthInsufficient"
    NO_PATH = "NoPath"
    QOS_LATENCY_VIOLATED = "QosLatencyViolated"
    MIGRATION_FAILED = "MigrationFailed"
    SOLVER_REJECTED = "SolverRejected"


@dataclass(frozen=True)
class EmbeddingPlan:
    """The solver's mapping table: placements, routing paths, allocations.

    ``virtual_link_paths`` has one entry per virtual link of the end-to-end
    chain: ingress -> vnf_1, each consecutive VNF pair, vnf_k -> egress
    (chain length + 1 paths).  Allocation maps are the per-node / per-edge
    sums implied by the placement, the template demands, and the paths.
    """

    sfc_id: int
    vnf_placement: tuple[int, ...]
    virtual_link_paths: tuple[PhysicalPath, ...]
    cpu_alloc: Mapping[int, Fraction]
    ram_alloc: Mapping[int, Fraction]
    band_alloc: Mapping[tuple[int, int], Fraction]
    total_latency: float


def leg_band_demands(request: SfcRequest, catalog: VnfCatalog) -> tuple[Fraction, ...]:
    """Bandwidth demand per virtual link, ingress/egress legs included.

    The catalog only declares demands between VNF templates; the legs that
    anchor the chain to its endpoints carry no bandwidth of their own.
    """
    inner = []
    for a, b in zip(request.vnf_chain, request.vnf_chain[1:]):
        band = catalog.band_demand(a, b)
        if band is None:
            raise ValueError(f"no bandwidth demand declared for template pair ({a},{b})")
        inner.append(band)
    return (Fraction(0), *inner, Fraction(0))


def build_plan(request: SfcRequest, catalog: VnfCatalog, snap: SubstrateSnapshot,
               placement, paths) -> EmbeddingPlan:
    """Assemble a plan from a placement and per-leg paths, deriving allocations."""
    placement = tuple(placement)
    paths = tuple(paths)
    cpu: dict[int, Fraction] = {}
    ram: dict[int, Fraction] = {}
    for node, vnf_id in zip(placement, request.vnf_chain):
        t = catalog.templates[vnf_id]
        cpu[node] = cpu.get(node, Fraction(0)) + t.cpu_demand
        ram[node] = ram.get(node, Fraction(0)) + t.ram_demand
    band: dict[tuple[int, int], Fraction] = {}
    for demand, path in zip(leg_band_demands(request, catalog), paths):
        if demand == 0:
            continue
        for a, b in path.edges():
            key = edge_key(a, b)
            band[key] = band.get(key, Fraction(0)) + demand
    total = sum(path_latency(snap, p) for p in paths)
    return EmbeddingPlan(sfc_id=request.sfc_id, vnf_placement=placement,
                         virtual_link_paths=paths,
                         cpu_alloc=dict(sorted(cpu.items())),
                         ram_alloc=dict(sorted(ram.items())),
                         band_alloc=dict(sorted(band.items())),
                         total_latency=total)


def plan_structure_errors(plan: EmbeddingPlan, request: SfcRequest,
                          catalog: VnfCatalog, snap: SubstrateSnapshot) -> list[str]:
    """Structural completeness check for a solver-produced plan.

    Returns human-readable problems; an empty list means the plan is wired
    correctly (placements cover the chain, paths connect end to end, and the
    allocation maps and latency match what the placement implies).
    """
    problems: list[str] = []
    k = len(request.vnf_chain)
    if len(plan.vnf_placement) != k:
        problems.append(f"placement covers {len(plan.vnf_placement)} of {k} positions")
    if len(plan.virtual_link_paths) != k + 1:
        problems.append(f"expected {k + 1} virtual link paths, got {len(plan.virtual_link_paths)}")
    if problems:
        return problems

    waypoints = (request.ingress, *plan.vnf_placement, request.egress)
    for i, path in enumerate(plan.virtual_link_paths):
        if path.nodes[0] != waypoints[i] or path.nodes[-1] != waypoints[i + 1]:
            problems.append(
                f"leg {i} runs {path.nodes[0]}->{path.nodes[-1]}, "
                f"expected {waypoints[i]}->{waypoints[i + 1]}")
    if problems:
        return problems

    rebuilt = build_plan(request, catalog, snap, plan.vnf_placement,
                         plan.virtual_link_paths)
    if dict(plan.cpu_alloc) != rebuilt.cpu_alloc:
        problems.append("cpu_alloc does not match placement demands")
    if dict(plan.ram_alloc) != rebuilt.ram_alloc:
        problems.append("ram_alloc does not match placement demands")
    if dict(plan.band_alloc) != rebuilt.band_alloc:
        problems.append("band_alloc does not match path demands")
    if plan.total_latency != rebuilt.total_latency:
        problems.append(f"total_latency {plan.total_latency} != {rebuilt.total_latency}")
    return problems


def check_plan_against(plan: EmbeddingPlan, request: SfcRequest,
                       snap: SubstrateSnapshot,
                       cpu_free, ram_free,
                       band_free: Mapping[tuple[int, int], Fraction]) -> FailureReason | None:
    """Core feasibility check against explicit residuals.

    Check order is fixed so every rejection maps to one deterministic reason:
    paths, then cpu, then ram, then bandwidth, then the QoS latency bound.
    Returns None when the plan fits.
    """
    for path in plan.virtual_link_paths:
        if not path_is_valid(snap, path):
            return FailureReason.NO_PATH
    for node, amount in plan.cpu_alloc.items():
        if amount > cpu_free[node]:
            return FailureReason.NODE_CPU_INSUFFICIENT
    for node, amount in plan.ram_alloc.items():
        if amount > ram_free[node]:
            return FailureReason.NODE_RAM_INSUFFICIENT
    for key, amount in plan.band_alloc.items():
        if amount > band_free.get(key, Fraction(0)):
            return FailureReason.LINK_BANDWIDTH_INSUFFICIENT
    if plan.total_latency > request.qos_max_latency:
        return FailureReason.QOS_LATENCY_VIOLATED
    return None


class ResourceLedger:
    """Exact occupancy accounting for one simulation run.

    Tracks used amounts (the sum over active plans) and derives free values
    from the current snapshot's capacities, so conservation
    ``capacity - free == sum(active allocations)`` holds by construction and
    is re-verifiable from scratch.
    """

    def __init__(self, snapshot: SubstrateSnapshot):
        self._snapshot = snapshot
        n = snapshot.node_count
        self._cpu_used = [Fraction(0)] * n
        self._ram_used = [Fraction(0)] * n
        self._band_used: dict[tuple[int, int], Fraction] = {}
        self.allocations: dict[int, EmbeddingPlan] = {}

    @property
    def snapshot(self) -> SubstrateSnapshot:
        return self._snapshot

    def set_snapshot(self, snapshot: SubstrateSnapshot) -> None:
        """Swap the capacity baseline at a topology change; usage is untouched."""
        if snapshot.node_count != self._snapshot.node_count:
            raise ValueError("node count must be stable across snapshots")
        self._snapshot = snapshot

    # -- usage / residual views

    def cpu_used(self, node: int) -> Fraction:
        return self._cpu_used[node]

    def ram_used(self, node: int) -> Fraction:
        return self._ram_used[node]

    def band_used(self, u: int, v: int) -> Fraction:
        return self._band_used.get(edge_key(u, v), Fraction(0))

    def cpu_free(self, node: int) -> Fraction:
        return self._snapshot.node_cpu_capacity[node] - self._cpu_used[node]

    def ram_free(self, node: int) -> Fraction:
        return self._snapshot.node_ram_capacity[node] - self._ram_used[node]

    def band_free(self, u: int, v: int) -> Fraction:
        return self._snapshot.edge_band(u, v) - self.band_used(u, v)

    def cpu_free_all(self) -> tuple[Fraction, ...]:
        return tuple(self.cpu_free(n) for n in range(self._snapshot.node_count))

    def ram_free_all(self) -> tuple[Fraction, ...]:
        return tuple(self.ram_free(n) for n in range(self._snapshot.node_count))

    def band_free_map(self) -> dict[tuple[int, int], Fraction]:
        """Free bandwidth for every edge of the current snapshot."""
        return {(u, v): self.band_free(u, v) for u, v in self._snapshot.edges()}

    # -- mutation

    def allocate(self, plan: EmbeddingPlan) -> None:
        if plan.sfc_id in self.allocations:
            raise DuplicateSfc(f"sfc {plan.sfc_id} already embedded")
        for node, amount in plan.cpu_alloc.items():
            if amount > self.cpu_free(node):
                raise InsufficientResources(f"cpu deficit on node {node}")
        for node, amount in plan.ram_alloc.items():
            if amount > self.ram_free(node):
                raise InsufficientResources(f"ram deficit on node {node}")
        for (u, v), amount in plan.band_alloc.items():
            if not self._snapshot.has_edge(u, v):
                raise InsufficientResources(f"edge ({u},{v}) absent from snapshot")
            if amount > self.band_free(u, v):
                raise InsufficientResources(f"bandwidth deficit on edge ({u},{v})")
        for node, amount in plan.cpu_alloc.items():
            self._cpu_used[node] += amount
        for node, amount in plan.ram_alloc.items():
            self._ram_used[node] += amount
        for key, amount in plan.band_alloc.items():
            self._band_used[key] = self._band_used.get(key, Fraction(0)) + amount
        self.allocations[plan.sfc_id] = plan

    def release(self, sfc_id: int) -> EmbeddingPlan:
        if sfc_id not in self.allocations:
            raise UnknownSfc(sfc_id)
        plan = self.allocations.pop(sfc_id)
        for node, amount in plan.cpu_alloc.items():
            self._cpu_used[node] -= amount
        for node, amount in plan.ram_alloc.items():
            self._ram_used[node] -= amount
        for key, amount in plan.band_alloc.items():
            remaining = self._band_used[key] - amount
            if remaining:
                self._band_used[key] = remaining
            else:
                del self._band_used[key]
        return plan


def check_plan(plan: EmbeddingPlan, ledger: ResourceLedger, snap: SubstrateSnapshot,
               request: SfcRequest, catalog: VnfCatalog) -> FailureReason | None:
    """Orchestrator-side validation of a plan against the live ledger.

    Pure: never mutates the ledger.  Returns None for a deployable plan,
    otherwise the first failing check's reason.
    """
    return check_plan_against(plan, request, snap,
                              cpu_free=[ledger.cpu_free(n) for n in range(snap.node_count)],
                              ram_free=[ledger.ram_free(n) for n in range(snap.node_count)],
                              band_free={key: ledger.band_free(*key)
                                         for key in map(tuple, snap.edges())})


def find_affected_sfcs(ledger: ResourceLedger,
                       new_snap: SubstrateSnapshot) -> list[tuple[int, FailureReason]]:
    """Active SFCs whose embedding is invalid under a new snapshot.

    An SFC is affected when a path edge vanished, or when it holds resources
    on a node/edge whose shrunk capacity is now over-subscribed by the
    cumulative active allocations.  Ordered by ascending sfc_id so migrations
    run in a deterministic sequence.
    """
    n = new_snap.node_count
    over_cpu = {node for node in range(n)
                if ledger.cpu_used(node) > new_snap.node_cpu_capacity[node]}
    over_ram = {node for node in range(n)
                if ledger.ram_used(node) > new_snap.node_ram_capacity[node]}
    over_band = {key for key in ledger._band_used
                 if new_snap.has_edge(*key)
                 and ledger._band_used[key] > new_snap.link_band_capacity[key[0]][key[1]]}

    affected: list[tuple[int, FailureReason]] = []
    for sfc_id in sorted(ledger.allocations):
        plan = ledger.allocations[sfc_id]
        if any(not path_is_valid(new_snap, p) for p in plan.virtual_link_paths):
            affected.append((sfc_id, FailureReason.NO_PATH))
        elif any(node in over_cpu for node in plan.cpu_alloc):
            affected.append((sfc_id, FailureReason.NODE_CPU_INSUFFICIENT))
        elif any(node in over_ram for node in plan.ram_alloc):
            affected.append((sfc_id, FailureReason.NODE_RAM_INSUFFICIENT))
        elif any(key in over_band for key in plan.band_alloc):
            affected.append((sfc_id, FailureReason.LINK_BANDWIDTH_INSUFFICIENT))
    return affected
