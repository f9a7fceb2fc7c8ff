"""Discrete-event core: event queue construction and the run loop.

Event order is total: by time, then kind priority (topology change before
departure before arrival, so departures free resources before same-instant
arrivals compete and arrivals always see the freshest topology), then a
sequence number assigned at queue-build time.  A run is single-threaded and
fully deterministic; the only randomness is the seeded RNG handed to the
solver.
"""

import random
from dataclasses import dataclass, field
from enum import IntEnum

from . import trace as tr
from .mano import (FailureReason, ResourceLedger, check_plan, find_affected_sfcs,
                   plan_structure_errors)
from .solver import Solver, SolveMode, SolverInput
from .topology import SubstrateTopology
from .trace import TraceLog
from .workload import SfcRequest, VnfCatalog, validate_workload


class MalformedScenario(ValueError):
    """Inputs violated the engine preconditions (unvalidated workload, etc.)."""


class EventKind(IntEnum):
    """Dispatch priority for simultaneous events (lower value first)."""

    TOPOLOGY_CHANGE = 0
    SFC_DEPARTURE = 1
    SFC_ARRIVAL = 2


@dataclass(frozen=True, order=True)
class SimEvent:
    time: float
    kind: EventKind
    seq: int
    sfc_id: int | None = field(default=None, compare=False)


@dataclass
class SimulationReport:
    end_time: float
    arrivals: int
    accepted: int
    rejected: int
    terminated_early: int
    running_count: list[tuple[float, int]]
    trace: TraceLog


def build_event_queue(topo: SubstrateTopology,
                      requests: list[SfcRequest]) -> list[SimEvent]:
    """All events of a run, fully ordered.

    One topology change per time point after the first (the first snapshot is
    the initial state, not a change), one arrival per request start and one
    departure per request end.  Same-instant events of equal kind keep
    ascending sfc_id order via the sequence numbers.
    """
    events: list[SimEvent] = []
    seq = 0
    for t in topo.time_points[1:]:
        events.append(SimEvent(time=t, kind=EventKind.TOPOLOGY_CHANGE, seq=seq))
        seq += 1
    for req in sorted(requests, key=lambda r: r.sfc_id):
        events.append(SimEvent(time=req.start_time, kind=EventKind.SFC_ARRIVAL,
                               seq=seq, sfc_id=req.sfc_id))
        seq += 1
        events.append(SimEvent(time=req.end_time, kind=EventKind.SFC_DEPARTURE,
                               seq=seq, sfc_id=req.sfc_id))
        seq += 1
    events.sort()
    return events


def _solver_input(ledger: ResourceLedger, request: SfcRequest, catalog: VnfCatalog,
                  mode: SolveMode, old_plan=None) -> SolverInput:
    return SolverInput(request=request, catalog=catalog, snapshot=ledger.snapshot,
                       cpu_free=ledger.cpu_free_all(), ram_free=ledger.ram_free_all(),
                       band_free=ledger.band_free_map(), mode=mode, old_plan=old_plan)


def run(topo: SubstrateTopology, requests: list[SfcRequest], catalog: VnfCatalog,
        solver: Solver, trace_sink: TraceLog | None = None, seed: int = 0,
        boundary_hook=None) -> SimulationReport:
    """Execute one simulation run and return its report.

    Arrivals go through the solver and, on accept, the orchestrator's plan
    check before resources are committed; a solver answer that fails that
    check is demoted to a rejection and the discrepancy is trace-logged.
    Departures release.  Topology changes swap the active snapshot, then
    migrate every invalidated SFC in ascending id order: the old plan is
    released first so the solver can reuse the SFC's own resources, and a
    failed re-embed terminates the SFC early.

    ``boundary_hook(time, ledger)``, when given, runs after every event; the
    test suite uses it to assert resource conservation at event boundaries.
    """
    report = validate_workload(requests, catalog, topo)
    if not report.ok:
        raise MalformedScenario(report.summary())

    trace = trace_sink if trace_sink is not None else TraceLog()
    ledger = ResourceLedger(topo.snapshot_at(topo.start_time))
    rng = random.Random(seed)
    by_id = {r.sfc_id: r for r in requests}
    queue = build_event_queue(topo, requests)

    arrivals = accepted = rejected = terminated = 0
    running: list[tuple[float, int]] = []

    def vetted_plan(decision, request):
        """Plan from an Accept decision iff it honors the solver contract."""
        if not decision.accepted:
            return None
        plan = decision.plan
        if plan.sfc_id != request.sfc_id:
            return None
        if plan_structure_errors(plan, request, catalog, ledger.snapshot):
            return None
        if check_plan(plan, ledger, ledger.snapshot, request, catalog) is not None:
            return None
        return plan

    for ev in queue:
        if ev.kind == EventKind.SFC_ARRIVAL:
            request = by_id[ev.sfc_id]
            arrivals += 1
            decision = solver.solve(
                _solver_input(ledger, request, catalog, SolveMode.EMBED), rng)
            plan = vetted_plan(decision, request)
            if plan is not None:
                ledger.allocate(plan)
                accepted += 1
                trace.record(ev.time, tr.KIND_ARRIVAL, ev.sfc_id,
                             tr.OUTCOME_ACCEPTED, plan_nodes=plan.vnf_placement)
            elif decision.accepted:
                # Solver broke its contract: Accept that fails validation.
                rejected += 1
                trace.record(ev.time, tr.KIND_ARRIVAL, ev.sfc_id,
                             tr.OUTCOME_REJECTED, FailureReason.SOLVER_REJECTED)
                trace.record(ev.time, tr.KIND_DISCREPANCY, ev.sfc_id,
                             reason=FailureReason.SOLVER_REJECTED,
                             plan_nodes=decision.plan.vnf_placement)
            else:
                rejected += 1
                trace.record(ev.time, tr.KIND_ARRIVAL, ev.sfc_id,
                             tr.OUTCOME_REJECTED, decision.reason)

        elif ev.kind == EventKind.SFC_DEPARTURE:
            if ev.sfc_id in ledger.allocations:
                ledger.release(ev.sfc_id)
                trace.record(ev.time, tr.KIND_DEPARTURE, ev.sfc_id, tr.OUTCOME_RELEASED)
            else:
                # Was rejected or already terminated; nothing to release.
                trace.record(ev.time, tr.KIND_DEPARTURE, ev.sfc_id)

        else:  # EventKind.TOPOLOGY_CHANGE
            new_snap = topo.snapshots[ev.time]
            affected = find_affected_sfcs(ledger, new_snap)
            ledger.set_snapshot(new_snap)
            trace.record(ev.time, tr.KIND_TOPO_CHANGE)
            for sfc_id, _cause in affected:
                old_plan = ledger.release(sfc_id)
                request = by_id[sfc_id]
                decision = solver.solve(
                    _solver_input(ledger, request, catalog, SolveMode.MIGRATE,
                                  old_plan), rng)
                plan = vetted_plan(decision, request)
                if plan is not None:
                    ledger.allocate(plan)
                    trace.record(ev.time, tr.KIND_MIGRATION, sfc_id,
                                 tr.OUTCOME_MIGRATED, plan_nodes=plan.vnf_placement)
                elif decision.accepted:
                    terminated += 1
                    trace.record(ev.time, tr.KIND_MIGRATION, sfc_id,
                                 tr.OUTCOME_TERMINATED, FailureReason.MIGRATION_FAILED)
                    trace.record(ev.time, tr.KIND_DISCREPANCY, sfc_id,
                                 reason=FailureReason.MIGRATION_FAILED,
                                 plan_nodes=decision.plan.vnf_placement)
                else:
                    terminated += 1
                    trace.record(ev.time, tr.KIND_MIGRATION, sfc_id,
                                 tr.OUTCOME_TERMINATED, decision.reason)

        trace.sample_utilization(ev.time, ledger)
        running.append((ev.time, len(ledger.allocations)))
        if boundary_hook is not None:
            boundary_hook(ev.time, ledger)

    end_time = max(queue[-1].time, topo.time_points[-1]) if queue else topo.time_points[-1]
    return SimulationReport(end_time=end_time, arrivals=arrivals, accepted=accepted,
                            rejected=rejected, terminated_early=terminated,
                            running_count=running, trace=trace)


def running_count_series(report: SimulationReport) -> list[tuple[float, int]]:
    """Step series of active SFCs, one point per processed event."""
    return list(report.running_count)
