"""Structured audit log: per-event records, utilization samples, CSV emission.

One TraceLog collects everything a single run produces.  Records carry the
lifecycle outcomes (accepted / rejected / released / migrated / terminated)
and utilization is sampled once per node at every event boundary, so all
run metrics can be recomputed from the log alone.
"""

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .mano import FailureReason, ResourceLedger

# Record kinds: the three engine events plus per-SFC sub-records emitted while
# a topology change is being resolved, and solver-contract discrepancy notes.
KIND_ARRIVAL = "arrival"
KIND_DEPARTURE = "departure"
KIND_TOPO_CHANGE = "topo_change"
KIND_MIGRATION = "migration"
KIND_DISCREPANCY = "discrepancy"

EVENT_KINDS = (KIND_ARRIVAL, KIND_DEPARTURE, KIND_TOPO_CHANGE)

OUTCOME_ACCEPTED = "accepted"
OUTCOME_REJECTED = "rejected"
OUTCOME_RELEASED = "released"
OUTCOME_MIGRATED = "migrated"
OUTCOME_TERMINATED = "terminated"


@dataclass(frozen=True)
class TraceRecord:
    time: float
    seq: int
    kind: str
    sfc_id: int | None = None
    outcome: str | None = None
    reason: FailureReason | None = None
    plan_nodes: tuple[int, ...] | None = None  # VNF placement summary


@dataclass(frozen=True)
class UtilizationSample:
    time: float
    node: int
    cpu_used: Fraction
    cpu_capacity: Fraction
    ram_used: Fraction
    ram_capacity: Fraction

    @property
    def cpu_used_fraction(self) -> Fraction:
        return self.cpu_used / self.cpu_capacity if self.cpu_capacity else Fraction(0)

    @property
    def ram_used_fraction(self) -> Fraction:
        return self.ram_used / self.ram_capacity if self.ram_capacity else Fraction(0)


def _fmt(x) -> str:
    """Fixed-format decimal for CSV cells (6 places)."""
    return f"{float(x):.6f}"


class TraceLog:
    """Append-only sink the engine writes to while a run executes."""

    def __init__(self):
        self.records: list[TraceRecord] = []
        self.utilization: list[UtilizationSample] = []

    def record(self, time: float, kind: str, sfc_id: int | None = None,
               outcome: str | None = None, reason: FailureReason | None = None,
               plan_nodes: tuple[int, ...] | None = None) -> None:
        self.records.append(TraceRecord(time=time, seq=len(self.records), kind=kind,
                                        sfc_id=sfc_id, outcome=outcome, reason=reason,
                                        plan_nodes=plan_nodes))

    def sample_utilization(self, time: float, ledger: ResourceLedger) -> None:
        snap = ledger.snapshot
        for node in range(snap.node_count):
            self.utilization.append(UtilizationSample(
                time=time, node=node,
                cpu_used=ledger.cpu_used(node),
                cpu_capacity=snap.node_cpu_capacity[node],
                ram_used=ledger.ram_used(node),
                ram_capacity=snap.node_ram_capacity[node]))

    # -- derived metrics

    def arrival_count(self) -> int:
        return sum(1 for r in self.records if r.kind == KIND_ARRIVAL)

    def accepted_count(self) -> int:
        return sum(1 for r in self.records if r.outcome == OUTCOME_ACCEPTED)

    def rejected_count(self) -> int:
        return sum(1 for r in self.records if r.outcome == OUTCOME_REJECTED)

    def terminated_count(self) -> int:
        return sum(1 for r in self.records if r.outcome == OUTCOME_TERMINATED)

    def acceptance_ratio(self) -> float:
        """Accepted arrivals over total arrivals; defined as 1.0 when idle."""
        arrivals = self.arrival_count()
        if arrivals == 0:
            return 1.0
        return self.accepted_count() / arrivals

    def failure_breakdown(self) -> dict[FailureReason, int]:
        """Counts per failure reason over rejected and early-terminated SFCs."""
        counts: dict[FailureReason, int] = {}
        for r in self.records:
            if r.outcome in (OUTCOME_REJECTED, OUTCOME_TERMINATED):
                counts[r.reason] = counts.get(r.reason, 0) + 1
        return counts

    def running_count_series(self) -> list[tuple[float, int]]:
        """(time, active SFC count) sampled immediately after every event.

        Reconstructed purely from the records: sub-records (migration,
        discrepancy) fold into the engine event that produced them.
        """
        series: list[tuple[float, int]] = []
        active = 0
        open_time: float | None = None
        for rec in self.records:
            if rec.kind in EVENT_KINDS:
                if open_time is not None:
                    series.append((open_time, active))
                open_time = rec.time
            if rec.outcome == OUTCOME_ACCEPTED:
                active += 1
            elif rec.outcome in (OUTCOME_RELEASED, OUTCOME_TERMINATED):
                active -= 1
        if open_time is not None:
            series.append((open_time, active))
        return series

    # -- CSV emission

    def emit_csv(self, out_dir) -> list[Path]:
        """Write events/utilization/running_count/summary CSVs; overwrites."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        path = out / "events.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["time", "seq", "kind", "sfc_id", "outcome", "reason"])
            for r in self.records:
                w.writerow([_fmt(r.time), r.seq, r.kind,
                            "" if r.sfc_id is None else r.sfc_id,
                            r.outcome or "", r.reason.value if r.reason else ""])
        written.append(path)

        path = out / "utilization.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["time", "node", "cpu_used", "cpu_capacity",
                        "ram_used_mb", "ram_capacity_mb"])
            for s in self.utilization:
                w.writerow([_fmt(s.time), s.node, _fmt(s.cpu_used), _fmt(s.cpu_capacity),
                            _fmt(s.ram_used), _fmt(s.ram_capacity)])
        written.append(path)

        path = out / "running_count.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["time", "count"])
            for t, count in self.running_count_series():
                w.writerow([_fmt(t), count])
        written.append(path)

        path = out / "summary.csv"
        breakdown = self.failure_breakdown()
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["arrivals", "accepted", "rejected", "terminated_early",
                        "acceptance_ratio"])
            w.writerow([self.arrival_count(), self.accepted_count(),
                        self.rejected_count(), self.terminated_count(),
                        _fmt(self.acceptance_ratio())])
            w.writerow(["reason", "count", "", "", ""])
            for reason in FailureReason:
                w.writerow([reason.value, breakdown.get(reason, 0), "", "", ""])
        written.append(path)
        return written
