from fractions import Fraction

import pytest

from conftest import F, make_catalog, make_request, make_snapshot, single_topo
from sfcsim.engine import run
from sfcsim.mano import FailureReason
from sfcsim.solver import GreedySolver
from sfcsim.trace import EVENT_KINDS, TraceLog


def example_a_run():
    snap = make_snapshot(3, [(0, 1), (1, 2)], cpu=[2, 4, 2], ram=[256, 512, 256])
    cat = make_catalog([(0, 0.2, 64), (1, 0.2, 64), (2, 0.2, 64)],
                       [(0, 1, 20), (1, 2, 20)])
    reqs = [make_request(sfc_id=0, start=5, end=25, ingress=0, egress=2,
                         chain=(0, 1, 2), qos=50.0),
            make_request(sfc_id=1, start=10, end=50, ingress=0, egress=2,
                         chain=(0, 1, 2), qos=50.0)]
    trace = TraceLog()
    report = run(single_topo(snap), reqs, cat, GreedySolver(), trace, seed=0)
    return report, trace, reqs, cat


def saturated_run(arrivals=4):
    """One-node substrate; each chain takes 0.8 cpu, capacity fits one at a time."""
    snap = make_snapshot(1, [], cpu=[1.0], ram=[4096])
    cat = make_catalog([(0, 0.8, 64)], [])
    reqs = [make_request(sfc_id=i, start=10 * i + 1, end=10 * i + 25, chain=(0,))
            for i in range(arrivals)]
    trace = TraceLog()
    report = run(single_topo(snap), reqs, cat, GreedySolver(), trace, seed=0)
    return report, trace


class TestAcceptanceRatio:
    def test_all_accepted(self):
        _, trace, _, _ = example_a_run()
        assert trace.acceptance_ratio() == 1.0

    def test_zero_arrivals_defined_as_one(self):
        assert TraceLog().acceptance_ratio() == 1.0

    def test_three_quarters(self):
        # overlapping lifecycles on the saturated node: every second chain fits
        snap = make_snapshot(1, [], cpu=[1.0], ram=[4096])
        cat = make_catalog([(0, 0.8, 64)], [])
        reqs = [make_request(sfc_id=0, start=1, end=100, chain=(0,)),
                make_request(sfc_id=1, start=2, end=3, chain=(0,)),  # rejected
                make_request(sfc_id=2, start=101, end=110, chain=(0,)),
                make_request(sfc_id=3, start=120, end=130, chain=(0,))]
        trace = TraceLog()
        run(single_topo(snap), reqs, cat, GreedySolver(), trace, seed=0)
        assert trace.acceptance_ratio() == 0.75


class TestFailureBreakdown:
    def test_all_accepted_empty(self):
        _, trace, _, _ = example_a_run()
        assert trace.failure_breakdown() == {}

    def test_saturation_counts_cpu_rejections(self):
        snap = make_snapshot(1, [], cpu=[1.0], ram=[4096])
        cat = make_catalog([(0, 0.8, 64)], [])
        # all four overlap; only the first fits
        reqs = [make_request(sfc_id=i, start=1 + i, end=100 + i, chain=(0,))
                for i in range(4)]
        trace = TraceLog()
        report = run(single_topo(snap), reqs, cat, GreedySolver(), trace, seed=0)
        assert report.rejected == 3
        assert trace.failure_breakdown() == {FailureReason.NODE_CPU_INSUFFICIENT: 3}

    def test_sum_matches_report(self):
        report, trace = saturated_run()
        assert sum(trace.failure_breakdown().values()) == \
            report.rejected + report.terminated_early


class TestRunningCountFromTrace:
    def test_matches_engine_series(self):
        report, trace, _, _ = example_a_run()
        assert trace.running_count_series() == report.running_count

    def test_matches_on_saturated_run(self):
        report, trace = saturated_run()
        assert trace.running_count_series() == report.running_count


class TestUtilizationReconstruction:
    def test_samples_replay_from_records(self):
        report, trace, reqs, cat = example_a_run()
        by_id = {r.sfc_id: r for r in reqs}
        n = 3
        active: dict[int, tuple[int, ...]] = {}
        boundary = -1
        expected_blocks = []
        for rec in trace.records:
            if rec.kind in EVENT_KINDS:
                if boundary >= 0:
                    expected_blocks.append(dict(active))
                boundary += 1
            if rec.outcome == "accepted" or rec.outcome == "migrated":
                active[rec.sfc_id] = rec.plan_nodes
            elif rec.outcome in ("released", "terminated"):
                active.pop(rec.sfc_id)
        expected_blocks.append(dict(active))

        assert len(trace.utilization) == len(expected_blocks) * n
        for i, placements in enumerate(expected_blocks):
            cpu = [Fraction(0)] * n
            ram = [Fraction(0)] * n
            for sfc_id, nodes in placements.items():
                for node, vnf in zip(nodes, by_id[sfc_id].vnf_chain):
                    cpu[node] += cat.templates[vnf].cpu_demand
                    ram[node] += cat.templates[vnf].ram_demand
            block = trace.utilization[i * n:(i + 1) * n]
            assert [s.cpu_used for s in block] == cpu
            assert [s.ram_used for s in block] == ram

    def test_fractions_within_bounds(self):
        _, trace, _, _ = example_a_run()
        for s in trace.utilization:
            assert 0 <= s.cpu_used_fraction <= 1
            assert 0 <= s.ram_used_fraction <= 1


class TestCsvEmission:
    def test_final_utilization_rows_are_zero(self, tmp_path):
        _, trace, _, _ = example_a_run()
        trace.emit_csv(tmp_path)
        lines = (tmp_path / "utilization.csv").read_text().splitlines()
        final_rows = lines[-3:]
        for row in final_rows:
            time, node, cpu_used, _, ram_used, _ = row.split(",")
            assert time == "50.000000"
            assert cpu_used == "0.000000" and ram_used == "0.000000"

    def test_empty_run_headers_only(self, tmp_path):
        TraceLog().emit_csv(tmp_path)
        assert (tmp_path / "events.csv").read_text() == \
            "time,seq,kind,sfc_id,outcome,reason\n"
        assert (tmp_path / "utilization.csv").read_text().splitlines()[0] == \
            "time,node,cpu_used,cpu_capacity,ram_used_mb,ram_capacity_mb"
        assert (tmp_path / "running_count.csv").read_text() == "time,count\n"
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert summary[0] == "arrivals,accepted,rejected,terminated_early,acceptance_ratio"
        assert summary[1] == "0,0,0,0,1.000000"

    def test_reemission_is_byte_identical(self, tmp_path):
        _, trace, _, _ = example_a_run()
        first = {p.name: p.read_bytes() for p in trace.emit_csv(tmp_path / "a")}
        second = {p.name: p.read_bytes() for p in trace.emit_csv(tmp_path / "b")}
        assert first == second

    def test_summary_carries_breakdown_rows(self, tmp_path):
        _, trace = saturated_run()
        trace.emit_csv(tmp_path)
        text = (tmp_path / "summary.csv").read_text()
        for reason in FailureReason:
            assert reason.value in text

    def test_event_rows_match_records(self, tmp_path):
        _, trace, _, _ = example_a_run()
        trace.emit_csv(tmp_path)
        lines = (tmp_path / "events.csv").read_text().splitlines()[1:]
        assert len(lines) == len(trace.records)
        first = lines[0].split(",")
        assert first == ["5.000000", "0", "arrival", "0", "accepted", ""]
