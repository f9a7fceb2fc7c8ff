import json
from fractions import Fraction

import pytest

from conftest import SCENARIO_DIR, F, make_catalog, make_snapshot, make_topo
from sfcsim.scenario import (InvalidParams, ParseError, SaginParams, ValidationError,
                             generate_poisson_workload, generate_sagin, load_scenario)
from sfcsim.topology import topology_to_json
from sfcsim.workload import validate_workload

LIGHT_KM_PER_MS = 299.792458


def desk_params(**overrides):
    base = dict(orbit_count=2, sats_per_orbit=4, altitude_km=590.0,
                uav_count=2, ground_count=2,
                sat_cpu=F(3), uav_cpu=F(0.3), ground_cpu=F(20),
                node_ram_mb=F(512000), isl_band_mbps=F(500), sg_band_mbps=F(200),
                duration_s=7200.0, snapshot_interval_s=600.0,
                elevation_min_deg=10.0, seed=7)
    base.update(overrides)
    return SaginParams(**base)


class TestSaginGenerator:
    def test_full_scale_counts(self):
        params = desk_params(orbit_count=4, sats_per_orbit=10, uav_count=5,
                             ground_count=3, duration_s=36000.0)
        topo = generate_sagin(params)
        assert topo.node_count == 48
        assert len(topo.time_points) == 61
        assert topo.time_points[0] == 0.0 and topo.time_points[-1] == 36000.0

    def test_three_sat_ring(self):
        params = desk_params(orbit_count=1, sats_per_orbit=3, uav_count=0,
                             ground_count=0)
        topo = generate_sagin(params)
        for t in topo.time_points:
            snap = topo.snapshots[t]
            assert sorted(snap.edges()) == [(0, 1), (0, 2), (1, 2)]

    def test_deterministic_given_seed(self):
        a = topology_to_json(generate_sagin(desk_params()))
        b = topology_to_json(generate_sagin(desk_params()))
        assert json.dumps(a) == json.dumps(b)

    def test_different_seed_moves_region(self):
        a = topology_to_json(generate_sagin(desk_params()))
        b = topology_to_json(generate_sagin(desk_params(seed=8)))
        assert json.dumps(a) != json.dumps(b)

    def test_capacities_constant_edges_vary(self):
        topo = generate_sagin(desk_params())
        snaps = [topo.snapshots[t] for t in topo.time_points]
        assert len({s.node_cpu_capacity for s in snaps}) == 1
        assert len({s.node_ram_capacity for s in snaps}) == 1
        assert len({s.adjacency for s in snaps}) > 1  # connectivity churn

    def test_edge_latency_sanity_bound(self):
        params = desk_params()
        topo = generate_sagin(params)
        bound = 2 * (params.earth_radius_km + params.altitude_km) / LIGHT_KM_PER_MS
        for t in topo.time_points:
            snap = topo.snapshots[t]
            for u, v in snap.edges():
                assert 0 < snap.latency[u][v] < bound

    def test_intra_orbit_spacing_is_rigid(self):
        topo = generate_sagin(desk_params())
        baseline = None
        for t in topo.time_points:
            lat = topo.snapshots[t].latency[0][1]  # ring neighbors in orbit 0
            if baseline is None:
                baseline = lat
            assert abs(lat - baseline) <= 1e-6 * baseline

    def test_fuzzed_params_satisfy_topology_invariants(self):
        # SubstrateSnapshot/SubstrateTopology constructors enforce symmetry,
        # non-negative capacities, and the stable node count; building is the test.
        import random
        rng = random.Random(5)
        for _ in range(6):
            params = desk_params(
                orbit_count=rng.randrange(1, 4),
                sats_per_orbit=rng.randrange(1, 5),
                uav_count=rng.randrange(0, 3),
                ground_count=rng.randrange(0, 3),
                altitude_km=rng.choice([400.0, 590.0, 1200.0]),
                duration_s=1800.0, snapshot_interval_s=600.0,
                seed=rng.randrange(100))
            topo = generate_sagin(params)
            assert topo.node_count == params.node_count

    @pytest.mark.parametrize("bad", [
        dict(orbit_count=0),
        dict(sats_per_orbit=0),
        dict(altitude_km=0.0),
        dict(duration_s=1000.0, snapshot_interval_s=600.0),
        dict(elevation_min_deg=90.0),
        dict(sat_cpu=F(0)),
        dict(uav_count=-1),
    ])
    def test_invalid_params(self, bad):
        with pytest.raises(InvalidParams):
            desk_params(**bad)


class TestPoissonWorkload:
    def horizon_topo(self):
        snap = make_snapshot(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        return make_topo({0.0: snap, 36000.0: snap})

    def catalog(self):
        return make_catalog([(0, 0.2, 64), (1, 0.2, 64), (2, 0.2, 64)],
                            [(0, 1, 20), (1, 2, 20)])

    def test_zero_count_rejected(self):
        with pytest.raises(InvalidParams):
            generate_poisson_workload(self.horizon_topo(), self.catalog(),
                                      sfc_count=0, mean_lifetime_s=600,
                                      chain_len=3, qos_ms=50)

    def test_same_seed_identical(self):
        args = dict(sfc_count=40, mean_lifetime_s=600, chain_len=3, qos_ms=50, seed=3)
        a = generate_poisson_workload(self.horizon_topo(), self.catalog(), **args)
        b = generate_poisson_workload(self.horizon_topo(), self.catalog(), **args)
        assert a == b

    def test_empirical_mean_lifetime(self):
        reqs = generate_poisson_workload(self.horizon_topo(), self.catalog(),
                                         sfc_count=200, mean_lifetime_s=600,
                                         chain_len=3, qos_ms=50, seed=11)
        assert len(reqs) == 200
        mean = sum(r.end_time - r.start_time for r in reqs) / len(reqs)
        assert abs(mean - 600) <= 0.15 * 600

    def test_generated_workload_validates(self):
        topo, cat = self.horizon_topo(), self.catalog()
        reqs = generate_poisson_workload(topo, cat, sfc_count=60, mean_lifetime_s=900,
                                         chain_len=2, qos_ms=50, seed=4)
        assert validate_workload(reqs, cat, topo).ok

    def test_chain_pairs_always_have_demands(self):
        cat = self.catalog()  # pairs (0,1) and (1,2) only; (0,2) undefined
        reqs = generate_poisson_workload(self.horizon_topo(), cat, sfc_count=80,
                                         mean_lifetime_s=600, chain_len=4,
                                         qos_ms=50, seed=9)
        for r in reqs:
            for a, b in zip(r.vnf_chain, r.vnf_chain[1:]):
                assert cat.band_demand(a, b) is not None

    def test_single_instant_topology_rejected(self):
        snap = make_snapshot(2, [(0, 1)])
        topo = make_topo({0.0: snap})
        with pytest.raises(InvalidParams, match="horizon"):
            generate_poisson_workload(topo, self.catalog(), sfc_count=5,
                                      mean_lifetime_s=600, chain_len=1, qos_ms=50)


class TestLoadScenario:
    def test_bundled_example_a(self):
        sc = load_scenario(SCENARIO_DIR / "example_a.json")
        assert sc.topo.node_count == 3
        snap = sc.topo.snapshots[0.0]
        assert snap.node_cpu_capacity == (F(2), F(4), F(2))
        assert snap.node_ram_capacity == (F(256), F(512), F(256))
        assert [r.sfc_id for r in sc.requests] == [0, 1]
        assert (sc.requests[0].start_time, sc.requests[0].end_time) == (5.0, 25.0)
        assert (sc.requests[1].start_time, sc.requests[1].end_time) == (10.0, 50.0)
        assert sc.solver_name == "greedy"
        assert sc.catalog.templates[0].cpu_demand == F("0.2")

    def test_inverted_lifecycle_names_sfc(self, tmp_path):
        doc = json.loads((SCENARIO_DIR / "example_a.json").read_text())
        doc["workload"]["sfcs"][1]["end"] = 1
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="sfc 1.*BadLifecycle"):
            load_scenario(path)

    def test_unknown_solver(self, tmp_path):
        doc = json.loads((SCENARIO_DIR / "example_a.json").read_text())
        doc["solver"] = "pso"
        path = tmp_path / "pso.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="UnknownSolver"):
            load_scenario(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="missing.json"):
            load_scenario(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ParseError, match="invalid JSON"):
            load_scenario(path)

    def test_generator_scenario_materializes(self):
        sc = load_scenario(SCENARIO_DIR / "sagin_desk.json")
        assert sc.topo.node_count == 12
        assert len(sc.topo.time_points) == 13
        assert len(sc.requests) == 50
        assert sc.workload_generator is not None

    def test_regenerate_workload_respects_overrides(self):
        sc = load_scenario(SCENARIO_DIR / "sagin_desk.json")
        bigger = sc.regenerate_workload(sfc_count=120, seed=5)
        assert len(bigger) == 120
        again = sc.regenerate_workload(sfc_count=120, seed=5)
        assert bigger == again

    def test_inline_workload_cannot_regenerate(self):
        sc = load_scenario(SCENARIO_DIR / "example_a.json")
        with pytest.raises(ValidationError, match="inline"):
            sc.regenerate_workload(sfc_count=10)
