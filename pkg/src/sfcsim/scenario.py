"""Scenario loading and generators: dynamic satellite/air/ground substrates
and Poisson SFC workloads.

The substrate generator models a small space-air-ground network over a
spherical Earth: satellites on circular orbits (Kepler angular rate from the
altitude), UAVs flying seeded waypoint loops at low altitude inside a compact
operations region, and fixed ground stations in the same region.  Geometry is
deliberately simple; the point is plausible, reproducible connectivity churn
across snapshots, not orbital fidelity.  Every geometric constant is a
parameter with a default.
"""

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .solver import SOLVERS
from .topology import (SubstrateSnapshot, SubstrateTopology, as_fraction,
                       topology_from_json)
from .workload import (SfcRequest, VnfCatalog, catalog_from_json,
                       requests_from_json, validate_workload)

EARTH_MU_KM3_S2 = 398600.4418     # gravitational parameter
LIGHT_KM_PER_MS = 299.792458


class ParseError(ValueError):
    """Scenario file is not valid JSON or misses required structure."""


class ValidationError(ValueError):
    """Scenario content is inconsistent; the message names the location."""


class InvalidParams(ValueError):
    """Generator parameters violate their invariants."""


@dataclass(frozen=True)
class SaginParams:
    """Knobs of the space-air-ground substrate generator."""

    orbit_count: int
    sats_per_orbit: int
    altitude_km: float
    uav_count: int
    ground_count: int
    sat_cpu: Fraction
    uav_cpu: Fraction
    ground_cpu: Fraction
    node_ram_mb: Fraction
    isl_band_mbps: Fraction
    sg_band_mbps: Fraction
    duration_s: float
    snapshot_interval_s: float
    elevation_min_deg: float = 10.0
    seed: int = 0
    # Geometry constants, overridable per scenario.
    inclination_deg: float = 53.0
    earth_radius_km: float = 6371.0
    uav_altitude_km: float = 2.0
    air_range_km: float = 100.0
    region_radius_km: float = 50.0
    uav_loop_period_s: float = 3600.0
    uav_waypoints: int = 4

    def __post_init__(self):
        if self.orbit_count < 1 or self.sats_per_orbit < 1:
            raise InvalidParams("need at least one orbit with one satellite")
        if self.uav_count < 0 or self.ground_count < 0:
            raise InvalidParams("uav_count and ground_count cannot be negative")
        if self.altitude_km <= 0:
            raise InvalidParams("altitude_km must be > 0")
        if self.duration_s <= 0 or self.snapshot_interval_s <= 0:
            raise InvalidParams("duration and snapshot interval must be > 0")
        steps = self.duration_s / self.snapshot_interval_s
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise InvalidParams("snapshot_interval_s must divide duration_s")
        if not 0 <= self.elevation_min_deg < 90:
            raise InvalidParams("elevation_min_deg must be in [0, 90)")
        for name in ("sat_cpu", "uav_cpu", "ground_cpu", "node_ram_mb",
                     "isl_band_mbps", "sg_band_mbps"):
            if getattr(self, name) <= 0:
                raise InvalidParams(f"{name} must be > 0")

    @property
    def snapshot_count(self) -> int:
        return round(self.duration_s / self.snapshot_interval_s) + 1

    @property
    def node_count(self) -> int:
        return self.orbit_count * self.sats_per_orbit + self.uav_count + self.ground_count


def _latlon_to_cart(lat_deg: float, lon_deg: float, radius: float):
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    return (radius * math.cos(lat) * math.cos(lon),
            radius * math.cos(lat) * math.sin(lon),
            radius * math.sin(lat))


def _dist(p, q) -> float:
    return math.dist(p, q)


def _sat_position(p: SaginParams, orbit: int, slot: int, t: float):
    a = p.earth_radius_km + p.altitude_km
    omega = math.sqrt(EARTH_MU_KM3_S2 / a ** 3)  # rad/s, circular orbit
    m = p.sats_per_orbit
    theta = 2 * math.pi * slot / m \
        + 2 * math.pi * orbit / (p.orbit_count * m) \
        + omega * t
    raan = 2 * math.pi * orbit / p.orbit_count
    incl = math.radians(p.inclination_deg)
    x, y = a * math.cos(theta), a * math.sin(theta)
    # rotate orbital plane: inclination about x, then RAAN about z
    y, z = y * math.cos(incl), y * math.sin(incl)
    return (x * math.cos(raan) - y * math.sin(raan),
            x * math.sin(raan) + y * math.cos(raan),
            z)


def _elevation_deg(ground, sat) -> float:
    """Angle of the satellite above the local horizon of a surface point."""
    gr = math.sqrt(sum(c * c for c in ground))
    d = tuple(s - g for s, g in zip(sat, ground))
    dn = math.sqrt(sum(c * c for c in d))
    sin_el = sum(di * gi for di, gi in zip(d, ground)) / (dn * gr)
    return math.degrees(math.asin(max(-1.0, min(1.0, sin_el))))


def _line_of_sight(p, q, earth_radius: float) -> bool:
    """True when the segment p-q clears the Earth sphere."""
    d = tuple(b - a for a, b in zip(p, q))
    dd = sum(c * c for c in d)
    if dd == 0:
        return True
    t = -sum(a * b for a, b in zip(p, d)) / dd
    if not 0 < t < 1:
        return True  # closest approach outside the segment; endpoints are above ground
    closest = tuple(a + t * b for a, b in zip(p, d))
    return math.sqrt(sum(c * c for c in closest)) >= earth_radius


def generate_sagin(params: SaginParams) -> SubstrateTopology:
    """Materialize the dynamic substrate described by ``params``.

    Node order: satellites orbit-major, then UAVs, then ground stations.
    Intra-orbit neighbor satellites are always linked; each satellite also
    links to its nearest satellite in another plane when line-of-sight holds.
    Surface/air nodes link to satellites above the minimum elevation and to
    each other within ``air_range_km``.  Capacities are constant across
    snapshots; only edges and latencies vary.
    """
    p = params
    rng = random.Random(p.seed)
    sat_n = p.orbit_count * p.sats_per_orbit
    n = p.node_count

    # Seeded, time-independent draws: operations region, ground sites, UAV loops.
    # Without Earth rotation the orbit ground tracks are fixed great circles,
    # so the region is anchored near a random point of a random orbit's track;
    # satellite passes then sweep over it and visibility comes and goes.
    track_orbit = rng.randrange(p.orbit_count)
    track_phase = rng.uniform(0.0, 2 * math.pi)
    raan = 2 * math.pi * track_orbit / p.orbit_count
    incl = math.radians(p.inclination_deg)
    ux, uy = math.cos(track_phase), math.sin(track_phase)
    uy, uz = uy * math.cos(incl), uy * math.sin(incl)
    ux, uy = ux * math.cos(raan) - uy * math.sin(raan), ux * math.sin(raan) + uy * math.cos(raan)
    center_lat = math.degrees(math.asin(max(-1.0, min(1.0, uz))))
    center_lon = math.degrees(math.atan2(uy, ux))

    def region_point():
        r = p.region_radius_km * math.sqrt(rng.random())
        ang = rng.uniform(0, 2 * math.pi)
        dlat = (r * math.cos(ang)) / 111.0
        dlon = (r * math.sin(ang)) / (111.0 * max(0.1, math.cos(math.radians(center_lat))))
        return center_lat + dlat, center_lon + dlon

    ground_sites = [region_point() for _ in range(p.ground_count)]
    uav_loops = [[region_point() for _ in range(p.uav_waypoints)]
                 for _ in range(p.uav_count)]

    def uav_position(uav: int, t: float):
        loop = uav_loops[uav]
        k = len(loop)
        u = (t % p.uav_loop_period_s) / p.uav_loop_period_s * k
        i = int(u) % k
        f = u - int(u)
        (la1, lo1), (la2, lo2) = loop[i], loop[(i + 1) % k]
        lat = la1 + (la2 - la1) * f
        lon = lo1 + (lo2 - lo1) * f
        return _latlon_to_cart(lat, lon, p.earth_radius_km + p.uav_altitude_km)

    cpu = tuple([p.sat_cpu] * sat_n + [p.uav_cpu] * p.uav_count
                + [p.ground_cpu] * p.ground_count)
    ram = tuple([p.node_ram_mb] * n)

    def snapshot_at(t: float) -> SubstrateSnapshot:
        pos = [_sat_position(p, i // p.sats_per_orbit, i % p.sats_per_orbit, t)
               for i in range(sat_n)]
        pos += [uav_position(u, t) for u in range(p.uav_count)]
        pos += [_latlon_to_cart(la, lo, p.earth_radius_km) for la, lo in ground_sites]

        adjacency = [[False] * n for _ in range(n)]
        latency = [[0.0] * n for _ in range(n)]
        band = [[Fraction(0)] * n for _ in range(n)]

        def add_edge(u: int, v: int, band_mbps: Fraction):
            d = _dist(pos[u], pos[v])
            if u == v or d <= 0:
                return
            adjacency[u][v] = adjacency[v][u] = True
            latency[u][v] = latency[v][u] = d / LIGHT_KM_PER_MS
            band[u][v] = band[v][u] = band_mbps

        # Intra-orbit rings.
        m = p.sats_per_orbit
        for orbit in range(p.orbit_count):
            base = orbit * m
            if m >= 2:
                for j in range(m if m > 2 else 1):
                    add_edge(base + j, base + (j + 1) % m, p.isl_band_mbps)

        # Nearest cross-plane neighbor, line-of-sight permitting.
        if p.orbit_count >= 2:
            for u in range(sat_n):
                nearest, best = -1, math.inf
                for v in range(sat_n):
                    if v // m == u // m:
                        continue
                    d = _dist(pos[u], pos[v])
                    if d < best:
                        nearest, best = v, d
                if nearest >= 0 and _line_of_sight(pos[u], pos[nearest], p.earth_radius_km):
                    add_edge(u, nearest, p.isl_band_mbps)

        # Surface/air to satellite, by elevation mask.
        for g in range(sat_n, n):
            for s in range(sat_n):
                if _elevation_deg(pos[g], pos[s]) >= p.elevation_min_deg:
                    add_edge(g, s, p.sg_band_mbps)

        # UAV-UAV and UAV-ground, by range.  Ground stations do not
        # interconnect directly (the terrestrial backhaul is assumed gone).
        for u in range(sat_n, sat_n + p.uav_count):
            for v in range(u + 1, n):
                if _dist(pos[u], pos[v]) <= p.air_range_km:
                    add_edge(u, v, p.sg_band_mbps)

        return SubstrateSnapshot(
            node_count=n,
            adjacency=tuple(tuple(row) for row in adjacency),
            latency=tuple(tuple(row) for row in latency),
            node_cpu_capacity=cpu,
            node_ram_capacity=ram,
            link_band_capacity=tuple(tuple(row) for row in band))

    times = tuple(float(k * p.snapshot_interval_s) for k in range(p.snapshot_count))
    return SubstrateTopology(time_points=times,
                             snapshots={t: snapshot_at(t) for t in times})


def generate_poisson_workload(topo: SubstrateTopology, catalog: VnfCatalog,
                              sfc_count: int, mean_lifetime_s: float,
                              chain_len: int, qos_ms: float,
                              seed: int = 0) -> list[SfcRequest]:
    """Draw ``sfc_count`` requests with exponential inter-arrivals and lifetimes.

    Arrivals form a Poisson process over the topology horizon (rate chosen so
    the expected count fills it); lifetimes are exponential with the given
    mean, clamped to the horizon length.  Endpoints are uniform nodes and
    chains are uniform walks over template pairs that declare a bandwidth
    demand.
    """
    if sfc_count <= 0:
        raise InvalidParams("sfc_count must be > 0")
    if mean_lifetime_s <= 0 or chain_len <= 0 or qos_ms <= 0:
        raise InvalidParams("mean_lifetime_s, chain_len, and qos_ms must be > 0")
    if not catalog.templates:
        raise InvalidParams("catalog has no templates")
    horizon = topo.time_points[-1] - topo.start_time
    if horizon <= 0:
        raise InvalidParams("topology horizon is a single instant; cannot spread arrivals")

    partners: dict[int, list[int]] = {v: [] for v in catalog.templates}
    for a, b in catalog.link_band_demand:
        partners[a].append(b)
        if a != b:
            partners[b].append(a)
    for v in partners:
        partners[v].sort()
    if chain_len == 1:
        first_choices = sorted(catalog.templates)
    else:
        first_choices = sorted(v for v in catalog.templates if partners[v])
        if not first_choices:
            raise InvalidParams("no template pair declares a bandwidth demand")

    rng = random.Random(seed)
    rate = sfc_count / horizon
    n = topo.node_count
    t = topo.start_time
    requests = []
    for sfc_id in range(sfc_count):
        t += rng.expovariate(rate)
        life = min(max(rng.expovariate(1.0 / mean_lifetime_s), 1e-9), horizon)
        ingress = rng.randrange(n)
        egress = rng.randrange(n)
        chain = [rng.choice(first_choices)]
        for _ in range(chain_len - 1):
            chain.append(rng.choice(partners[chain[-1]]))
        requests.append(SfcRequest(sfc_id=sfc_id, start_time=t, end_time=t + life,
                                   ingress=ingress, egress=egress,
                                   vnf_chain=tuple(chain), qos_max_latency=qos_ms))
    return requests


# --- scenario bundles ---------------------------------------------------------

@dataclass
class Scenario:
    """A fully materialized, validated simulation input bundle."""

    topo: SubstrateTopology
    requests: list[SfcRequest]
    catalog: VnfCatalog
    solver_name: str
    seed: int
    substrate_generator: dict | None = None
    workload_generator: dict | None = None

    def regenerate_workload(self, sfc_count: int | None = None,
                            seed: int | None = None) -> list[SfcRequest]:
        """Re-draw the workload (sweeps/repeats); needs a generator config."""
        if self.workload_generator is None:
            raise ValidationError("workload is inline; cannot vary sfc_count or seed")
        cfg = dict(self.workload_generator)
        if sfc_count is not None:
            cfg["sfc_count"] = sfc_count
        if seed is not None and "seed" not in self.workload_generator:
            cfg["seed"] = seed
        return _poisson_from_config(self.topo, self.catalog, cfg)


def _sagin_from_config(cfg: dict) -> SaginParams:
    fraction_fields = {"sat_cpu", "uav_cpu", "ground_cpu", "node_ram_mb",
                       "isl_band_mbps", "sg_band_mbps"}
    int_fields = {"orbit_count", "sats_per_orbit", "uav_count", "ground_count",
                  "seed", "uav_waypoints"}
    known = set(SaginParams.__dataclass_fields__)
    kwargs = {}
    for key, value in cfg.items():
        if key not in known:
            raise ValidationError(f"substrate.generator.sagin: unknown field {key!r}")
        if key in fraction_fields:
            kwargs[key] = as_fraction(value)
        elif key in int_fields:
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    try:
        return SaginParams(**kwargs)
    except TypeError as exc:
        raise ValidationError(f"substrate.generator.sagin: {exc}") from None


def _poisson_from_config(topo, catalog, cfg: dict) -> list[SfcRequest]:
    known = {"sfc_count", "mean_lifetime_s", "chain_len", "qos_ms", "seed"}
    unknown = set(cfg) - known
    if unknown:
        raise ValidationError(f"workload.generator.poisson: unknown fields {sorted(unknown)}")
    try:
        return generate_poisson_workload(
            topo, catalog,
            sfc_count=int(cfg["sfc_count"]),
            mean_lifetime_s=float(cfg["mean_lifetime_s"]),
            chain_len=int(cfg["chain_len"]),
            qos_ms=float(cfg["qos_ms"]),
            seed=int(cfg.get("seed", 0)))
    except KeyError as exc:
        raise ValidationError(f"workload.generator.poisson: missing field {exc}") from None


def scenario_from_json(doc: dict) -> Scenario:
    """Build and validate a scenario from its parsed JSON document."""
    for key in ("substrate", "workload", "catalog", "solver"):
        if key not in doc:
            raise ValidationError(f"scenario: missing top-level field {key!r}")
    seed = int(doc.get("seed", 0))

    try:
        catalog = catalog_from_json(doc["catalog"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"catalog: {exc}") from None

    sub = doc["substrate"]
    substrate_generator = None
    if "generator" in sub:
        gen = sub["generator"]
        if "sagin" not in gen:
            raise ValidationError("substrate.generator: only 'sagin' is supported")
        substrate_generator = gen["sagin"]
        try:
            topo = generate_sagin(_sagin_from_config(substrate_generator))
        except InvalidParams as exc:
            raise ValidationError(f"substrate.generator.sagin: {exc}") from None
    else:
        try:
            topo = topology_from_json(sub)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"substrate: {exc}") from None

    wl = doc["workload"]
    workload_generator = None
    if "generator" in wl:
        gen = wl["generator"]
        if "poisson" not in gen:
            raise ValidationError("workload.generator: only 'poisson' is supported")
        workload_generator = gen["poisson"]
        cfg = dict(workload_generator)
        cfg.setdefault("seed", seed)
        try:
            requests = _poisson_from_config(topo, catalog, cfg)
        except InvalidParams as exc:
            raise ValidationError(f"workload.generator.poisson: {exc}") from None
    else:
        try:
            requests = requests_from_json(wl["sfcs"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"workload.sfcs: {exc}") from None

    solver_name = doc["solver"]
    if solver_name not in SOLVERS:
        raise ValidationError(
            f"solver: UnknownSolver {solver_name!r}; available: {sorted(SOLVERS)}")

    report = validate_workload(requests, catalog, topo)
    if not report.ok:
        first = report.issues[0]
        raise ValidationError(
            f"workload: sfc {first.sfc_id}: {first.reason} ({first.detail})"
            + (f"; {len(report.issues) - 1} more issue(s)" if len(report.issues) > 1 else ""))

    return Scenario(topo=topo, requests=requests, catalog=catalog,
                    solver_name=solver_name, seed=seed,
                    substrate_generator=substrate_generator,
                    workload_generator=workload_generator)


def load_scenario(path) -> Scenario:
    """Load a scenario bundle from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return scenario_from_json(doc)
