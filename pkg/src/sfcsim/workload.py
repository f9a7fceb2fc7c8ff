"""SFC requests and the VNF template catalog with inter-VNF bandwidth demands."""

from dataclasses import dataclass, field
from fractions import Fraction

from .topology import SubstrateTopology, as_fraction, edge_key


@dataclass(frozen=True)
class VnfTemplate:
    vnf_id: int
    cpu_demand: Fraction
    ram_demand: Fraction

    def __post_init__(self):
        if self.cpu_demand <= 0:
            raise ValueError(f"vnf {self.vnf_id}: cpu_demand must be > 0")
        if self.ram_demand <= 0:
            raise ValueError(f"vnf {self.vnf_id}: ram_demand must be > 0")


class VnfCatalog:
    """VNF template pool plus the bandwidth each template pair exchanges."""

    def __init__(self, templates, link_band_demand=None):
        self.templates: dict[int, VnfTemplate] = {}
        for t in templates:
            if t.vnf_id in self.templates:
                raise ValueError(f"duplicate vnf_id {t.vnf_id}")
            self.templates[t.vnf_id] = t
        self.link_band_demand: dict[tuple[int, int], Fraction] = {}
        for (a, b), band in (link_band_demand or {}).items():
            self.add_link_demand(a, b, band)

    def add_link_demand(self, a: int, b: int, band) -> None:
        if a not in self.templates or b not in self.templates:
            raise ValueError(f"link demand ({a},{b}) references an unknown template")
        band = as_fraction(band)
        if band <= 0:
            raise ValueError(f"link demand ({a},{b}) must be > 0")
        key = edge_key(a, b)
        if key in self.link_band_demand and self.link_band_demand[key] != band:
            raise ValueError(f"conflicting demand for template pair {key}")
        self.link_band_demand[key] = band

    def band_demand(self, a: int, b: int) -> Fraction | None:
        """Bandwidth demand between two templates; None when undefined."""
        return self.link_band_demand.get(edge_key(a, b))

    def __contains__(self, vnf_id: int) -> bool:
        return vnf_id in self.templates


@dataclass(frozen=True)
class SfcRequest:
    """One service chain request: lifecycle, anchoring endpoints, VNF order, QoS."""

    sfc_id: int
    start_time: float
    end_time: float
    ingress: int
    egress: int
    vnf_chain: tuple[int, ...]
    qos_max_latency: float

    def __post_init__(self):
        if len(self.vnf_chain) < 1:
            raise ValueError(f"sfc {self.sfc_id}: empty vnf_chain")


@dataclass(frozen=True)
class ValidationIssue:
    sfc_id: int
    reason: str
    detail: str


@dataclass
class ValidationReport:
    checked: int = 0
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def issues_for(self, sfc_id: int) -> list[ValidationIssue]:
        return [i for i in self.issues if i.sfc_id == sfc_id]

    def summary(self) -> str:
        if self.ok:
            return f"{self.checked} requests, all valid"
        lines = [f"{self.checked} requests, {len(self.issues)} problem(s):"]
        lines += [f"  sfc {i.sfc_id}: {i.reason} ({i.detail})" for i in self.issues]
        return "\n".join(lines)


def validate_workload(requests, catalog: VnfCatalog,
                      topo: SubstrateTopology) -> ValidationReport:
    """Check every request against the catalog and substrate.

    A workload that passes here cannot make the engine trip over malformed
    input: lifecycles are ordered and inside the topology's time range,
    endpoints exist, every chain VNF has a template, and every consecutive
    chain pair has a declared bandwidth demand.
    """
    report = ValidationReport(checked=len(requests))
    seen: set[int] = set()
    n = topo.node_count
    for req in requests:
        bad = report.issues.append
        if req.sfc_id in seen:
            bad(ValidationIssue(req.sfc_id, "DuplicateSfcId", "sfc_id used twice"))
        seen.add(req.sfc_id)
        if req.start_time >= req.end_time:
            bad(ValidationIssue(req.sfc_id, "BadLifecycle",
                                f"start {req.start_time} >= end {req.end_time}"))
        elif req.start_time < topo.start_time:
            bad(ValidationIssue(req.sfc_id, "BadLifecycle",
                                f"start {req.start_time} precedes topology start {topo.start_time}"))
        for node, role in ((req.ingress, "ingress"), (req.egress, "egress")):
            if not 0 <= node < n:
                bad(ValidationIssue(req.sfc_id, "BadEndpoint",
                                    f"{role} {node} outside 0..{n - 1}"))
        if req.qos_max_latency <= 0:
            bad(ValidationIssue(req.sfc_id, "BadQos",
                                f"qos_max_latency {req.qos_max_latency} must be > 0"))
        unknown = [v for v in req.vnf_chain if v not in catalog]
        if unknown:
            bad(ValidationIssue(req.sfc_id, "UnknownVnf",
                                f"templates {unknown} not in catalog"))
            continue
        for a, b in zip(req.vnf_chain, req.vnf_chain[1:]):
            if catalog.band_demand(a, b) is None:
                bad(ValidationIssue(req.sfc_id, "MissingLinkDemand",
                                    f"no bandwidth demand for pair ({a},{b})"))
    return report


# --- JSON (de)serialization -------------------------------------------------

def catalog_from_json(doc: dict) -> VnfCatalog:
    templates = [VnfTemplate(vnf_id=int(t["id"]),
                             cpu_demand=as_fraction(t["cpu"]),
                             ram_demand=as_fraction(t["ram_mb"]))
                 for t in doc["templates"]]
    catalog = VnfCatalog(templates)
    for link in doc.get("links", []):
        catalog.add_link_demand(int(link["a"]), int(link["b"]), link["band_mbps"])
    return catalog


def catalog_to_json(catalog: VnfCatalog) -> dict:
    from .topology import _num
    return {
        "templates": [{"id": t.vnf_id, "cpu": _num(t.cpu_demand), "ram_mb": _num(t.ram_demand)}
                      for t in sorted(catalog.templates.values(), key=lambda t: t.vnf_id)],
        "links": [{"a": a, "b": b, "band_mbps": _num(band)}
                  for (a, b), band in sorted(catalog.link_band_demand.items())],
    }


def requests_from_json(docs: list[dict]) -> list[SfcRequest]:
    return [SfcRequest(sfc_id=int(d["id"]),
                       start_time=float(d["start"]),
                       end_time=float(d["end"]),
                       ingress=int(d["ingress"]),
                       egress=int(d["egress"]),
                       vnf_chain=tuple(int(v) for v in d["chain"]),
                       qos_max_latency=float(d["qos_latency_ms"]))
            for d in docs]


def requests_to_json(requests) -> list[dict]:
    from .topology import _num
    return [{"id": r.sfc_id, "start": _num(r.start_time), "end": _num(r.end_time),
             "ingress": r.ingress, "egress": r.egress, "chain": list(r.vnf_chain),
             "qos_latency_ms": _num(r.qos_max_latency)}
            for r in requests]


def workload_from_json(doc: dict) -> tuple[list[SfcRequest], VnfCatalog]:
    return requests_from_json(doc["sfcs"]), catalog_from_json(doc["catalog"])


def workload_to_json(requests, catalog: VnfCatalog) -> dict:
    return {"sfcs": requests_to_json(requests), "catalog": catalog_to_json(catalog)}
