"""Canonical quality-of-results schema and vendor report extraction.

Vendor report formats drift across tool versions, so extraction profiles
are data (a flat map of named regex patterns), not code. The canonical
on-disk form is JSON with a fixed key order and a schema_version field,
chosen so run archives diff cleanly.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, VersionError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SOURCE_PHASES = ("hls_synth", "rtl_synth", "simulated")
RESOURCE_NAMES = ("ff", "lut", "dsp", "bram")

# patterns that must both exist in the profile and match the report text
MANDATORY_FIELDS = ("wns", "tns", "latency", "ff", "lut", "dsp", "bram")


@dataclass(frozen=True)
class TimingSummary:
    wns_ns: float
    tns_ns: float
    clock_ns: float
    met: bool

    @classmethod
    def from_wns(cls, wns_ns: float, tns_ns: float, clock_ns: float) -> "TimingSummary":
        return cls(wns_ns=wns_ns, tns_ns=tns_ns, clock_ns=clock_ns, met=wns_ns >= 0)


@dataclass(frozen=True)
class ResourceUsage:
    ff: int
    lut: int
    dsp: int
    bram: int
    overflow: frozenset[str] = frozenset()

    def get(self, name: str) -> int:
        return {"ff": self.ff, "lut": self.lut, "dsp": self.dsp, "bram": self.bram}[name]


@dataclass(frozen=True)
class LoopMetric:
    loop_label: str
    ii: int | None
    depth: int
    pipelined: bool


@dataclass(frozen=True)
class QoRReport:
    latency_cycles: int
    timing: TimingSummary
    resources: ResourceUsage
    loops: tuple[LoopMetric, ...]
    source_phase: str

    def validate(self) -> None:
        if self.latency_cycles < 0:
            raise VersionError("latency_cycles must be >= 0")
        labels = [m.loop_label for m in self.loops]
        if len(labels) != len(set(labels)):
            raise VersionError(f"duplicate loop labels: {labels}")
        if self.source_phase not in SOURCE_PHASES:
            raise VersionError(f"bad source_phase {self.source_phase!r}")


# ---------------------------------------------------------------------------
# Vendor report extraction


def load_profile(path: str | Path) -> dict[str, str]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def default_profile() -> dict[str, str]:
    from . import data_path

    return load_profile(data_path("profiles", "vivado.json"))


def _extract(profile: dict[str, str], text: str, name: str, cast, mandatory: bool = True):
    pattern = profile.get(name)
    if pattern is None:
        if mandatory:
            raise ParseError(f"profile has no pattern for mandatory field {name!r}")
        return None
    m = re.search(pattern, text, re.MULTILINE)
    if m is None:
        if mandatory:
            raise ParseError(f"field {name!r} not found in report")
        return None
    raw = m.group(1)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ParseError(f"field {name!r}: non-numeric capture {raw!r}") from exc


def parse_vendor_report(
    text: str, profile: dict[str, str], source_phase: str = "rtl_synth"
) -> QoRReport:
    """Pull a canonical QoR out of vendor report text.

    The profile maps field names (wns, tns, latency, ff, lut, dsp, bram,
    optionally clock and loop_row) to regex patterns with one capture
    group; loop_row takes three groups (label, ii-or-dash, depth). The
    first match of each pattern wins.
    """
    wns = _extract(profile, text, "wns", float)
    tns = _extract(profile, text, "tns", float)
    latency = _extract(profile, text, "latency", int)
    ff = _extract(profile, text, "ff", int)
    lut = _extract(profile, text, "lut", int)
    dsp = _extract(profile, text, "dsp", int)
    bram = _extract(profile, text, "bram", int)
    clock = _extract(profile, text, "clock", float, mandatory=False) or 0.0

    loops: list[LoopMetric] = []
    row_pattern = profile.get("loop_row")
    if row_pattern:
        for m in re.finditer(row_pattern, text, re.MULTILINE):
            label, ii_raw, depth_raw = m.group(1), m.group(2), m.group(3)
            ii = None if ii_raw.strip() in ("-", "") else int(ii_raw)
            loops.append(
                LoopMetric(loop_label=label, ii=ii, depth=int(depth_raw), pipelined=ii is not None)
            )

    report = QoRReport(
        latency_cycles=latency,
        timing=TimingSummary.from_wns(wns, tns, clock),
        resources=ResourceUsage(ff=ff, lut=lut, dsp=dsp, bram=bram),
        loops=tuple(loops),
        source_phase=source_phase,
    )
    report.validate()
    return report


# ---------------------------------------------------------------------------
# Canonical serialization

_KNOWN_KEYS = {
    "schema_version",
    "latency_cycles",
    "timing",
    "resources",
    "loops",
    "source_phase",
}


def to_canonical_dict(report: QoRReport) -> dict:
    """Fixed-key-order dict form; round-trips bit-exactly through JSON."""
    return {
        "schema_version": SCHEMA_VERSION,
        "latency_cycles": report.latency_cycles,
        "timing": {
            "wns_ns": report.timing.wns_ns,
            "tns_ns": report.timing.tns_ns,
            "clock_ns": report.timing.clock_ns,
            "met": report.timing.met,
        },
        "resources": {
            "ff": report.resources.ff,
            "lut": report.resources.lut,
            "dsp": report.resources.dsp,
            "bram": report.resources.bram,
            "overflow": sorted(report.resources.overflow),
        },
        "loops": [
            {
                "loop_label": m.loop_label,
                "ii": m.ii,
                "depth": m.depth,
                "pipelined": m.pipelined,
            }
            for m in report.loops
        ],
        "source_phase": report.source_phase,
    }


def canonical_dumps(report: QoRReport) -> str:
    return json.dumps(to_canonical_dict(report), indent=2) + "\n"


def canonical_save(report: QoRReport, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(report), encoding="utf-8")


def from_canonical_dict(raw: dict) -> QoRReport:
    if not isinstance(raw, dict) or raw.get("schema_version") != SCHEMA_VERSION:
        raise VersionError(
            f"unsupported schema_version {raw.get('schema_version')!r} (want {SCHEMA_VERSION})"
        )
    for key in raw:
        if key not in _KNOWN_KEYS:
            log.warning("canonical report: ignoring unknown key %r", key)
    if "timing" not in raw:
        raise VersionError("canonical report missing 'timing'")
    try:
        timing_raw = raw["timing"]
        resources_raw = raw["resources"]
        # met is always recomputed from wns, never trusted from the file
        timing = TimingSummary.from_wns(
            wns_ns=float(timing_raw["wns_ns"]),
            tns_ns=float(timing_raw["tns_ns"]),
            clock_ns=float(timing_raw["clock_ns"]),
        )
        resources = ResourceUsage(
            ff=int(resources_raw["ff"]),
            lut=int(resources_raw["lut"]),
            dsp=int(resources_raw["dsp"]),
            bram=int(resources_raw["bram"]),
            overflow=frozenset(resources_raw.get("overflow", [])),
        )
        loops = tuple(
            LoopMetric(
                loop_label=m["loop_label"],
                ii=m["ii"],
                depth=int(m["depth"]),
                pipelined=bool(m["pipelined"]),
            )
            for m in raw.get("loops", [])
        )
        report = QoRReport(
            latency_cycles=int(raw["latency_cycles"]),
            timing=timing,
            resources=resources,
            loops=loops,
            source_phase=raw["source_phase"],
        )
    except (KeyError, TypeError) as exc:
        raise VersionError(f"canonical report malformed: {exc!r}") from exc
    report.validate()
    return report


def canonical_load(path: str | Path) -> QoRReport:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VersionError(f"{path}: not valid JSON: {exc}") from exc
    return from_canonical_dict(raw)
