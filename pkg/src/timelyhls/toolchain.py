"""Toolchain adapters: external vendor commands and an analytical simulator.

The simulator is a first-order model, not a vendor emulator. Every number
it produces is reproducible by hand from these fixed constants:

  op depths (cycles)      mul=4  add=1  load=2  store=2
  memory ports per bank   2
  DSP per multiply        1 when datapath <= 18 bits, else 3, per unroll copy
  FF per loop             ceil(ops*unroll*bits/4), plus ceil(D*bits*unroll/8)
                          of pipeline registers when pipelined
  LUT per loop            ceil(ops*unroll*bits/2)
  BRAM per array          ceil(elements*bits / (18432*pf)) * pf
  logic levels per loop   4 when pipelined, else 4 + ceil(log2(unroll))
                          + 2 when the loop multiplies
  critical path           max loop levels * logic_delay_ns (2 decimals)
  WNS                     clock - critical path;  TNS = min(0, WNS) * #loops

Loop schedules: effective trips Teff = ceil(trip/unroll). A pipelined
leaf takes min((Teff-1)*II + D, Teff*D) cycles with II the max of the
request, the memory-port floor ceil(accesses*unroll/(2*pf)) over the
arrays, and the carried-dependence distance; a sequential leaf takes
Teff*D. An enclosing loop contributes trip_count * inner latency plus its
own depth when it has ops of its own.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, replace
from pathlib import Path

from . import hls_source
from .errors import MappingError, ParseError, ToolMissing, ToolTimeout, ValidationError
from .hls_source import AnchorPoint, PragmaDirective, PragmaKind, SourceUnit, anchor_for_line
from .kb import FpgaTarget
from .reports import LoopMetric, QoRReport, ResourceUsage, TimingSummary, parse_vendor_report
from .reports import canonical_load

PHASES = ("hls_synth", "c_sim", "rtl_synth", "rtl_sim")
SYNTH_PHASES = ("hls_synth", "rtl_synth")

OP_DEPTH = {"mul": 4, "add": 1, "load": 2, "store": 2}
MEM_PORTS = 2
BRAM_BITS = 18432


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _log2_ceil(n: int) -> int:
    return (n - 1).bit_length()


@dataclass(frozen=True)
class LoopDescriptor:
    """One loop of the kernel nest (a chain: at most one child per loop)."""

    label: str
    trip_count: int
    op_counts: dict  # {"mul": n, "add": n, "load": n, "store": n}
    carried_dependence_distance: int = 0  # 0 = no recurrence
    child: "LoopDescriptor | None" = None
    pipeline_ii: int | None = None  # requested II; None = not pipelined
    unroll_factor: int = 1

    def ops_total(self) -> int:
        return sum(self.op_counts.get(k, 0) for k in OP_DEPTH)

    def depth_cycles(self) -> int:
        return sum(OP_DEPTH[k] * self.op_counts.get(k, 0) for k in OP_DEPTH)

    def chain(self) -> list["LoopDescriptor"]:
        out, cur = [], self
        while cur is not None:
            out.append(cur)
            cur = cur.child
        return out


@dataclass(frozen=True)
class ArraySpec:
    name: str
    elements: int
    accesses_per_iteration: int
    partition_factor: int = 1


@dataclass(frozen=True)
class KernelModel:
    """Abstract kernel description consumed by the analytical simulator."""

    root: LoopDescriptor
    arrays: tuple[ArraySpec, ...] = ()
    datapath_bits: int = 32

    def loops(self) -> list[LoopDescriptor]:
        return self.root.chain()

    def validate(self) -> None:
        labels = []
        for loop in self.loops():
            labels.append(loop.label)
            if loop.trip_count < 1:
                raise ValidationError(f"loop {loop.label!r}: trip_count must be >= 1")
            if loop.unroll_factor < 1:
                raise ValidationError(f"loop {loop.label!r}: unroll_factor must be >= 1")
            if loop.pipeline_ii is not None and loop.pipeline_ii < 1:
                raise ValidationError(f"loop {loop.label!r}: pipeline_ii must be >= 1")
            if any(v < 0 for v in loop.op_counts.values()):
                raise ValidationError(f"loop {loop.label!r}: negative op count")
        if len(labels) != len(set(labels)):
            raise ValidationError(f"duplicate loop labels: {labels}")
        names = [a.name for a in self.arrays]
        if len(names) != len(set(names)):
            raise ValidationError(f"duplicate array names: {names}")
        for a in self.arrays:
            if a.partition_factor < 1 or a.elements < 1 or a.accesses_per_iteration < 0:
                raise ValidationError(f"array {a.name!r}: bad spec")
        if self.datapath_bits < 1:
            raise ValidationError("datapath_bits must be >= 1")


def _loop_from_json(raw: dict) -> LoopDescriptor:
    child = _loop_from_json(raw["child"]) if raw.get("child") else None
    applied = raw.get("applied", {})
    return LoopDescriptor(
        label=raw["label"],
        trip_count=int(raw["trip_count"]),
        op_counts={k: int(v) for k, v in raw.get("op_counts", {}).items()},
        carried_dependence_distance=int(raw.get("carried_dependence_distance", 0)),
        child=child,
        pipeline_ii=applied.get("pipeline_ii"),
        unroll_factor=int(applied.get("unroll_factor", 1)),
    )


def load_model(path: str | Path) -> KernelModel:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    model = KernelModel(
        root=_loop_from_json(raw["root_loop"]),
        arrays=tuple(
            ArraySpec(
                name=a["name"],
                elements=int(a["elements"]),
                accesses_per_iteration=int(a["accesses_per_iteration"]),
                partition_factor=int(a.get("partition_factor", 1)),
            )
            for a in raw.get("arrays", [])
        ),
        datapath_bits=int(raw.get("datapath_bits", 32)),
    )
    model.validate()
    return model


# ---------------------------------------------------------------------------
# Analytical simulation


def memory_ii_floor(model: KernelModel, unroll_factor: int) -> int:
    """Port-pressure floor on II for a loop unrolled by the given factor."""
    floor = 1
    for a in model.arrays:
        if a.accesses_per_iteration > 0:
            need = _ceil_div(a.accesses_per_iteration * unroll_factor, MEM_PORTS * a.partition_factor)
            floor = max(floor, need)
    return floor


def achieved_ii(model: KernelModel, loop: LoopDescriptor) -> int:
    requested = loop.pipeline_ii if loop.pipeline_ii is not None else 1
    dep_floor = max(1, loop.carried_dependence_distance)
    return max(requested, memory_ii_floor(model, loop.unroll_factor), dep_floor)


def _loop_latency(model: KernelModel, loop: LoopDescriptor) -> int:
    depth = loop.depth_cycles()
    if loop.child is not None:
        inner = _loop_latency(model, loop.child)
        return loop.trip_count * inner + (depth if loop.ops_total() > 0 else 0)
    teff = _ceil_div(loop.trip_count, loop.unroll_factor)
    sequential = teff * depth
    if loop.pipeline_ii is None:
        return sequential
    pipelined = (teff - 1) * achieved_ii(model, loop) + depth
    # A pipelined loop never schedules worse than its own sequential form.
    return min(pipelined, sequential)


def _loop_logic_levels(loop: LoopDescriptor) -> int:
    if loop.pipeline_ii is not None:
        return 4
    chain = _log2_ceil(loop.unroll_factor) + (2 if loop.op_counts.get("mul", 0) > 0 else 0)
    return 4 + chain


def simulate(model: KernelModel, target: FpgaTarget, clock_ns: float) -> QoRReport:
    """Deterministic QoR for a kernel model on a target at a clock.

    Pure function: equal inputs give equal reports. Resource overflow is
    reported through flags, not an error, so the refinement loop can feed
    it back to the generator.
    """
    model.validate()
    loops = model.loops()
    bits = model.datapath_bits

    latency = _loop_latency(model, model.root)

    dsp_per_mul = 1 if bits <= 18 else 3
    dsp = ff = lut = 0
    for loop in loops:
        u = loop.unroll_factor
        ops = loop.ops_total()
        depth = loop.depth_cycles()
        dsp += loop.op_counts.get("mul", 0) * u * dsp_per_mul
        ff += _ceil_div(ops * u * bits, 4)
        if loop.pipeline_ii is not None:
            ff += _ceil_div(depth * bits * u, 8)
        lut += _ceil_div(ops * u * bits, 2)
    bram = 0
    for a in model.arrays:
        bram += _ceil_div(a.elements * bits, BRAM_BITS * a.partition_factor) * a.partition_factor

    overflow = frozenset(
        name
        for name, used in (("ff", ff), ("lut", lut), ("dsp", dsp), ("bram", bram))
        if used > target.capacity(name)
    )

    levels = max(_loop_logic_levels(loop) for loop in loops)
    # 2-dp arithmetic in integer hundredths so WNS + critical path == clock exactly
    cp_cents = round(levels * target.logic_delay_ns * 100)
    clock_cents = round(clock_ns * 100)
    wns_cents = clock_cents - cp_cents
    tns_cents = min(0, wns_cents) * len(loops)

    metrics = tuple(
        LoopMetric(
            loop_label=loop.label,
            ii=achieved_ii(model, loop) if loop.pipeline_ii is not None else None,
            depth=loop.depth_cycles(),
            pipelined=loop.pipeline_ii is not None,
        )
        for loop in loops
    )
    return QoRReport(
        latency_cycles=latency,
        timing=TimingSummary.from_wns(wns_cents / 100, tns_cents / 100, clock_cents / 100),
        resources=ResourceUsage(ff=ff, lut=lut, dsp=dsp, bram=bram, overflow=overflow),
        loops=metrics,
        source_phase="simulated",
    )


def critical_path_ns(report: QoRReport) -> float:
    return round(report.timing.clock_ns - report.timing.wns_ns, 2)


# ---------------------------------------------------------------------------
# Mapping parsed pragmas onto a model


def apply_pragmas_to_model(
    model: KernelModel,
    pragmas: list[PragmaDirective] | tuple[PragmaDirective, ...],
    anchors: list[AnchorPoint] | tuple[AnchorPoint, ...],
) -> KernelModel:
    """New model with pipeline/unroll/partition settings from the pragmas.

    PIPELINE and UNROLL resolve through their enclosing loop anchor to a
    model loop of the same label; ARRAY_PARTITION resolves by variable
    name. Other kinds are no-ops at the model level. Unknown labels or
    arrays raise MappingError.
    """
    by_label = {loop.label: {} for loop in model.loops()}
    array_pf = {a.name: a.partition_factor for a in model.arrays}
    elements = {a.name: a.elements for a in model.arrays}

    for p in pragmas:
        if p.kind in (PragmaKind.PIPELINE, PragmaKind.UNROLL):
            owner = anchor_for_line(anchors, p.source_line)
            if owner is None or owner.kind != "loop_body_start":
                raise MappingError(
                    f"line {p.source_line}: {p.kind.value} pragma is not inside a loop body"
                )
            if owner.label not in by_label:
                raise MappingError(
                    f"line {p.source_line}: loop {owner.label!r} not in kernel model"
                )
            if p.kind is PragmaKind.PIPELINE:
                by_label[owner.label]["pipeline_ii"] = p.ii if p.ii is not None else 1
            else:
                by_label[owner.label]["unroll_factor"] = p.factor  # None = full unroll
        elif p.kind is PragmaKind.ARRAY_PARTITION:
            if p.variable is None or p.variable not in array_pf:
                raise MappingError(
                    f"line {p.source_line}: array {p.variable!r} not in kernel model"
                )
            if p.partition_type == "complete":
                array_pf[p.variable] = elements[p.variable]
            else:
                array_pf[p.variable] = p.factor if p.factor is not None else 2
        # DATAFLOW / INTERFACE / INLINE: not modeled

    def rebuild(loop: LoopDescriptor) -> LoopDescriptor:
        changes = by_label[loop.label]
        unroll = changes.get("unroll_factor", "keep")
        if unroll is None:  # UNROLL with no factor: full unroll
            unroll = loop.trip_count
        elif unroll == "keep":
            unroll = loop.unroll_factor
        return replace(
            loop,
            pipeline_ii=changes.get("pipeline_ii", loop.pipeline_ii),
            unroll_factor=unroll,
            child=rebuild(loop.child) if loop.child else None,
        )

    new_arrays = tuple(replace(a, partition_factor=array_pf[a.name]) for a in model.arrays)
    new_model = KernelModel(root=rebuild(model.root), arrays=new_arrays, datapath_bits=model.datapath_bits)
    new_model.validate()
    return new_model


# ---------------------------------------------------------------------------
# Outcomes and the toolchain interface


@dataclass(frozen=True)
class SynthesisOutcome:
    ok: bool
    phase: str
    log: str
    qor: QoRReport | None = None


class Toolchain:
    """Interface the refinement loop drives, one phase at a time."""

    def run_phase(self, phase: str, source_text: str, workdir: Path) -> SynthesisOutcome:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Simulated toolchain


def _sim_tokens(text: str) -> list[str]:
    """Token stream for functional comparison: pragmas, comments, and
    whitespace are ignored; everything that computes is kept."""
    unit_text = "\n".join(
        ln for ln in text.split("\n") if not hls_source._PRAGMA_LINE.match(ln.rstrip("\r"))
    )
    return [tok for tok, _ in hls_source._lex(unit_text)]


def render_synth_log(report: QoRReport, model: KernelModel, target: FpgaTarget) -> str:
    """Human-readable synthesis log mirroring what a vendor tool prints."""
    lines = [
        f"synthesis for part {target.part} ({target.family})",
        f"Total Latency (cycles): {report.latency_cycles}",
    ]
    for m in report.loops:
        ii = m.ii if m.ii is not None else "-"
        lines.append(f"* Loop {m.loop_label}: II = {ii}, Depth = {m.depth}")
    for loop in model.loops():
        if loop.pipeline_ii is not None:
            got = achieved_ii(model, loop)
            if got > loop.pipeline_ii:
                lines.append(
                    f"pipeline violation: loop '{loop.label}' achieved II = {got} "
                    f"exceeds requested II = {loop.pipeline_ii}"
                )
    lines.append(
        f"timing: {max(_loop_logic_levels(l) for l in model.loops())} logic levels, "
        f"est. {critical_path_ns(report):.2f} ns against clock {report.timing.clock_ns:.2f} ns"
    )
    lines.append(f"WNS(ns): {report.timing.wns_ns:.2f}    TNS(ns): {report.timing.tns_ns:.2f}")
    if report.timing.wns_ns < 0:
        worst = max(model.loops(), key=_loop_logic_levels)
        lines.append(
            f"critical path: {_loop_logic_levels(worst)} levels through loop "
            f"'{worst.label}' (est. {critical_path_ns(report):.2f} ns)"
        )
    for name in sorted(report.resources.overflow):
        lines.append(
            f"resource overflow: {name} demand {report.resources.get(name)} exceeds "
            f"capacity {target.capacity(name)}"
        )
    usage = report.resources
    lines.append(f"resources: FF={usage.ff} LUT={usage.lut} DSP={usage.dsp} BRAM={usage.bram}")
    return "\n".join(lines) + "\n"


class SimulatedToolchain(Toolchain):
    """Deterministic stand-in for the vendor flow, driven by a kernel model.

    Synthesis phases map the source's pragmas onto the model and run the
    analytical simulator; simulation phases check the generated kernel is
    token-equivalent to the reference once pragmas are removed (pragmas
    must not change semantics, anything else is a functional mismatch).
    """

    def __init__(
        self,
        model: KernelModel,
        reference_source: str,
        top_function: str,
        target: FpgaTarget,
        clock_ns: float,
    ):
        self.model = model
        self.reference_source = reference_source
        self.top_function = top_function
        self.target = target
        self.clock_ns = clock_ns

    def run_phase(self, phase: str, source_text: str, workdir: Path) -> SynthesisOutcome:
        if phase in SYNTH_PHASES:
            return self._synthesize(phase, source_text)
        return self._simulate_functional(phase, source_text)

    def _synthesize(self, phase: str, source_text: str) -> SynthesisOutcome:
        try:
            unit = SourceUnit.from_text(source_text)
        except ParseError as exc:
            return SynthesisOutcome(ok=False, phase=phase, log=f"error: {exc}\n")
        functions = [a.label for a in unit.anchors if a.kind == "function_body_start"]
        if self.top_function not in functions:
            return SynthesisOutcome(
                ok=False,
                phase=phase,
                log=f"error: top function '{self.top_function}' not found "
                f"(saw: {', '.join(functions) or 'none'})\n",
            )
        try:
            applied = apply_pragmas_to_model(self.model, unit.pragmas, unit.anchors)
        except MappingError as exc:
            return SynthesisOutcome(ok=False, phase=phase, log=f"error: {exc}\n")
        report = simulate(applied, self.target, self.clock_ns)
        return SynthesisOutcome(
            ok=True,
            phase=phase,
            log=render_synth_log(report, applied, self.target),
            qor=report,
        )

    def _simulate_functional(self, phase: str, source_text: str) -> SynthesisOutcome:
        level = "C" if phase == "c_sim" else "RTL"
        try:
            got = _sim_tokens(source_text)
        except ParseError as exc:
            return SynthesisOutcome(ok=False, phase=phase, log=f"error: {exc}\n")
        want = _sim_tokens(self.reference_source)
        lines = [f"{level} simulation: top '{self.top_function}' against reference testbench"]
        mismatches = []
        for i, (w, g) in enumerate(zip(want, got)):
            if w != g:
                mismatches.append(f"functional mismatch: token {i}: expected {w!r} got {g!r}")
            if len(mismatches) >= 8:
                break
        if len(want) != len(got):
            mismatches.append(
                f"functional mismatch: token count differs: expected {len(want)} got {len(got)}"
            )
        if mismatches:
            lines += mismatches
            lines.append("RESULT: FAIL")
            return SynthesisOutcome(ok=False, phase=phase, log="\n".join(lines) + "\n")
        lines.append("RESULT: PASS")
        return SynthesisOutcome(ok=True, phase=phase, log="\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# External toolchain (vendor commands)


@dataclass(frozen=True)
class PhaseCommand:
    """How to run one phase externally: a shell template plus report rules.

    The command may use {part}, {clock_ns}, {top}, and {workdir}
    placeholders. For synth phases, files matching report_glob inside the
    workdir are parsed (vendor text through the profile, or canonical
    JSON) to produce the QoR.
    """

    command: str
    timeout_s: float = 1800.0
    report_glob: str = "*.rpt"
    report_format: str = "vendor"  # "vendor" | "canonical"
    profile: dict | None = None


@dataclass(frozen=True)
class AdapterConfig:
    phases: dict  # phase name -> PhaseCommand
    part: str = ""
    clock_ns: float = 10.0
    top: str = ""


def run_phase(cfg: AdapterConfig, phase: str, workdir: str | Path) -> SynthesisOutcome:
    """Run one external phase in the workdir and collect its outcome.

    Exit 127 means the tool binary is missing (ToolMissing); exceeding the
    per-phase timeout raises ToolTimeout; any other nonzero exit is an
    ok=False outcome carrying the captured log.
    """
    workdir = Path(workdir)
    try:
        spec = cfg.phases[phase]
    except KeyError:
        raise ToolMissing(f"no command configured for phase {phase!r}")
    command = spec.command.format(
        part=cfg.part, clock_ns=cfg.clock_ns, top=cfg.top, workdir=str(workdir)
    )
    try:
        proc = subprocess.run(
            command,
            shell=True,
            cwd=str(workdir),
            capture_output=True,
            text=True,
            timeout=spec.timeout_s,
        )
    except subprocess.TimeoutExpired as exc:
        raise ToolTimeout(f"phase {phase}: {command!r} exceeded {spec.timeout_s}s") from exc
    log_text = proc.stdout + proc.stderr
    if proc.returncode == 127:
        raise ToolMissing(f"phase {phase}: command not found: {shlex.split(command)[0]!r}")
    if proc.returncode != 0:
        return SynthesisOutcome(ok=False, phase=phase, log=log_text or f"exit {proc.returncode}\n")
    if phase not in SYNTH_PHASES:
        return SynthesisOutcome(ok=True, phase=phase, log=log_text)
    reports_found = sorted(workdir.glob(spec.report_glob))
    if not reports_found:
        return SynthesisOutcome(
            ok=False,
            phase=phase,
            log=log_text + f"error: no report matching {spec.report_glob!r} in {workdir}\n",
        )
    report_path = reports_found[0]
    if spec.report_format == "canonical":
        qor = canonical_load(report_path)
    else:
        profile = spec.profile
        if profile is None:
            from .reports import default_profile

            profile = default_profile()
        qor = parse_vendor_report(
            report_path.read_text(encoding="utf-8"), profile, source_phase=phase
        )
    return SynthesisOutcome(ok=True, phase=phase, log=log_text, qor=qor)


class ExternalToolchain(Toolchain):
    """Drives real vendor tools through configured shell command templates."""

    def __init__(self, cfg: AdapterConfig, testbench_path: str | Path | None = None):
        self.cfg = cfg
        self.testbench_path = Path(testbench_path) if testbench_path else None

    def run_phase(self, phase: str, source_text: str, workdir: Path) -> SynthesisOutcome:
        workdir = Path(workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        (workdir / "kernel.cpp").write_text(source_text, encoding="utf-8")
        if self.testbench_path is not None:
            (workdir / self.testbench_path.name).write_text(
                self.testbench_path.read_text(encoding="utf-8"), encoding="utf-8"
            )
        return run_phase(self.cfg, phase, workdir)
