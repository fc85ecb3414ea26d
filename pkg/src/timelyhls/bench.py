"""Benchmark corpus descriptors and QoR metric aggregation.

Computes speedups and resource deltas between baseline and optimized
reports, and emits deterministic CSV/markdown tables plus a per-family
success matrix and plot data from a tree of run archives.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ContractError, ValidationError
from .reports import QoRReport, ResourceUsage, canonical_load

RESOURCES = ("ff", "lut", "dsp", "bram")


@dataclass(frozen=True)
class BenchmarkDescriptor:
    id: str
    title: str
    challenge: str
    source_path: Path
    testbench_path: Path
    model_path: Path
    top_function: str

    def source_text(self) -> str:
        return self.source_path.read_text(encoding="utf-8")


def load_manifest(path: str | Path) -> list[BenchmarkDescriptor]:
    """Read bench/manifest.json; every referenced path must exist."""
    path = Path(path)
    base = path.parent
    raw = json.loads(path.read_text(encoding="utf-8"))
    out: list[BenchmarkDescriptor] = []
    seen: set[str] = set()
    for entry in raw:
        desc = BenchmarkDescriptor(
            id=entry["id"],
            title=entry["title"],
            challenge=entry["challenge"],
            source_path=base / entry["source_path"],
            testbench_path=base / entry["testbench_path"],
            model_path=base / entry["model_path"],
            top_function=entry["top_function"],
        )
        if desc.id in seen:
            raise ValidationError(f"duplicate benchmark id {desc.id!r}")
        seen.add(desc.id)
        for p in (desc.source_path, desc.testbench_path, desc.model_path):
            if not p.is_file():
                raise ValidationError(f"benchmark {desc.id!r}: missing file {p}")
        out.append(desc)
    return out


def bundled_manifest_path() -> Path:
    from . import data_path

    return data_path("bench", "manifest.json")


def find_benchmark(benchmarks: list[BenchmarkDescriptor], benchmark_id: str) -> BenchmarkDescriptor:
    for b in benchmarks:
        if b.id == benchmark_id:
            return b
    from .errors import NotFound

    raise NotFound(f"benchmark {benchmark_id!r} not in manifest")


# ---------------------------------------------------------------------------
# Metric arithmetic


def compute_speedup(base_cycles: int, opt_cycles: int) -> float:
    """Latency ratio base/opt; > 1 means the optimized design is faster.

    Full precision is kept so reciprocal pairs multiply to exactly 1;
    rendering to 4 significant digits happens at table-emission time.
    """
    if base_cycles <= 0 or opt_cycles <= 0:
        raise ContractError(f"cycle counts must be > 0, got ({base_cycles}, {opt_cycles})")
    return base_cycles / opt_cycles


def format_speedup(speedup: float) -> str:
    return f"{speedup:.4g}"


def compute_resource_delta(base: ResourceUsage, opt: ResourceUsage) -> dict[str, float | str]:
    """Per-resource percent change (2 decimals), or "new" when the base
    design used none of a resource the optimized one does."""
    out: dict[str, float | str] = {}
    for name in RESOURCES:
        b, o = base.get(name), opt.get(name)
        if b == 0:
            out[name] = "new" if o > 0 else 0.0
        else:
            out[name] = round((o - b) / b * 100.0, 2)
    return out


def _min_ii(report: QoRReport) -> int | None:
    iis = [m.ii for m in report.loops if m.ii is not None]
    return min(iis) if iis else None


@dataclass(frozen=True)
class QoRDelta:
    """Base-versus-optimized comparison for one benchmark on one part."""

    benchmark_id: str
    part: str
    family: str
    speedup: float
    ff_base: int
    ff_opt: int
    ff_change_pct: float | str
    lut_base: int
    lut_opt: int
    lut_change_pct: float | str
    dsp_base: int
    dsp_opt: int
    ii_base: int | None
    ii_opt: int | None
    wns_base: float
    wns_opt: float


def delta_from_reports(
    benchmark_id: str, part: str, family: str, base: QoRReport, opt: QoRReport
) -> QoRDelta:
    pct = compute_resource_delta(base.resources, opt.resources)
    return QoRDelta(
        benchmark_id=benchmark_id,
        part=part,
        family=family,
        speedup=compute_speedup(base.latency_cycles, opt.latency_cycles),
        ff_base=base.resources.ff,
        ff_opt=opt.resources.ff,
        ff_change_pct=pct["ff"],
        lut_base=base.resources.lut,
        lut_opt=opt.resources.lut,
        lut_change_pct=pct["lut"],
        dsp_base=base.resources.dsp,
        dsp_opt=opt.resources.dsp,
        ii_base=_min_ii(base),
        ii_opt=_min_ii(opt),
        wns_base=base.timing.wns_ns,
        wns_opt=opt.timing.wns_ns,
    )


# ---------------------------------------------------------------------------
# Table emission


def _fmt_pct(v: float | str) -> str:
    return v if isinstance(v, str) else f"{v:.2f}"


def _fmt_ii(v: int | None) -> str:
    return "-" if v is None else str(v)


_TABLE_SHAPES = {
    "ff": (
        ["Benchmark", "Family", "Part", "FF Used", "FF Change (%)"],
        lambda d: [d.benchmark_id, d.family, d.part, str(d.ff_opt), _fmt_pct(d.ff_change_pct)],
    ),
    "lut": (
        ["Benchmark", "Family", "Part", "LUTs Used", "LUTs Change (%)"],
        lambda d: [d.benchmark_id, d.family, d.part, str(d.lut_opt), _fmt_pct(d.lut_change_pct)],
    ),
    "latency": (
        ["Benchmark", "Family", "Part", "Speedup", "WNS Base (ns)", "WNS Optimized (ns)"],
        lambda d: [
            d.benchmark_id,
            d.family,
            d.part,
            format_speedup(d.speedup),
            f"{d.wns_base:.2f}",
            f"{d.wns_opt:.2f}",
        ],
    ),
    "loop_ii": (
        ["Benchmark", "Part", "Base II", "Optimized II"],
        lambda d: [d.benchmark_id, d.part, _fmt_ii(d.ii_base), _fmt_ii(d.ii_opt)],
    ),
    "full": (
        [
            "Benchmark",
            "Family",
            "Part",
            "Speedup",
            "FF Used",
            "FF Change (%)",
            "LUTs Used",
            "LUTs Change (%)",
            "DSP Base",
            "DSP Optimized",
            "Base II",
            "Optimized II",
            "WNS Base (ns)",
            "WNS Optimized (ns)",
        ],
        lambda d: [
            d.benchmark_id,
            d.family,
            d.part,
            format_speedup(d.speedup),
            str(d.ff_opt),
            _fmt_pct(d.ff_change_pct),
            str(d.lut_opt),
            _fmt_pct(d.lut_change_pct),
            str(d.dsp_base),
            str(d.dsp_opt),
            _fmt_ii(d.ii_base),
            _fmt_ii(d.ii_opt),
            f"{d.wns_base:.2f}",
            f"{d.wns_opt:.2f}",
        ],
    ),
}


def emit_tables(deltas: list[QoRDelta], format: str = "csv", table: str = "full") -> str:
    """One table as text, rows sorted by (benchmark, part); deterministic."""
    header, row_fn = _TABLE_SHAPES[table]
    rows = [row_fn(d) for d in sorted(deltas, key=lambda d: (d.benchmark_id, d.part))]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if format == "markdown":
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ContractError(f"unknown table format {format!r}")


# ---------------------------------------------------------------------------
# Success matrix


def _family_and_verdict(state) -> tuple[str, str]:
    if isinstance(state, dict):
        return state["family"], state["final_verdict"]
    return state.target.family, state.final_verdict


def emit_success_matrix(states: list) -> dict[str, float]:
    """Per-family percentage of runs that converged, 1 decimal place.

    Families with no attempted runs are simply absent.
    """
    attempted: dict[str, int] = {}
    converged: dict[str, int] = {}
    for state in states:
        family, verdict = _family_and_verdict(state)
        attempted[family] = attempted.get(family, 0) + 1
        if verdict == "converged":
            converged[family] = converged.get(family, 0) + 1
    return {
        family: round(100.0 * converged.get(family, 0) / n, 1)
        for family, n in sorted(attempted.items())
    }


def success_matrix_csv(states: list) -> str:
    attempted: dict[str, int] = {}
    converged: dict[str, int] = {}
    for state in states:
        family, verdict = _family_and_verdict(state)
        attempted[family] = attempted.get(family, 0) + 1
        if verdict == "converged":
            converged[family] = converged.get(family, 0) + 1
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["family", "attempted", "converged", "success_pct"])
    for family, n in sorted(attempted.items()):
        c = converged.get(family, 0)
        writer.writerow([family, n, c, f"{100.0 * c / n:.1f}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Run-archive collection


def read_state(run_dir: Path) -> dict | None:
    state_file = Path(run_dir) / "state.json"
    if not state_file.is_file():
        return None
    return json.loads(state_file.read_text(encoding="utf-8"))


def final_report(run_dir: Path) -> QoRReport | None:
    """Last iteration's RTL-synthesis report (falls back to HLS synth)."""
    run_dir = Path(run_dir)
    iter_dirs = sorted(
        (d for d in run_dir.glob("iter_*") if d.is_dir()),
        key=lambda d: int(d.name.split("_")[1]),
    )
    for it in reversed(iter_dirs):
        for name in ("rtl_synth_qor.json", "hls_synth_qor.json"):
            if (it / name).is_file():
                return canonical_load(it / name)
    return None


def collect_results(runs_root: str | Path) -> tuple[list[QoRDelta], list[dict]]:
    """Walk runs/<benchmark>/<part>/ archives into deltas and state dicts.

    Deltas are only produced for converged runs that have both a baseline
    and a final report; every run contributes to the success matrix.
    """
    runs_root = Path(runs_root)
    deltas: list[QoRDelta] = []
    states: list[dict] = []
    for state_file in sorted(runs_root.glob("*/*/state.json")):
        run_dir = state_file.parent
        state = json.loads(state_file.read_text(encoding="utf-8"))
        states.append(state)
        if state.get("final_verdict") != "converged":
            continue
        base_file = run_dir / "base_qor.json"
        if not base_file.is_file():
            continue
        final = final_report(run_dir)
        if final is None:
            continue
        deltas.append(
            delta_from_reports(
                benchmark_id=state["benchmark_id"],
                part=state["part"],
                family=state["family"],
                base=canonical_load(base_file),
                opt=final,
            )
        )
    return deltas, states


def _slug(name: str) -> str:
    return re.sub(r"[^0-9a-z]+", "_", name.lower()).strip("_")


def write_results(deltas: list[QoRDelta], states: list, out_dir: str | Path) -> list[Path]:
    """Emit tables, success matrix, and plot data under out_dir."""
    out_dir = Path(out_dir)
    tables_dir = out_dir / "tables"
    plot_dir = out_dir / "plotdata"
    tables_dir.mkdir(parents=True, exist_ok=True)
    plot_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for table in ("ff", "lut", "latency", "loop_ii", "full"):
        for fmt, ext in (("csv", "csv"), ("markdown", "md")):
            path = tables_dir / f"{table}.{ext}"
            path.write_text(emit_tables(deltas, format=fmt, table=table), encoding="utf-8")
            written.append(path)
    matrix_path = out_dir / "success_matrix.csv"
    matrix_path.write_text(success_matrix_csv(states), encoding="utf-8")
    written.append(matrix_path)
    by_family: dict[str, list[QoRDelta]] = {}
    for d in deltas:
        by_family.setdefault(d.family, []).append(d)
    for family, rows in sorted(by_family.items()):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["benchmark", "speedup"])
        best: dict[str, float] = {}
        for d in sorted(rows, key=lambda d: (d.benchmark_id, d.part)):
            best.setdefault(d.benchmark_id, d.speedup)
        for benchmark_id, speedup in sorted(best.items()):
            writer.writerow([benchmark_id, format_speedup(speedup)])
        path = plot_dir / f"speedup_{_slug(family)}.csv"
        path.write_text(buf.getvalue(), encoding="utf-8")
        written.append(path)
    return written
