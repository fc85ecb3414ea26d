"""Command-line entry point.

Subcommands: `kb validate`, `optimize`, `matrix`, `dse`, `report render`.
Exit codes form a stable CI contract: 0 success/converged, 1 domain
failure (validation errors, non-convergence), 2 usage errors (unknown
ids, missing files, bad flags).
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import click

from . import bench as bench_mod
from . import data_path, dse as dse_mod, kb as kb_mod, scenario
from .errors import ConfigError, NotFound, TimelyHlsError, ValidationError
from .llm import BackendConfig, make_backend
from .loop import RefinementConfig, RunBackends, run_refinement
from .reports import to_canonical_dict
from .toolchain import (
    AdapterConfig,
    ExternalToolchain,
    PhaseCommand,
    SimulatedToolchain,
    load_model,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass
class AppConfig:
    kb_dir: Path
    bench_manifest: Path
    results_dir: Path
    backend: BackendConfig
    toolchain_kind: str  # "simulated" | "external"
    adapter_phases: dict  # phase -> PhaseCommand (external only)
    refinement: RefinementConfig
    jobs: int


def _default_config() -> AppConfig:
    return AppConfig(
        kb_dir=data_path("kb"),
        bench_manifest=bench_mod.bundled_manifest_path(),
        results_dir=Path("results"),
        backend=BackendConfig(kind="scripted", script_path=None),
        toolchain_kind="simulated",
        adapter_phases={},
        refinement=RefinementConfig(),
        jobs=os.cpu_count() or 1,
    )


def load_config(path: str | None) -> AppConfig:
    cfg = _default_config()
    if path is None:
        return cfg
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if raw.get("kb_dir"):
        cfg.kb_dir = Path(raw["kb_dir"])
    if raw.get("bench_manifest"):
        cfg.bench_manifest = Path(raw["bench_manifest"])
    if raw.get("results_dir"):
        cfg.results_dir = Path(raw["results_dir"])
    if raw.get("jobs"):
        cfg.jobs = int(raw["jobs"])
    backend_raw = raw.get("backend", {})
    if backend_raw:
        cfg.backend = BackendConfig(
            kind=backend_raw.get("kind", "scripted"),
            endpoint=backend_raw.get("endpoint"),
            model=backend_raw.get("model"),
            temperature=float(backend_raw.get("temperature", 0.7)),
            max_retries=int(backend_raw.get("max_retries", 2)),
            script_path=backend_raw.get("script_path"),
        )
    tool_raw = raw.get("toolchain", {})
    if tool_raw:
        cfg.toolchain_kind = tool_raw.get("kind", "simulated")
        cfg.adapter_phases = {
            phase: PhaseCommand(
                command=spec["command"],
                timeout_s=float(spec.get("timeout_s", 1800.0)),
                report_glob=spec.get("report_glob", "*.rpt"),
                report_format=spec.get("report_format", "vendor"),
                profile=spec.get("profile"),
            )
            for phase, spec in tool_raw.get("phases", {}).items()
        }
    refine_raw = raw.get("refinement", {})
    if refine_raw:
        cfg.refinement = RefinementConfig(
            max_iterations=int(refine_raw.get("max_iterations", 10)),
            k_docs=int(refine_raw.get("k_docs", 4)),
            clock_ns=refine_raw.get("clock_ns"),
            log_excerpt_lines=int(refine_raw.get("log_excerpt_lines", 40)),
        )
    return cfg


def _resolve_script(cfg: AppConfig, benchmark_id: str) -> str:
    script = cfg.backend.script_path
    if script is None:
        raise ConfigError("scripted backend needs backend.script_path (file or directory)")
    path = Path(script)
    if path.is_dir():
        path = path / f"{benchmark_id}.json"
    if not path.is_file():
        raise ConfigError(f"script not found: {path}")
    return str(path)


def _make_cell(cfg: AppConfig, benchmark, target):
    """Backend + toolchain + archive dir for one benchmark x part cell."""
    clock_ns = cfg.refinement.clock_ns or target.default_clock_ns
    if cfg.toolchain_kind == "simulated":
        toolchain = SimulatedToolchain(
            model=load_model(benchmark.model_path),
            reference_source=benchmark.source_text(),
            top_function=benchmark.top_function,
            target=target,
            clock_ns=clock_ns,
        )
    else:
        adapter = AdapterConfig(
            phases=cfg.adapter_phases,
            part=target.part,
            clock_ns=clock_ns,
            top=benchmark.top_function,
        )
        toolchain = ExternalToolchain(adapter, testbench_path=benchmark.testbench_path)
    backend_cfg = cfg.backend
    if backend_cfg.kind == "scripted":
        backend_cfg = replace(backend_cfg, script_path=_resolve_script(cfg, benchmark.id))
    backend = make_backend(backend_cfg)
    archive = cfg.results_dir / "runs" / benchmark.id / target.part
    return backend, toolchain, archive


def _apply_common_overrides(cfg: AppConfig, backend, toolchain, max_iters, results_dir):
    if backend:
        cfg.backend = replace(cfg.backend, kind={"scripted": "scripted", "http": "http_chat"}[backend])
    if toolchain:
        cfg.toolchain_kind = toolchain
    if max_iters:
        cfg.refinement = replace(cfg.refinement, max_iterations=max_iters)
    if results_dir:
        cfg.results_dir = Path(results_dir)
    return cfg


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Architecture-aware HLS optimization orchestrator."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.group()
def kb() -> None:
    """Knowledge-base management."""


@kb.command("validate")
@click.option("--kb-dir", type=click.Path(), default=None, help="KB directory (default: bundled).")
def kb_validate(kb_dir: str | None) -> None:
    """Ingest a knowledge base and report its contents."""
    directory = Path(kb_dir) if kb_dir else data_path("kb")
    try:
        targets, index = kb_mod.ingest(directory)
    except (ConfigError, ValidationError) as exc:
        click.echo(f"validation failed: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    click.echo(f"{len(targets)} targets, {len(index.docs)} docs, 0 errors")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--benchmark", required=True, help="Benchmark id from the manifest.")
@click.option("--part", required=True, help="FPGA part number from the knowledge base.")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--backend", type=click.Choice(["scripted", "http"]), default=None)
@click.option("--script-path", type=click.Path(), default=None, help="Scripted backend responses.")
@click.option("--toolchain", type=click.Choice(["simulated", "external"]), default=None)
@click.option("--max-iters", type=int, default=None)
@click.option("--results-dir", type=click.Path(), default=None)
def optimize(benchmark, part, config_path, backend, script_path, toolchain, max_iters, results_dir):
    """Run the refinement loop for one benchmark on one device."""
    try:
        cfg = load_config(config_path)
        cfg = _apply_common_overrides(cfg, backend, toolchain, max_iters, results_dir)
        if script_path:
            cfg.backend = replace(cfg.backend, script_path=script_path)
        targets, index = kb_mod.ingest(cfg.kb_dir)
        target = kb_mod.find_target(targets, part)
        benchmarks = bench_mod.load_manifest(cfg.bench_manifest)
        desc = bench_mod.find_benchmark(benchmarks, benchmark)
        gen_backend, tool, archive = _make_cell(cfg, desc, target)
    except (NotFound, ConfigError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except TimelyHlsError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    state = run_refinement(
        desc, target, cfg.refinement, RunBackends(gen_backend, tool, index), archive
    )
    click.echo(f"{benchmark} on {part}: {state.final_verdict} "
               f"after {len(state.iterations)} iteration(s); archive: {archive}")
    sys.exit(EXIT_OK if state.final_verdict == "converged" else EXIT_FAILURE)


def _run_cell(cfg: AppConfig, desc, target, index):
    try:
        gen_backend, tool, archive = _make_cell(cfg, desc, target)
    except TimelyHlsError as exc:
        log.warning("cell %s/%s not runnable: %s", desc.id, target.part, exc)
        return {
            "benchmark_id": desc.id,
            "part": target.part,
            "family": target.family,
            "final_verdict": "aborted",
            "abort_reason": str(exc),
        }
    state = run_refinement(
        desc, target, cfg.refinement, RunBackends(gen_backend, tool, index), archive
    )
    return {
        "benchmark_id": desc.id,
        "part": target.part,
        "family": target.family,
        "final_verdict": state.final_verdict,
    }


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--jobs", type=int, default=None, help="Parallel cells (default: CPUs).")
@click.option("--backend", type=click.Choice(["scripted", "http"]), default=None)
@click.option("--script-path", type=click.Path(), default=None,
              help="Script file or per-benchmark script directory.")
@click.option("--toolchain", type=click.Choice(["simulated", "external"]), default=None)
@click.option("--max-iters", type=int, default=None)
@click.option("--results-dir", type=click.Path(), default=None)
@click.option("--write-scripts", is_flag=True,
              help="Generate default per-benchmark scenario scripts first.")
def matrix(config_path, jobs, backend, script_path, toolchain, max_iters, results_dir, write_scripts):
    """Run every benchmark on every device and emit result tables."""
    try:
        cfg = load_config(config_path)
        cfg = _apply_common_overrides(cfg, backend, toolchain, max_iters, results_dir)
        if script_path:
            cfg.backend = replace(cfg.backend, script_path=script_path)
        if jobs:
            cfg.jobs = jobs
        targets, index = kb_mod.ingest(cfg.kb_dir)
        benchmarks = bench_mod.load_manifest(cfg.bench_manifest)
        if write_scripts and cfg.backend.kind == "scripted":
            script_dir = Path(cfg.backend.script_path or cfg.results_dir / "scripts")
            scenario.write_matrix_scripts(benchmarks, script_dir)
            cfg.backend = replace(cfg.backend, script_path=str(script_dir))
    except (NotFound, ConfigError, ValidationError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)

    cells = [(desc, target) for desc in benchmarks for target in targets]
    with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool:
        outcomes = list(pool.map(lambda cell: _run_cell(cfg, *cell, index), cells))

    runs_root = cfg.results_dir / "runs"
    deltas, states = bench_mod.collect_results(runs_root)
    written = bench_mod.write_results(deltas, states, cfg.results_dir)
    converged = sum(1 for o in outcomes if o["final_verdict"] == "converged")
    click.echo(f"matrix: {converged}/{len(outcomes)} cells converged; "
               f"{len(written)} result files under {cfg.results_dir}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--benchmark", required=True)
@click.option("--part", required=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--steps", type=int, default=500)
@click.option("--seed", type=int, default=0)
@click.option("--t0", type=float, default=1.0)
@click.option("--alpha", type=float, default=0.95)
@click.option("--results-dir", type=click.Path(), default=None)
def dse(benchmark, part, config_path, steps, seed, t0, alpha, results_dir):
    """Simulated-annealing pragma search against the analytical model."""
    try:
        cfg = load_config(config_path)
        if results_dir:
            cfg.results_dir = Path(results_dir)
        targets, _ = kb_mod.ingest(cfg.kb_dir)
        target = kb_mod.find_target(targets, part)
        benchmarks = bench_mod.load_manifest(cfg.bench_manifest)
        desc = bench_mod.find_benchmark(benchmarks, benchmark)
        model = load_model(desc.model_path)
    except (NotFound, ConfigError, ValidationError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    schedule = dse_mod.AnnealSchedule(t0=t0, alpha=alpha, steps=steps, seed=seed)
    best, best_qor, trace = dse_mod.anneal(model, target, schedule)
    out_dir = cfg.results_dir / "dse"
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{benchmark}_{part}.json"
    payload = {
        "benchmark_id": benchmark,
        "part": part,
        "schedule": {"t0": t0, "alpha": alpha, "steps": steps, "seed": seed},
        "best_config": {
            "pipeline": dict(sorted(best.pipeline.items())),
            "unroll": dict(sorted(best.unroll.items())),
            "partition": dict(sorted(best.partition.items())),
        },
        "best_qor": to_canonical_dict(best_qor),
        "trace": trace,
    }
    out_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(f"dse: best objective {trace and min(o for _, o in trace)}; wrote {out_path}")
    sys.exit(EXIT_OK)


@main.group()
def report() -> None:
    """Result-archive utilities."""


@report.command("render")
@click.option("--runs", "runs_dir", type=click.Path(), default=None,
              help="Runs tree (default: <results>/runs).")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output root (default: results).")
@click.option("--config", "config_path", type=click.Path(), default=None)
def report_render(runs_dir, out_dir, config_path):
    """Re-emit tables and the success matrix from existing run archives."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    runs_root = Path(runs_dir) if runs_dir else cfg.results_dir / "runs"
    out_root = Path(out_dir) if out_dir else cfg.results_dir
    if not runs_root.is_dir():
        click.echo(f"error: runs directory not found: {runs_root}", err=True)
        sys.exit(EXIT_USAGE)
    deltas, states = bench_mod.collect_results(runs_root)
    written = bench_mod.write_results(deltas, states, out_root)
    click.echo(f"rendered {len(deltas)} delta rows from {len(states)} runs; "
               f"{len(written)} files under {out_root}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
