"""Two-stage iterative refinement: generate, verify at the HLS level,
verify at the RTL level, digest failures, regenerate.

Each iteration runs the phases hls_synth -> c_sim -> rtl_synth -> rtl_sim
and short-circuits to feedback on the first failure (a resource overflow
counts as a failure even though synthesis nominally succeeds). The run
converges when every phase passes, RTL slack is non-negative, and nothing
overflowed; otherwise it stops at the iteration cap. Every iteration is
persisted to the run archive before the next one starts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import kb as kb_mod
from . import llm
from .bench import BenchmarkDescriptor
from .errors import BackendError, ExtractionError, TimelyHlsError, ToolMissing, ToolTimeout
from .hls_source import SourceUnit, strip_pragmas
from .kb import FpgaTarget, KbIndex
from .llm import GenerationBackend, PromptBundle
from .reports import canonical_save
from .toolchain import PHASES, SYNTH_PHASES, SynthesisOutcome, Toolchain

log = logging.getLogger(__name__)

STATE_SCHEMA_VERSION = 1

DIGEST_KINDS = (
    "syntax_error",
    "resource_binding",
    "pipeline_violation",
    "functional_mismatch",
    "timing_violation",
    "critical_path",
    "resource_overflow",
)

# keyword-classified kinds; timing_violation and resource_overflow are
# derived from the QoR itself, not from log text
DEFAULT_DIGEST_KEYWORDS: dict[str, tuple[str, ...]] = {
    "syntax_error": ("error:",),
    "resource_binding": ("resource binding",),
    "pipeline_violation": ("pipeline violation",),
    "functional_mismatch": ("functional mismatch",),
    "critical_path": ("critical path:",),
}


@dataclass(frozen=True)
class RefinementConfig:
    max_iterations: int = 10
    k_docs: int = 4
    clock_ns: float | None = None  # None: use the target's default clock
    stage_order: tuple[str, ...] = PHASES
    log_excerpt_lines: int = 40
    query_template: str = llm.DEFAULT_QUERY_TEMPLATE
    digest_keywords: dict = field(default_factory=lambda: dict(DEFAULT_DIGEST_KEYWORDS))
    compute_baseline: bool = True

    def validate(self) -> None:
        from .errors import ValidationError

        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")


@dataclass(frozen=True)
class DigestEntry:
    kind: str
    excerpt: str


@dataclass(frozen=True)
class FeedbackDigest:
    origin: str  # "hls_stage" | "rtl_stage"
    categories: tuple[DigestEntry, ...]


@dataclass
class IterationRecord:
    index: int
    prompt: PromptBundle
    generated_source: str
    outcomes: dict[str, SynthesisOutcome]
    digest: FeedbackDigest | None
    verdict: str  # "converged" | "continue" | "budget_exhausted"


@dataclass
class RunState:
    benchmark_id: str
    target: FpgaTarget
    clock_ns: float
    iterations: list[IterationRecord] = field(default_factory=list)
    final_verdict: str = "running"
    abort_reason: str | None = None


# ---------------------------------------------------------------------------
# Convergence and feedback


def evaluate_convergence(outcomes: dict[str, SynthesisOutcome]) -> str:
    """"converged" only when every phase passed, RTL slack is >= 0, and no
    synthesis phase flagged a resource overflow; otherwise "continue"."""
    for phase in PHASES:
        out = outcomes.get(phase)
        if out is None or not out.ok:
            return "continue"
    for phase in SYNTH_PHASES:
        qor = outcomes[phase].qor
        if qor is None or qor.resources.overflow:
            return "continue"
    rtl_qor = outcomes["rtl_synth"].qor
    if rtl_qor.timing.wns_ns < 0:
        return "continue"
    return "converged"


def _tail(lines: list[str], limit: int) -> str:
    return "\n".join(lines[-limit:])


def build_digest(outcome: SynthesisOutcome, cfg: RefinementConfig) -> FeedbackDigest:
    """Classify a failing outcome's log into categorized excerpts.

    Keyword rules are data (cfg.digest_keywords); negative slack and
    overflow flags come straight from the attached QoR. An outcome that
    matches nothing degrades to a syntax_error entry with the raw log
    tail so the generator always receives actionable text.
    """
    lines = outcome.log.split("\n")
    limit = cfg.log_excerpt_lines
    entries: list[DigestEntry] = []
    for kind, keywords in cfg.digest_keywords.items():
        matching = [ln for ln in lines if any(kw in ln for kw in keywords)]
        if matching:
            entries.append(DigestEntry(kind=kind, excerpt=_tail(matching, limit)))
    qor = outcome.qor
    if qor is not None and qor.timing.wns_ns < 0:
        wns_lines = [ln for ln in lines if "WNS" in ln]
        excerpt = _tail(wns_lines, limit) if wns_lines else f"WNS(ns): {qor.timing.wns_ns:.2f}"
        entries.append(DigestEntry(kind="timing_violation", excerpt=excerpt))
    if qor is not None and qor.resources.overflow:
        ov_lines = [ln for ln in lines if "overflow" in ln]
        excerpt = (
            _tail(ov_lines, limit)
            if ov_lines
            else "resource overflow: " + ", ".join(sorted(qor.resources.overflow))
        )
        entries.append(DigestEntry(kind="resource_overflow", excerpt=excerpt))
    if not entries:
        tail_lines = [ln for ln in lines if ln.strip()]
        entries.append(DigestEntry(kind="syntax_error", excerpt=_tail(tail_lines, limit) or "(empty log)"))
    origin = "hls_stage" if outcome.phase in ("hls_synth", "c_sim") else "rtl_stage"
    return FeedbackDigest(origin=origin, categories=tuple(entries))


# ---------------------------------------------------------------------------
# Persistence


def _phase_summary(out: SynthesisOutcome) -> dict:
    summary: dict = {"ok": out.ok}
    if out.qor is not None:
        summary["latency_cycles"] = out.qor.latency_cycles
        summary["wns_ns"] = out.qor.timing.wns_ns
        summary["overflow"] = sorted(out.qor.resources.overflow)
    return summary


def state_to_dict(state: RunState) -> dict:
    return {
        "schema_version": STATE_SCHEMA_VERSION,
        "benchmark_id": state.benchmark_id,
        "part": state.target.part,
        "family": state.target.family,
        "clock_ns": state.clock_ns,
        "final_verdict": state.final_verdict,
        "abort_reason": state.abort_reason,
        "iterations": [
            {
                "index": rec.index,
                "stage": rec.prompt.stage,
                "verdict": rec.verdict,
                "phases": {p: _phase_summary(o) for p, o in rec.outcomes.items()},
                "digest_categories": (
                    [e.kind for e in rec.digest.categories] if rec.digest else None
                ),
            }
            for rec in state.iterations
        ],
    }


def _persist_state(state: RunState, run_dir: Path) -> None:
    (run_dir / "state.json").write_text(
        json.dumps(state_to_dict(state), indent=2) + "\n", encoding="utf-8"
    )


def _persist_iteration(rec: IterationRecord, iter_dir: Path) -> None:
    (iter_dir / "kernel.cpp").write_text(rec.generated_source, encoding="utf-8")
    log_parts = []
    for phase, out in rec.outcomes.items():
        log_parts.append(f"===== {phase} =====")
        log_parts.append(out.log.rstrip("\n"))
        if out.qor is not None:
            canonical_save(out.qor, iter_dir / f"{phase}_qor.json")
    (iter_dir / "log.txt").write_text("\n".join(log_parts) + "\n", encoding="utf-8")
    if rec.digest is not None:
        digest_dict = {
            "origin": rec.digest.origin,
            "categories": [
                {"kind": e.kind, "excerpt": e.excerpt} for e in rec.digest.categories
            ],
        }
        (iter_dir / "digest.json").write_text(
            json.dumps(digest_dict, indent=2) + "\n", encoding="utf-8"
        )
    (iter_dir / "verdict.txt").write_text(rec.verdict + "\n", encoding="utf-8")


def _write_prompt(prompt: PromptBundle, iter_dir: Path) -> None:
    text = (
        f"=== SYSTEM ===\n{prompt.system}\n\n"
        f"=== USER [{prompt.stage}] ===\n{prompt.user}\n\n"
        f"=== CONTEXT DOCS ===\n{', '.join(prompt.context_docs) or '(none)'}\n"
    )
    (iter_dir / "prompt.txt").write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# The refinement loop


@dataclass
class RunBackends:
    """Everything a single refinement run talks to."""

    generator: GenerationBackend
    toolchain: Toolchain
    index: KbIndex | None = None


def run_refinement(
    benchmark: BenchmarkDescriptor,
    target: FpgaTarget,
    cfg: RefinementConfig,
    backends: RunBackends,
    archive_dir: str | Path,
) -> RunState:
    """Drive one benchmark on one target until convergence or budget.

    Backend and tool errors (missing tool, exhausted script, transport
    failure) abort the run; the partial state is persisted and returned
    with final_verdict "aborted" rather than raised, so matrix drivers can
    record the cell and move on.
    """
    cfg.validate()
    run_dir = Path(archive_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    clock_ns = cfg.clock_ns if cfg.clock_ns is not None else target.default_clock_ns
    state = RunState(benchmark_id=benchmark.id, target=target, clock_ns=clock_ns)

    kernel = SourceUnit.from_text(benchmark.source_text(), path=str(benchmark.source_path))

    if cfg.compute_baseline:
        _write_baseline(kernel, backends.toolchain, run_dir)

    objective = (
        f"Optimize the '{benchmark.title}' kernel for timing closure and latency on "
        f"{target.family} ({target.part}). Known challenge: {benchmark.challenge}"
    )
    docs = []
    if backends.index is not None:
        query = cfg.query_template.format(
            objective=objective, family=target.family, part=target.part
        )
        docs = kb_mod.retrieve(backends.index, query, target, cfg.k_docs)
    prompt = llm.build_initial_prompt(kernel, objective, target, docs)

    for index in range(1, cfg.max_iterations + 1):
        iter_dir = run_dir / f"iter_{index}"
        iter_dir.mkdir(exist_ok=True)
        _write_prompt(prompt, iter_dir)

        try:
            result = backends.generator.generate(prompt)
        except (BackendError, ExtractionError) as exc:
            return _abort(state, run_dir, f"generation failed at iteration {index}: {exc}")

        outcomes: dict[str, SynthesisOutcome] = {}
        failing: SynthesisOutcome | None = None
        try:
            for phase in cfg.stage_order:
                out = backends.toolchain.run_phase(phase, result.code, iter_dir)
                outcomes[phase] = out
                if not out.ok or (out.qor is not None and out.qor.resources.overflow):
                    failing = out
                    break
        except (ToolMissing, ToolTimeout) as exc:
            rec = IterationRecord(index, prompt, result.code, outcomes, None, "continue")
            _persist_iteration(rec, iter_dir)
            state.iterations.append(rec)
            return _abort(state, run_dir, f"toolchain failed at iteration {index}: {exc}")

        verdict = "converged" if failing is None and evaluate_convergence(outcomes) == "converged" else "continue"
        digest = None
        if verdict != "converged":
            source_outcome = failing if failing is not None else outcomes["rtl_synth"]
            digest = build_digest(source_outcome, cfg)
            if index == cfg.max_iterations:
                verdict = "budget_exhausted"

        rec = IterationRecord(
            index=index,
            prompt=prompt,
            generated_source=result.code,
            outcomes=outcomes,
            digest=digest,
            verdict=verdict,
        )
        _persist_iteration(rec, iter_dir)
        state.iterations.append(rec)
        state.final_verdict = verdict if verdict != "continue" else "running"
        _persist_state(state, run_dir)

        if verdict in ("converged", "budget_exhausted"):
            return state
        prompt = llm.build_feedback_prompt(prompt, result.code, digest)

    return state  # unreachable: the cap iteration always returns above


def _write_baseline(kernel: SourceUnit, toolchain: Toolchain, run_dir: Path) -> None:
    """Synthesize the pragma-stripped kernel once for delta reporting."""
    stripped = strip_pragmas(kernel)
    base_dir = run_dir / "baseline"
    base_dir.mkdir(exist_ok=True)
    try:
        out = toolchain.run_phase("rtl_synth", stripped.text, base_dir)
    except TimelyHlsError as exc:
        log.warning("baseline synthesis failed: %s", exc)
        return
    if out.ok and out.qor is not None:
        canonical_save(out.qor, run_dir / "base_qor.json")
    else:
        log.warning("baseline synthesis did not produce a report")


def _abort(state: RunState, run_dir: Path, reason: str) -> RunState:
    log.warning("run aborted: %s", reason)
    state.final_verdict = "aborted"
    state.abort_reason = reason
    _persist_state(state, run_dir)
    return state
