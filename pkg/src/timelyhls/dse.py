"""Simulated-annealing baseline over the pragma configuration space.

Searches per-loop pipeline/unroll settings and per-array partition factors
against the analytical simulator, as a non-generative point of comparison
for the refinement loop. Factor ladders are powers of two up to the trip
count (or element count) plus the full value itself, which is the slice of
the space HLS practice actually uses.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from itertools import product

from .errors import ValidationError
from .kb import FpgaTarget
from .reports import QoRReport
from .toolchain import KernelModel, simulate

PENALTY = 10**6


def factor_ladder(full: int) -> tuple[int, ...]:
    """1, 2, 4, ... capped by the full (complete) value, which is included."""
    steps = [1]
    while steps[-1] * 2 < full:
        steps.append(steps[-1] * 2)
    if full > 1:
        steps.append(full)
    return tuple(steps)


@dataclass(frozen=True)
class PragmaConfig:
    """One point of the search space: per-loop and per-array settings."""

    pipeline: dict  # loop label -> bool
    unroll: dict  # loop label -> factor
    partition: dict  # array name -> factor

    def key(self) -> tuple:
        return (
            tuple(sorted(self.pipeline.items())),
            tuple(sorted(self.unroll.items())),
            tuple(sorted(self.partition.items())),
        )


@dataclass(frozen=True)
class ConfigSpace:
    """Mutable dimensions the search may touch, with their ladders.

    Restricting a space (fewer loops, shorter ladders) keeps brute-force
    enumeration tractable for oracle comparisons.
    """

    pipeline_loops: tuple[str, ...]
    unroll_ladders: dict  # loop label -> tuple of factors
    partition_ladders: dict  # array name -> tuple of factors

    @classmethod
    def for_model(cls, model: KernelModel) -> "ConfigSpace":
        return cls(
            pipeline_loops=tuple(l.label for l in model.loops()),
            unroll_ladders={l.label: factor_ladder(l.trip_count) for l in model.loops()},
            partition_ladders={a.name: factor_ladder(a.elements) for a in model.arrays},
        )

    def initial(self) -> PragmaConfig:
        return PragmaConfig(
            pipeline={label: False for label in self.pipeline_loops},
            unroll={label: ladder[0] for label, ladder in self.unroll_ladders.items()},
            partition={name: ladder[0] for name, ladder in self.partition_ladders.items()},
        )

    def size(self) -> int:
        n = 1
        for _ in self.pipeline_loops:
            n *= 2
        for ladder in self.unroll_ladders.values():
            n *= len(ladder)
        for ladder in self.partition_ladders.values():
            n *= len(ladder)
        return n

    def points(self):
        """Every configuration, in deterministic order."""
        pipe_labels = list(self.pipeline_loops)
        unroll_labels = sorted(self.unroll_ladders)
        part_names = sorted(self.partition_ladders)
        axes = [(False, True)] * len(pipe_labels)
        axes += [self.unroll_ladders[l] for l in unroll_labels]
        axes += [self.partition_ladders[n] for n in part_names]
        for values in product(*axes):
            i = 0
            pipeline = {}
            for label in pipe_labels:
                pipeline[label] = values[i]
                i += 1
            unroll = {}
            for label in unroll_labels:
                unroll[label] = values[i]
                i += 1
            partition = {}
            for name in part_names:
                partition[name] = values[i]
                i += 1
            yield PragmaConfig(pipeline=pipeline, unroll=unroll, partition=partition)


@dataclass(frozen=True)
class AnnealSchedule:
    t0: float = 1.0
    alpha: float = 0.95
    steps: int = 500
    seed: int = 0

    def validate(self) -> None:
        if self.t0 <= 0:
            raise ValidationError("t0 must be > 0")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must be in (0, 1)")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")


def apply_config(model: KernelModel, cfg: PragmaConfig) -> KernelModel:
    def rebuild(loop):
        return replace(
            loop,
            pipeline_ii=1 if cfg.pipeline.get(loop.label, False) else None,
            unroll_factor=cfg.unroll.get(loop.label, loop.unroll_factor),
            child=rebuild(loop.child) if loop.child else None,
        )

    arrays = tuple(
        replace(a, partition_factor=cfg.partition.get(a.name, a.partition_factor))
        for a in model.arrays
    )
    return KernelModel(root=rebuild(model.root), arrays=arrays, datapath_bits=model.datapath_bits)


def objective(qor: QoRReport, clock_ns: float | None = None) -> float:
    """Latency plus 10^6 per violated constraint; lower is better.

    Violations: negative slack counts once, and each overflowed resource
    counts once. The penalty magnitude dominates any realistic latency so
    the search prefers any feasible design over any infeasible one, while
    infeasible regions stay traversable.
    """
    violations = (1 if qor.timing.wns_ns < 0 else 0) + len(qor.resources.overflow)
    return float(qor.latency_cycles) + PENALTY * violations


def _mutable_dims(space: ConfigSpace) -> list[tuple]:
    dims: list[tuple] = [("pipeline", label) for label in space.pipeline_loops]
    dims += [
        ("unroll", label)
        for label in sorted(space.unroll_ladders)
        if len(space.unroll_ladders[label]) > 1
    ]
    dims += [
        ("partition", name)
        for name in sorted(space.partition_ladders)
        if len(space.partition_ladders[name]) > 1
    ]
    return dims


def neighbor(cfg: PragmaConfig, rng: random.Random, space: ConfigSpace) -> PragmaConfig:
    """A configuration differing from cfg in exactly one field.

    Ladder-valued fields move one rung up or down; at a ladder end only
    the inward step is possible.
    """
    dims = _mutable_dims(space)
    kind, name = dims[rng.randrange(len(dims))]
    pipeline = dict(cfg.pipeline)
    unroll = dict(cfg.unroll)
    partition = dict(cfg.partition)
    if kind == "pipeline":
        pipeline[name] = not pipeline[name]
    else:
        ladder = space.unroll_ladders[name] if kind == "unroll" else space.partition_ladders[name]
        current = unroll[name] if kind == "unroll" else partition[name]
        pos = ladder.index(current)
        if pos == 0:
            pos = 1
        elif pos == len(ladder) - 1:
            pos -= 1
        else:
            pos += 1 if rng.random() < 0.5 else -1
        if kind == "unroll":
            unroll[name] = ladder[pos]
        else:
            partition[name] = ladder[pos]
    return PragmaConfig(pipeline=pipeline, unroll=unroll, partition=partition)


def anneal(
    model: KernelModel,
    target: FpgaTarget,
    schedule: AnnealSchedule,
    space: ConfigSpace | None = None,
    clock_ns: float | None = None,
) -> tuple[PragmaConfig, QoRReport, list[tuple[int, float]]]:
    """Metropolis annealing; returns (best config, its QoR, trace).

    The trace holds (step, current objective) pairs starting at step 0;
    runs are deterministic per seed. Objective evaluations are memoized,
    so revisiting configurations costs a dict lookup.
    """
    schedule.validate()
    if space is None:
        space = ConfigSpace.for_model(model)
    clock = clock_ns if clock_ns is not None else target.default_clock_ns
    rng = random.Random(schedule.seed)

    memo: dict[tuple, tuple[float, QoRReport]] = {}

    def evaluate(cfg: PragmaConfig) -> tuple[float, QoRReport]:
        key = cfg.key()
        if key not in memo:
            qor = simulate(apply_config(model, cfg), target, clock)
            memo[key] = (objective(qor, clock), qor)
        return memo[key]

    current = space.initial()
    current_obj, current_qor = evaluate(current)
    best, best_obj, best_qor = current, current_obj, current_qor
    trace: list[tuple[int, float]] = [(0, current_obj)]
    temperature = schedule.t0
    for step in range(1, schedule.steps + 1):
        candidate = neighbor(current, rng, space)
        cand_obj, cand_qor = evaluate(candidate)
        delta = cand_obj - current_obj
        if delta <= 0 or rng.random() < math.exp(-delta / temperature):
            current, current_obj, current_qor = candidate, cand_obj, cand_qor
        if current_obj < best_obj:
            best, best_obj, best_qor = current, current_obj, current_qor
        trace.append((step, current_obj))
        temperature *= schedule.alpha
    return best, best_qor, trace


def brute_force(
    model: KernelModel,
    target: FpgaTarget,
    space: ConfigSpace,
    clock_ns: float | None = None,
) -> tuple[PragmaConfig, float]:
    """Exhaustive optimum over a (small) space; the oracle for anneal."""
    clock = clock_ns if clock_ns is not None else target.default_clock_ns
    best_cfg = None
    best_obj = math.inf
    for cfg in space.points():
        qor = simulate(apply_config(model, cfg), target, clock)
        obj = objective(qor, clock)
        if obj < best_obj:
            best_cfg, best_obj = cfg, obj
    return best_cfg, best_obj
