"""Shared fixtures: bundled data handles, tuned targets, random generators."""

from __future__ import annotations

import math
import random
from pathlib import Path

import pytest

import timelyhls
from timelyhls import bench, kb
from timelyhls.hls_source import PragmaDirective, PragmaKind
from timelyhls.kb import FpgaTarget
from timelyhls.reports import LoopMetric, QoRReport, ResourceUsage, TimingSummary
from timelyhls.toolchain import ArraySpec, KernelModel, LoopDescriptor

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def bundled_kb():
    return kb.ingest(timelyhls.data_path("kb"))


@pytest.fixture(scope="session")
def benchmarks():
    return bench.load_manifest(bench.bundled_manifest_path())


def make_target(**overrides) -> FpgaTarget:
    base = dict(
        family="Artix-7",
        part="xc7test",
        luts=10**6,
        ffs=10**6,
        dsps=10**4,
        brams=10**4,
        default_clock_ns=10.0,
        logic_delay_ns=1.0,
        tier="midrange",
    )
    base.update(overrides)
    return FpgaTarget(**base)


@pytest.fixture
def roomy_target():
    return make_target()


@pytest.fixture
def slack_target():
    """Tuned so an unpragma'd multiply loop lands at exactly WNS -0.08 and
    a pipelined one at +0.10 (6 vs 4 logic levels)."""
    return make_target(part="xc7tuned", default_clock_ns=0.46, logic_delay_ns=0.09)


# ---------------------------------------------------------------------------
# Random generators (seeded, deterministic)

_PARTITION_TYPES = ("cyclic", "block", "complete")
_IDENTS = ("buf", "weights", "acc_mem", "x0", "tile", "stream_in")
_MODES = ("m_axi", "s_axilite", "ap_memory", "bram")


def random_directive(rng: random.Random) -> PragmaDirective:
    kind = rng.choice(list(PragmaKind))
    if kind is PragmaKind.PIPELINE:
        return PragmaDirective(kind=kind, ii=rng.choice([None, 1, 2, 4, 8, 16]))
    if kind is PragmaKind.UNROLL:
        return PragmaDirective(kind=kind, factor=rng.choice([None, 1, 2, 4, 8, 32]))
    if kind is PragmaKind.ARRAY_PARTITION:
        return PragmaDirective(
            kind=kind,
            variable=rng.choice(_IDENTS),
            partition_type=rng.choice([None, *_PARTITION_TYPES]),
            factor=rng.choice([None, 2, 4, 16]),
            dim=rng.choice([None, 0, 1, 2]),
        )
    if kind is PragmaKind.INTERFACE:
        return PragmaDirective(
            kind=kind,
            mode=rng.choice([None, *_MODES]),
            variable=rng.choice([None, *_IDENTS]),
        )
    return PragmaDirective(kind=kind)  # DATAFLOW / INLINE


def random_qor(rng: random.Random) -> QoRReport:
    wns = round(rng.uniform(-5, 5), 2)
    n_loops = rng.randint(0, 4)
    loops = []
    for i in range(n_loops):
        pipelined = rng.random() < 0.5
        loops.append(
            LoopMetric(
                loop_label=f"L{i}",
                ii=rng.randint(1, 16) if pipelined else None,
                depth=rng.randint(1, 40),
                pipelined=pipelined,
            )
        )
    overflow = frozenset(
        name for name in ("ff", "lut", "dsp", "bram") if rng.random() < 0.15
    )
    return QoRReport(
        latency_cycles=rng.randint(0, 10**6),
        timing=TimingSummary.from_wns(wns, min(0.0, wns) * max(1, n_loops), round(rng.uniform(1, 20), 2)),
        resources=ResourceUsage(
            ff=rng.randint(0, 10**5),
            lut=rng.randint(0, 10**5),
            dsp=rng.randint(0, 2000),
            bram=rng.randint(0, 500),
            overflow=overflow,
        ),
        loops=tuple(loops),
        source_phase=rng.choice(("hls_synth", "rtl_synth", "simulated")),
    )


def random_model(rng: random.Random) -> KernelModel:
    depth = rng.randint(1, 3)
    loop = None
    for level in range(depth, 0, -1):
        trip = rng.randint(1, 32)
        ops = {
            "mul": rng.randint(0, 2),
            "add": rng.randint(0, 3),
            "load": rng.randint(0, 3),
            "store": rng.randint(0, 2),
        }
        unroll = rng.choice([1, 1, 2, 4, 8])
        pipeline_ii = rng.choice([None, None, 1, 2, 4])
        loop = LoopDescriptor(
            label=f"L{level}",
            trip_count=trip,
            op_counts=ops,
            carried_dependence_distance=rng.randint(0, 4),
            child=loop,
            pipeline_ii=pipeline_ii,
            unroll_factor=unroll,
        )
    arrays = tuple(
        ArraySpec(
            name=f"arr{i}",
            elements=rng.randint(16, 2048),
            accesses_per_iteration=rng.randint(0, 4),
            partition_factor=rng.choice([1, 1, 2, 4, 8]),
        )
        for i in range(rng.randint(0, 3))
    )
    bits = rng.choice([8, 16, 18, 32, 48])
    return KernelModel(root=loop, arrays=arrays, datapath_bits=bits)


def bm25_reference(
    doc_tokens: dict[str, list[str]],
    query_terms: list[str],
    doc_id: str,
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    """Straight-off-the-formula BM25, independent of the index structure."""
    n = len(doc_tokens)
    avgdl = sum(len(t) for t in doc_tokens.values()) / n if n else 0.0
    tokens = doc_tokens[doc_id]
    score = 0.0
    for term in query_terms:
        tf = tokens.count(term)
        if tf == 0:
            continue
        df = sum(1 for t in doc_tokens.values() if term in t)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(tokens) / avgdl))
    return score
