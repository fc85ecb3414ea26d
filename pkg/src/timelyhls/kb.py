"""FPGA knowledge base: device records, optimization notes, and BM25 retrieval.

The knowledge base is a directory with a ``targets.json`` device list and a
``docs/`` folder of markdown notes (front-matter delimited by ``---`` lines).
Retrieval is plain BM25 (k1=1.2, b=0.75) over lowercased alphanumeric tokens,
with a hard device-family applicability filter applied before ranking.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, NotFound, ValidationError

BM25_K1 = 1.2
BM25_B = 0.75

TIERS = ("low_cost", "midrange", "high_end")

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class FpgaTarget:
    """One FPGA device record: identity, capacity, and a two-scalar speed model."""

    family: str
    part: str
    luts: int
    ffs: int
    dsps: int
    brams: int  # 18Kb-block equivalents
    default_clock_ns: float
    logic_delay_ns: float  # delay per logic level
    tier: str

    def validate(self) -> None:
        for name in ("luts", "ffs", "dsps", "brams"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"target {self.part!r}: {name} must be > 0")
        if self.default_clock_ns <= 0 or self.logic_delay_ns <= 0:
            raise ValidationError(f"target {self.part!r}: clock and logic delay must be > 0")
        if self.tier not in TIERS:
            raise ValidationError(f"target {self.part!r}: tier {self.tier!r} not one of {TIERS}")
        if not self.family:
            raise ValidationError(f"target {self.part!r}: family must be non-empty")

    def capacity(self, resource: str) -> int:
        return {"lut": self.luts, "ff": self.ffs, "dsp": self.dsps, "bram": self.brams}[resource]


DOC_KINDS = ("architecture_note", "pragma_template", "heuristic")


@dataclass(frozen=True)
class KnowledgeDoc:
    """A retrievable note: architecture fact, pragma template, or heuristic."""

    id: str
    kind: str
    applicable_families: tuple[str, ...]  # empty = applies to every family
    title: str
    body: str

    def applies_to(self, family: str) -> bool:
        return not self.applicable_families or family in self.applicable_families


@dataclass
class KbIndex:
    """Immutable-after-build BM25 index over a document corpus."""

    docs: list[KnowledgeDoc]
    term_stats: dict[str, int] = field(default_factory=dict)  # term -> document frequency
    doc_lengths: dict[str, int] = field(default_factory=dict)  # doc id -> token count
    avg_doc_length: float = 0.0
    postings: dict[str, dict[str, int]] = field(default_factory=dict)  # term -> {doc id -> tf}

    def doc_by_id(self, doc_id: str) -> KnowledgeDoc:
        for doc in self.docs:
            if doc.id == doc_id:
                return doc
        raise NotFound(f"doc id {doc_id!r} not in index")

    def canonical_json(self) -> str:
        """Stable serialization used to check ingest determinism."""
        payload = {
            "docs": [
                {
                    "id": d.id,
                    "kind": d.kind,
                    "families": list(d.applicable_families),
                    "title": d.title,
                    "body": d.body,
                }
                for d in self.docs
            ],
            "term_stats": self.term_stats,
            "doc_lengths": self.doc_lengths,
            "avg_doc_length": self.avg_doc_length,
        }
        return json.dumps(payload, sort_keys=True, indent=1)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters, dropping empties."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def build_index(docs: list[KnowledgeDoc]) -> KbIndex:
    docs = sorted(docs, key=lambda d: d.id)
    postings: dict[str, dict[str, int]] = {}
    doc_lengths: dict[str, int] = {}
    for doc in docs:
        terms = tokenize(doc.title + " " + doc.body)
        doc_lengths[doc.id] = len(terms)
        for term in terms:
            postings.setdefault(term, {})
            postings[term][doc.id] = postings[term].get(doc.id, 0) + 1
    postings = {t: dict(sorted(m.items())) for t, m in sorted(postings.items())}
    term_stats = {t: len(m) for t, m in postings.items()}
    avg = sum(doc_lengths.values()) / len(docs) if docs else 0.0
    return KbIndex(
        docs=docs,
        term_stats=term_stats,
        doc_lengths=doc_lengths,
        avg_doc_length=avg,
        postings=postings,
    )


def bm25_score(index: KbIndex, query_terms: list[str], doc_id: str) -> float:
    """BM25 score of one document for a tokenized query.

    Uses the non-negative idf variant ln(1 + (N - df + 0.5)/(df + 0.5)) so
    scores never go below zero even for terms present in most documents.
    """
    if doc_id not in index.doc_lengths:
        raise NotFound(f"doc id {doc_id!r} not in index")
    n_docs = len(index.docs)
    dl = index.doc_lengths[doc_id]
    score = 0.0
    for term in query_terms:
        tf = index.postings.get(term, {}).get(doc_id, 0)
        if tf == 0:
            continue
        df = index.term_stats[term]
        idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
        denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / index.avg_doc_length)
        score += idf * tf * (BM25_K1 + 1.0) / denom
    return score


def retrieve(index: KbIndex, query: str, target: FpgaTarget, k: int) -> list[KnowledgeDoc]:
    """Top-k docs applicable to the target family, ranked by BM25.

    Ties break on ascending doc id so results are fully deterministic.
    """
    if k < 1:
        from .errors import ContractError

        raise ContractError(f"retrieve requires k >= 1, got {k}")
    terms = tokenize(query)
    candidates = [d for d in index.docs if d.applies_to(target.family)]
    scored = [(bm25_score(index, terms, d.id), d) for d in candidates]
    scored.sort(key=lambda pair: (-pair[0], pair[1].id))
    return [d for _, d in scored[:k]]


_FRONT_MATTER_KEY = re.compile(r"^([a-z_]+)\s*:\s*(.*)$")


def _parse_doc_file(path: Path) -> KnowledgeDoc:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "---":
        raise ValidationError(f"{path.name}: missing front-matter opening '---'")
    meta: dict[str, str] = {}
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        if line.strip() == "---":
            body_start = i + 1
            break
        m = _FRONT_MATTER_KEY.match(line.strip())
        if not m:
            raise ValidationError(f"{path.name}: malformed front-matter line {i + 1}: {line!r}")
        meta[m.group(1)] = m.group(2).strip()
    if body_start is None:
        raise ValidationError(f"{path.name}: front-matter never closed with '---'")
    for required in ("id", "kind", "title"):
        if not meta.get(required):
            raise ValidationError(f"{path.name}: front-matter missing {required!r}")
    if meta["kind"] not in DOC_KINDS:
        raise ValidationError(f"{path.name}: kind {meta['kind']!r} not one of {DOC_KINDS}")
    families = tuple(f.strip() for f in meta.get("families", "").split(",") if f.strip())
    body = "\n".join(lines[body_start:]).strip()
    if not body:
        raise ValidationError(f"{path.name}: document body is empty")
    return KnowledgeDoc(
        id=meta["id"],
        kind=meta["kind"],
        applicable_families=families,
        title=meta["title"],
        body=body,
    )


def load_targets(path: Path) -> list[FpgaTarget]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path.name}: invalid JSON: {exc}") from exc
    targets: list[FpgaTarget] = []
    seen: dict[str, int] = {}
    for i, entry in enumerate(raw):
        try:
            target = FpgaTarget(
                family=entry["family"],
                part=entry["part"],
                luts=int(entry["luts"]),
                ffs=int(entry["ffs"]),
                dsps=int(entry["dsps"]),
                brams=int(entry["brams"]),
                default_clock_ns=float(entry["default_clock_ns"]),
                logic_delay_ns=float(entry["logic_delay_ns"]),
                tier=entry["tier"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path.name}: entry {i}: {exc}") from exc
        target.validate()
        if target.part in seen:
            raise ValidationError(
                f"{path.name}: duplicate part {target.part!r} (entries {seen[target.part]} and {i})"
            )
        seen[target.part] = i
        targets.append(target)
    return targets


def ingest(kb_dir: str | Path) -> tuple[list[FpgaTarget], KbIndex]:
    """Load a knowledge-base directory into device records and a search index.

    Deterministic: identical directory contents produce an identical index
    (doc files are read in sorted name order).
    """
    kb_path = Path(kb_dir)
    if not kb_path.is_dir():
        raise ConfigError(f"knowledge base directory not found: {kb_path}")
    targets_file = kb_path / "targets.json"
    if not targets_file.is_file():
        raise ConfigError(f"missing targets file: {targets_file}")
    docs_dir = kb_path / "docs"
    if not docs_dir.is_dir():
        raise ConfigError(f"missing docs directory: {docs_dir}")

    targets = load_targets(targets_file)

    docs: list[KnowledgeDoc] = []
    seen_ids: dict[str, str] = {}
    for doc_path in sorted(docs_dir.glob("*.md")):
        doc = _parse_doc_file(doc_path)
        if doc.id in seen_ids:
            raise ValidationError(
                f"duplicate doc id {doc.id!r} in {doc_path.name} (already in {seen_ids[doc.id]})"
            )
        seen_ids[doc.id] = doc_path.name
        docs.append(doc)

    return targets, build_index(docs)


def find_target(targets: list[FpgaTarget], part: str) -> FpgaTarget:
    for t in targets:
        if t.part == part:
            return t
    raise NotFound(f"part {part!r} not in knowledge base")
