"""Pragma-level manipulation of HLS C/C++ sources.

Parses `#pragma HLS` directives, strips and injects them, and locates
insertion anchors (function and loop body starts) by lexical token
scanning. No C parsing is attempted beyond comment/string-aware brace
tracking; that is enough for pragma placement and fails loudly on
imbalanced sources.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ConflictError, ParseError

log = logging.getLogger(__name__)


class PragmaKind(str, Enum):
    PIPELINE = "PIPELINE"
    UNROLL = "UNROLL"
    ARRAY_PARTITION = "ARRAY_PARTITION"
    DATAFLOW = "DATAFLOW"
    INTERFACE = "INTERFACE"
    INLINE = "INLINE"


PARTITION_TYPES = ("cyclic", "block", "complete")


@dataclass(frozen=True)
class PragmaDirective:
    """One parsed HLS synthesis directive.

    Fields that do not apply to the kind stay None; `source_line` is the
    1-based line the directive sits on (1 for freestanding lines).
    """

    kind: PragmaKind
    ii: int | None = None  # PIPELINE
    factor: int | None = None  # UNROLL, ARRAY_PARTITION
    variable: str | None = None  # ARRAY_PARTITION, INTERFACE
    partition_type: str | None = None  # ARRAY_PARTITION
    dim: int | None = None  # ARRAY_PARTITION
    mode: str | None = None  # INTERFACE
    source_line: int = 1

    def same_params(self, other: "PragmaDirective") -> bool:
        """Field-for-field equality ignoring source position."""
        return replace(self, source_line=1) == replace(other, source_line=1)


@dataclass(frozen=True)
class PragmaStyle:
    """Key spellings used when rendering a directive back to text.

    Defaults to the Vitis HLS surface syntax; other toolchains can swap
    the spellings without touching the parser.
    """

    ii_key: str = "II"
    factor_key: str = "factor"
    variable_key: str = "variable"
    type_key: str = "type"
    dim_key: str = "dim"
    mode_key: str = "mode"
    port_key: str = "port"


VITIS_STYLE = PragmaStyle()


@dataclass(frozen=True)
class AnchorPoint:
    """A place where a directive can be inserted.

    `line` is the 1-based line holding the body's opening brace and
    `end_line` the line of the matching closing brace.
    """

    kind: str  # "function_body_start" | "loop_body_start"
    label: str
    line: int
    nesting_depth: int
    end_line: int = 0


@dataclass(frozen=True)
class SourceUnit:
    """An HLS source file with its parsed pragmas and anchors."""

    path: str
    text: str
    pragmas: tuple[PragmaDirective, ...]
    anchors: tuple[AnchorPoint, ...]

    @classmethod
    def from_text(cls, text: str, path: str = "<memory>") -> "SourceUnit":
        pragmas = tuple(sorted(parse_pragmas(text), key=lambda p: p.source_line))
        anchors = tuple(find_anchors(text))
        return cls(path=path, text=text, pragmas=pragmas, anchors=anchors)

    @classmethod
    def from_file(cls, path) -> "SourceUnit":
        from pathlib import Path

        p = Path(path)
        return cls.from_text(p.read_text(encoding="utf-8"), path=str(p))


# ---------------------------------------------------------------------------
# Pragma parsing and serialization

_PRAGMA_LINE = re.compile(r"^\s*#\s*pragma\s+hls\b(.*)$", re.IGNORECASE)
_IDENT = re.compile(r"^[A-Za-z_]\w*$")

# per kind: key name (lowercased) -> directive field
_KIND_KEYS: dict[PragmaKind, dict[str, str]] = {
    PragmaKind.PIPELINE: {"ii": "ii"},
    PragmaKind.UNROLL: {"factor": "factor"},
    PragmaKind.ARRAY_PARTITION: {
        "variable": "variable",
        "type": "partition_type",
        "factor": "factor",
        "dim": "dim",
    },
    PragmaKind.DATAFLOW: {},
    PragmaKind.INTERFACE: {"mode": "mode", "port": "variable", "variable": "variable"},
    PragmaKind.INLINE: {},
}

_INT_FIELDS = {"ii", "factor", "dim"}


def _parse_int(token: str, value: str, line_no: int, minimum: int) -> int:
    if not value.isdigit():
        raise ParseError(f"line {line_no}: malformed pragma value in {token!r}")
    parsed = int(value)
    if parsed < minimum:
        raise ParseError(f"line {line_no}: value out of range in {token!r} (min {minimum})")
    return parsed


def parse_pragma_line(line: str, line_no: int = 1) -> PragmaDirective | None:
    """Parse one line; None when it is not a recognized HLS directive.

    Unknown directive kinds are skipped with a warning, never an error;
    malformed values on known kinds raise ParseError.
    """
    m = _PRAGMA_LINE.match(line.rstrip("\r"))
    if not m:
        return None
    tokens = m.group(1).split()
    if not tokens:
        log.warning("line %d: empty HLS pragma skipped", line_no)
        return None
    kind_token = tokens[0]
    try:
        kind = PragmaKind(kind_token.upper())
    except ValueError:
        log.warning("line %d: unknown HLS pragma kind %r skipped", line_no, kind_token)
        return None

    keys = _KIND_KEYS[kind]
    fields: dict[str, object] = {}
    for token in tokens[1:]:
        if "=" in token:
            raw_key, _, raw_value = token.partition("=")
            key = raw_key.lower()
            if key not in keys:
                raise ParseError(
                    f"line {line_no}: key {raw_key!r} not valid for {kind.value} in {token!r}"
                )
            dest = keys[key]
            if dest in _INT_FIELDS:
                minimum = 0 if dest == "dim" else 1
                fields[dest] = _parse_int(token, raw_value, line_no, minimum)
            elif dest == "partition_type":
                if raw_value not in PARTITION_TYPES:
                    raise ParseError(f"line {line_no}: bad partition type in {token!r}")
                fields[dest] = raw_value
            else:
                if not _IDENT.match(raw_value):
                    raise ParseError(f"line {line_no}: bad identifier in {token!r}")
                fields[dest] = raw_value
        else:
            # bare flags: partition type shorthand, or interface mode
            if kind is PragmaKind.ARRAY_PARTITION and token in PARTITION_TYPES:
                fields["partition_type"] = token
            elif kind is PragmaKind.INTERFACE and _IDENT.match(token) and "mode" not in fields:
                fields["mode"] = token
            else:
                raise ParseError(f"line {line_no}: unexpected token {token!r} for {kind.value}")
    return PragmaDirective(kind=kind, source_line=line_no, **fields)


def parse_pragmas(text: str) -> list[PragmaDirective]:
    """All recognized directives in the text, in line order."""
    out = []
    for i, line in enumerate(text.split("\n"), start=1):
        d = parse_pragma_line(line, i)
        if d is not None:
            out.append(d)
    return out


def serialize_pragma(d: PragmaDirective, style: PragmaStyle = VITIS_STYLE) -> str:
    """Render a directive in the configured toolchain style (sans indent)."""
    parts = [f"#pragma HLS {d.kind.value.lower()}"]
    if d.kind is PragmaKind.PIPELINE and d.ii is not None:
        parts.append(f"{style.ii_key}={d.ii}")
    elif d.kind is PragmaKind.UNROLL and d.factor is not None:
        parts.append(f"{style.factor_key}={d.factor}")
    elif d.kind is PragmaKind.ARRAY_PARTITION:
        if d.variable is not None:
            parts.append(f"{style.variable_key}={d.variable}")
        if d.partition_type is not None:
            parts.append(f"{style.type_key}={d.partition_type}")
        if d.factor is not None:
            parts.append(f"{style.factor_key}={d.factor}")
        if d.dim is not None:
            parts.append(f"{style.dim_key}={d.dim}")
    elif d.kind is PragmaKind.INTERFACE:
        if d.mode is not None:
            parts.append(f"{style.mode_key}={d.mode}")
        if d.variable is not None:
            parts.append(f"{style.port_key}={d.variable}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Lexical anchor scanning

_TWO_CHAR = {"<<", ">>", "&&", "||", "::", "->", "++", "--"}


def _lex(text: str):
    """Yield (token, line) pairs: identifiers/numbers and single punctuation.

    Comments, string/char literals, and preprocessor lines contribute no
    tokens, so braces inside them cannot skew the balance.
    """
    i, line = 0, 1
    n = len(text)
    at_line_start = True
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            at_line_start = True
            continue
        if c in " \t\r":
            i += 1
            continue
        if at_line_start and c == "#":
            while i < n and text[i] != "\n":
                if text[i] == "\\" and i + 1 < n and text[i + 1] == "\n":
                    line += 1
                    i += 1
                i += 1
            continue
        at_line_start = False
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            i += 2
            while i + 1 < n and not (text[i] == "*" and text[i + 1] == "/"):
                if text[i] == "\n":
                    line += 1
                i += 1
            i += 2
            continue
        if c in "\"'":
            quote = c
            i += 1
            while i < n and text[i] != quote:
                if text[i] == "\\":
                    i += 1
                elif text[i] == "\n":
                    line += 1
                i += 1
            i += 1
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            yield text[start:i], line
            continue
        if c.isdigit():
            start = i
            while i < n and (text[i].isalnum() or text[i] in "._"):
                i += 1
            yield text[start:i], line
            continue
        if text[i : i + 2] in _TWO_CHAR:
            yield text[i : i + 2], line
            i += 2
            continue
        yield c, line
        i += 1


@dataclass
class _OpenBrace:
    kind: str  # "function" | "loop" | "block"
    label: str
    line: int
    anchor_index: int | None  # index into the anchors list, when an anchor


def find_anchors(text: str) -> list[AnchorPoint]:
    """Function and loop body-start anchors, by lexical scanning.

    Raises ParseError on brace imbalance, naming the offending line.
    """
    anchors: list[AnchorPoint] = []
    stack: list[_OpenBrace] = []
    loop_count = 0
    loop_nesting = 0

    paren_depth = 0
    pending_loop: tuple[str, bool] | None = None  # (label, header_closed)
    func_candidate: str | None = None  # set while a depth-0 ident(...) header is open/closed
    func_header_closed = False
    prev: list[str] = ["", "", ""]  # last three tokens, most recent last

    def push(kind: str, label: str, line: int) -> None:
        nonlocal loop_nesting
        index = None
        if kind in ("function", "loop"):
            depth = 0 if kind == "function" else loop_nesting + 1
            anchors.append(
                AnchorPoint(
                    kind=f"{kind}_body_start",
                    label=label,
                    line=line,
                    nesting_depth=depth,
                )
            )
            index = len(anchors) - 1
        if kind == "loop":
            loop_nesting += 1
        stack.append(_OpenBrace(kind=kind, label=label, line=line, anchor_index=index))

    for token, line in _lex(text):
        if token == "(":
            if paren_depth == 0 and not stack and _IDENT.match(prev[-1]) and prev[-1] not in (
                "for",
                "while",
                "if",
                "switch",
                "return",
            ):
                func_candidate = prev[-1]
                func_header_closed = False
            paren_depth += 1
        elif token == ")":
            paren_depth = max(0, paren_depth - 1)
            if paren_depth == 0:
                if pending_loop is not None:
                    pending_loop = (pending_loop[0], True)
                if func_candidate is not None:
                    func_header_closed = True
        elif paren_depth == 0:
            if token in ("for", "while"):
                label = ""
                if prev[-1] == ":" and _IDENT.match(prev[-2]) and prev[-3] != "case":
                    label = prev[-2]
                pending_loop = (label, False)
            elif token == "{":
                if pending_loop is not None and pending_loop[1]:
                    loop_count += 1
                    label = pending_loop[0] or f"loop_{loop_count}"
                    pending_loop = None
                    push("loop", label, line)
                elif not stack and func_candidate is not None and func_header_closed:
                    name = func_candidate
                    func_candidate = None
                    push("function", name, line)
                else:
                    pending_loop = None
                    push("block", "", line)
            elif token == "}":
                if not stack:
                    raise ParseError(f"line {line}: unbalanced closing brace")
                closed = stack.pop()
                if closed.kind == "loop":
                    loop_nesting -= 1
                if closed.anchor_index is not None:
                    a = anchors[closed.anchor_index]
                    anchors[closed.anchor_index] = replace(a, end_line=line)
            elif token == ";":
                if pending_loop is not None and pending_loop[1]:
                    pending_loop = None  # braceless loop body: no insertion point
                func_candidate = None
            else:
                if pending_loop is not None and pending_loop[1]:
                    pending_loop = None
                if func_header_closed and token not in ("const", "noexcept"):
                    func_candidate = None
        prev = [prev[1], prev[2], token]

    if stack:
        raise ParseError(f"line {stack[0].line}: unbalanced opening brace")
    return anchors


def anchor_for_line(anchors, line: int) -> AnchorPoint | None:
    """Innermost anchor whose body contains the given 1-based line."""
    best = None
    for a in anchors:
        if a.line < line <= a.end_line:
            if best is None or a.line > best.line:
                best = a
    return best


# ---------------------------------------------------------------------------
# Editing operations


def strip_pragmas(unit: SourceUnit) -> SourceUnit:
    """Remove every `#pragma HLS` line; all other lines stay byte-identical."""
    kept = [ln for ln in unit.text.split("\n") if not _PRAGMA_LINE.match(ln.rstrip("\r"))]
    return SourceUnit.from_text("\n".join(kept), unit.path)


def _indent_of(line: str) -> str:
    return line[: len(line) - len(line.lstrip(" \t"))]


def inject_pragma(
    unit: SourceUnit,
    anchor: AnchorPoint,
    d: PragmaDirective,
    style: PragmaStyle = VITIS_STYLE,
) -> SourceUnit:
    """Insert the directive as the first line after the anchor's opening brace.

    Raises ConflictError when a directive of the same kind (and, for
    variable-scoped kinds, the same variable) is already attached to the
    anchor. Exactly one line is added; nothing else changes.
    """
    if anchor not in unit.anchors:
        raise ConflictError(f"anchor {anchor.label!r} does not belong to {unit.path}")
    for existing in unit.pragmas:
        owner = anchor_for_line(unit.anchors, existing.source_line)
        if (
            owner is not None
            and (owner.kind, owner.label, owner.line) == (anchor.kind, anchor.label, anchor.line)
            and existing.kind == d.kind
            and existing.variable == d.variable
        ):
            raise ConflictError(
                f"{d.kind.value} already present at anchor {anchor.label!r} "
                f"(line {existing.source_line})"
            )
    lines = unit.text.split("\n")
    indent = _indent_of(lines[anchor.line - 1]) + "    "
    lines.insert(anchor.line, indent + serialize_pragma(d, style))
    return SourceUnit.from_text("\n".join(lines), unit.path)


@dataclass(frozen=True)
class PragmaDiffEntry:
    change: str  # "added" | "removed" | "changed"
    kind: PragmaKind
    anchor_label: str
    variable: str | None
    before: PragmaDirective | None = None
    after: PragmaDirective | None = None


def _keyed(unit: SourceUnit) -> dict[tuple, PragmaDirective]:
    out: dict[tuple, PragmaDirective] = {}
    for p in unit.pragmas:
        owner = anchor_for_line(unit.anchors, p.source_line)
        label = owner.label if owner is not None else ""
        out[(p.kind.value, label, p.variable or "")] = p
    return out


def diff_pragmas(base: SourceUnit, optimized: SourceUnit) -> list[PragmaDiffEntry]:
    """Directive-level difference keyed by (kind, anchor label, variable)."""
    before, after = _keyed(base), _keyed(optimized)
    entries: list[PragmaDiffEntry] = []
    for key in sorted(set(before) | set(after)):
        kind, label, variable = key
        b, a = before.get(key), after.get(key)
        if b is None:
            entries.append(
                PragmaDiffEntry("added", PragmaKind(kind), label, variable or None, None, a)
            )
        elif a is None:
            entries.append(
                PragmaDiffEntry("removed", PragmaKind(kind), label, variable or None, b, None)
            )
        elif not b.same_params(a):
            entries.append(
                PragmaDiffEntry("changed", PragmaKind(kind), label, variable or None, b, a)
            )
    return entries
