"""The textual policy language and the capture-sheet CSV ingester.

The DSL is line-oriented: one ``policy <ID> [extends <ID>] {`` header per
policy, one clause per line terminated by ``;``, and a closing ``}``.
``#`` starts a comment. Every clause is optional and appears at most once
per policy, except ``meta``. Example::

    policy US91-3.1 extends US91-3 {
      location within-any [White_Sands_Missile_Range, Ft_Irwin];
      effect permit;
      meta source_document "NTIA Redbook";
    }

Serialization is the exact inverse: ``parse(serialize(P))`` is structurally
equal to ``P``. Parsers are pure functions and never return partial
documents.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .geo import RegionStore
from .model import (
    ActiveDuring,
    Affiliation,
    AffiliationIs,
    Effect,
    EffectKind,
    FrequencyRange,
    FrequencyWithin,
    LocationWithinAny,
    Policy,
    RequesterIsA,
    Restriction,
    TimeWindow,
    format_instant,
    frequency_hz,
    hz_to_unit_str,
    parse_affiliation,
    parse_instant,
)


class ParseError(ValueError):
    """Syntax or validation failure with a source location."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass
class PolicyDocument:
    """A parsed batch of policies plus the ids they reference."""

    policies: list[Policy] = field(default_factory=list)
    referenced_class_ids: set[str] = field(default_factory=set)
    referenced_region_ids: set[str] = field(default_factory=set)

    @property
    def policy_ids(self) -> set[str]:
        return {p.id for p in self.policies}


_ID_TOKEN = r"[A-Za-z0-9][A-Za-z0-9._\-]*"
_HEADER_RE = re.compile(
    rf"^policy\s+(?P<id>{_ID_TOKEN})(?:\s+extends\s+(?P<parent>{_ID_TOKEN}))?\s*\{{$"
)
_FREQ_RE = re.compile(
    r"^frequency\s+within\s+(?P<lo>\d+(?:\.\d+)?)\.\.(?P<hi>\d+(?:\.\d+)?)"
    r"\s+(?P<unit>MHz|GHz)$"
)
_REQUESTER_RE = re.compile(rf"^requester\s+isa\s+(?P<cls>{_ID_TOKEN})$")
_AFFILIATION_RE = re.compile(r"^affiliation\s+(?P<aff>Federal|NonFederal)$")
_LOCATION_RE = re.compile(r"^location\s+within-any\s+\[(?P<body>[^\]]*)\]$")
_ACTIVE_RE = re.compile(r"^active\s+during\s+(?P<lo>\S+)\.\.(?P<hi>\S+)$")
_EFFECT_RE = re.compile(
    r"^effect\s+(?P<kind>permit-with-obligations|permit|deny)"
    r"(?:\s+\[(?P<body>[^\]]*)\])?$"
)
_PRIORITY_RE = re.compile(r"^priority\s+(?P<n>\d+)$")
_META_RE = re.compile(r'^meta\s+(?P<key>[A-Za-z_][A-Za-z0-9_]*)\s+"(?P<value>.*)"$')


def _strip_comment(line: str) -> str:
    # A '#' inside a quoted meta value does not start a comment.
    in_quote = False
    escaped = False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
            continue
        if ch == "\\" and in_quote:
            escaped = True
        elif ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _unescape(value: str) -> str:
    return value.replace('\\"', '"').replace("\\\\", "\\")


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def _split_id_list(body: str, line_no: int, what: str) -> list[str]:
    items = [token.strip() for token in body.split(",")]
    items = [token for token in items if token]
    if not items:
        raise ParseError(f"empty {what} list", line_no)
    for token in items:
        if not re.fullmatch(_ID_TOKEN, token):
            raise ParseError(f"bad {what} identifier {token!r}", line_no)
    return items


class _PolicyBuilder:
    def __init__(self, policy_id: str, parent: str | None, line_no: int):
        self.id = policy_id
        self.parent = parent
        self.line_no = line_no
        self.restrictions: list[Restriction] = []
        self.effect: Effect | None = None
        self.precedence: int | None = None
        self.metadata: dict[str, str] = {}
        self.seen_clauses: set[str] = set()

    def mark(self, clause: str, line_no: int) -> None:
        if clause in self.seen_clauses:
            raise ParseError(f"duplicate {clause} clause in policy {self.id}", line_no)
        self.seen_clauses.add(clause)

    def build(self) -> Policy:
        try:
            return Policy(
                id=self.id,
                parent=self.parent,
                restrictions=tuple(self.restrictions),
                effect=self.effect,
                precedence=self.precedence or 0,
                metadata=self.metadata,
            )
        except ValueError as exc:
            raise ParseError(str(exc), self.line_no) from exc


def _resolve_region(
    token: str, regions: RegionStore | None, line_no: int
) -> str:
    if regions is None:
        return token
    resolved = regions.resolve(token)
    if resolved is None:
        raise ParseError(f"unknown region {token!r}", line_no)
    return resolved


def parse_policy_doc(
    text: str, regions: RegionStore | None = None
) -> PolicyDocument:
    """Parse a policy document.

    When a region store is supplied, location entries are resolved (by
    region id or display name) and unknown regions are parse errors;
    otherwise location entries are taken as region ids and resolution is
    deferred to store validation.
    """
    doc = PolicyDocument()
    builder: _PolicyBuilder | None = None

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue

        if builder is None:
            match = _HEADER_RE.match(line)
            if match is None:
                raise ParseError(
                    "expected 'policy <ID> [extends <ID>] {'", line_no
                )
            policy_id = match.group("id")
            if any(p.id == policy_id for p in doc.policies):
                raise ParseError(f"duplicate policy id {policy_id!r}", line_no)
            builder = _PolicyBuilder(policy_id, match.group("parent"), line_no)
            continue

        if line == "}":
            doc.policies.append(builder.build())
            builder = None
            continue

        if not line.endswith(";"):
            raise ParseError("clause must end with ';'", line_no, len(raw_line))
        clause = line[:-1].strip()

        if match := _FREQ_RE.match(clause):
            builder.mark("frequency", line_no)
            try:
                bound = FrequencyRange(
                    frequency_hz(match.group("lo"), match.group("unit")),
                    frequency_hz(match.group("hi"), match.group("unit")),
                )
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from exc
            builder.restrictions.append(FrequencyWithin(bound))
        elif match := _REQUESTER_RE.match(clause):
            builder.mark("requester", line_no)
            builder.restrictions.append(RequesterIsA(match.group("cls")))
            doc.referenced_class_ids.add(match.group("cls"))
        elif match := _AFFILIATION_RE.match(clause):
            builder.mark("affiliation", line_no)
            builder.restrictions.append(
                AffiliationIs(Affiliation(match.group("aff")))
            )
        elif match := _LOCATION_RE.match(clause):
            builder.mark("location", line_no)
            tokens = _split_id_list(match.group("body"), line_no, "region")
            ids = [_resolve_region(token, regions, line_no) for token in tokens]
            builder.restrictions.append(LocationWithinAny(frozenset(ids)))
            doc.referenced_region_ids.update(ids)
        elif match := _ACTIVE_RE.match(clause):
            builder.mark("active", line_no)
            try:
                window = TimeWindow(
                    parse_instant(match.group("lo")),
                    parse_instant(match.group("hi")),
                )
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from exc
            builder.restrictions.append(ActiveDuring(window))
        elif match := _EFFECT_RE.match(clause):
            builder.mark("effect", line_no)
            kind = match.group("kind")
            if kind == "permit":
                builder.effect = Effect(EffectKind.PERMIT)
            elif kind == "deny":
                builder.effect = Effect(EffectKind.DENY)
            else:
                body = match.group("body")
                if body is None:
                    raise ParseError(
                        "permit-with-obligations needs an obligation list", line_no
                    )
                obligations = _split_id_list(body, line_no, "obligation")
                builder.effect = Effect(
                    EffectKind.PERMIT_WITH_OBLIGATIONS, tuple(obligations)
                )
        elif match := _PRIORITY_RE.match(clause):
            builder.mark("priority", line_no)
            builder.precedence = int(match.group("n"))
        elif match := _META_RE.match(clause):
            key = match.group("key")
            if key in builder.metadata:
                raise ParseError(
                    f"duplicate meta key {key!r} in policy {builder.id}", line_no
                )
            builder.metadata[key] = _unescape(match.group("value"))
        else:
            keyword = clause.split()[0] if clause.split() else clause
            raise ParseError(f"unknown or malformed clause {keyword!r}", line_no)

    if builder is not None:
        raise ParseError(f"unterminated policy {builder.id!r}", builder.line_no)

    _check_parents(doc)
    return doc


def _check_parents(doc: PolicyDocument) -> None:
    # Parents may also live in the store; that is checked on add. Here we
    # only reject self-reference and in-document forward cycles.
    ids = doc.policy_ids
    for policy in doc.policies:
        if policy.parent == policy.id:
            raise ParseError(f"policy {policy.id!r} extends itself", 1)
    in_doc = {p.id: p.parent for p in doc.policies}
    for start in ids:
        seen = set()
        cursor: str | None = start
        while cursor is not None and cursor in in_doc:
            if cursor in seen:
                raise ParseError(f"parent cycle through {cursor!r}", 1)
            seen.add(cursor)
            cursor = in_doc[cursor]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _clause_for(restriction: Restriction) -> str:
    if isinstance(restriction, FrequencyWithin):
        lo = hz_to_unit_str(restriction.range.min_hz, "MHz")
        hi = hz_to_unit_str(restriction.range.max_hz, "MHz")
        return f"frequency within {lo}..{hi} MHz"
    if isinstance(restriction, RequesterIsA):
        return f"requester isa {restriction.class_id}"
    if isinstance(restriction, AffiliationIs):
        return f"affiliation {restriction.affiliation.value}"
    if isinstance(restriction, LocationWithinAny):
        ids = ", ".join(sorted(restriction.region_ids))
        return f"location within-any [{ids}]"
    if isinstance(restriction, ActiveDuring):
        return (
            f"active during {format_instant(restriction.window.start)}"
            f"..{format_instant(restriction.window.end)}"
        )
    raise TypeError(f"unknown restriction {restriction!r}")


def render_restriction(restriction: Restriction) -> str:
    """The restriction's DSL clause text (used in API payloads and views)."""
    return _clause_for(restriction)


def serialize_policy_doc(policies: Iterable[Policy]) -> str:
    """Canonical DSL text for the given policies (round-trips via parse)."""
    blocks: list[str] = []
    for policy in policies:
        header = f"policy {policy.id}"
        if policy.parent:
            header += f" extends {policy.parent}"
        lines = [header + " {"]
        for restriction in policy.restrictions:
            lines.append(f"  {_clause_for(restriction)};")
        if policy.effect is not None:
            if policy.effect.kind is EffectKind.PERMIT:
                lines.append("  effect permit;")
            elif policy.effect.kind is EffectKind.DENY:
                lines.append("  effect deny;")
            else:
                ids = ", ".join(policy.effect.obligation_ids)
                lines.append(f"  effect permit-with-obligations [{ids}];")
        if policy.precedence:
            lines.append(f"  priority {policy.precedence};")
        for key in sorted(policy.metadata):
            lines.append(f'  meta {key} "{_escape(policy.metadata[key])}";')
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# ---------------------------------------------------------------------------
# Capture-sheet CSV
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "Policy",
    "Requester",
    "Affiliation",
    "Frequency",
    "Location",
    "Effect",
    "Obligations",
    "OriginalText",
    "SourceDocument",
    "URL",
    "Page",
)

_FREQ_CELL_RE = re.compile(
    r"^\s*(?P<lo>\d+(?:\.\d+)?)\s*(?:-\s*(?P<hi>\d+(?:\.\d+)?)\s*)?(?P<unit>MHz|GHz)\s*$",
    re.IGNORECASE,
)

_METADATA_COLUMNS = {
    "OriginalText": "original_text",
    "SourceDocument": "source_document",
    "URL": "url",
    "Page": "page",
}


def derive_parent_id(policy_id: str) -> str | None:
    """Parent from the sub-policy naming convention: ``X-n`` has parent
    ``X`` and ``X-n.m`` has parent ``X-n``."""
    if "-" not in policy_id:
        return None
    tail = policy_id.rsplit("-", 1)[1]
    if "." in tail:
        return policy_id[: policy_id.rindex(".")]
    return policy_id.rsplit("-", 1)[0]


def _parse_frequency_cell(cell: str, line_no: int) -> FrequencyWithin:
    match = _FREQ_CELL_RE.match(cell)
    if match is None:
        raise ParseError(f"unparseable frequency cell {cell!r}", line_no)
    unit = "MHz" if match.group("unit").lower() == "mhz" else "GHz"
    lo = frequency_hz(match.group("lo"), unit)
    hi = frequency_hz(match.group("hi"), unit) if match.group("hi") else lo
    try:
        return FrequencyWithin(FrequencyRange(lo, hi))
    except ValueError as exc:
        raise ParseError(str(exc), line_no) from exc


_EFFECT_CELLS = {
    "permit": EffectKind.PERMIT,
    "deny": EffectKind.DENY,
    "permit with obligations": EffectKind.PERMIT_WITH_OBLIGATIONS,
}


def parse_capture_csv(
    source: str | Path,
    regions: RegionStore | None = None,
    known_policy_ids: Iterable[str] = (),
) -> PolicyDocument:
    """Ingest a policy capture sheet (one policy per row).

    Parents come from the ``X-n`` / ``X-n.m`` naming convention and must
    exist in the sheet or in ``known_policy_ids``. Location cells are
    semicolon-separated region names resolved against the region store.
    """
    if isinstance(source, Path):
        text = source.read_text()
    else:
        path_candidate = Path(source)
        if "\n" not in source and path_candidate.is_file():
            text = path_candidate.read_text()
        else:
            text = source

    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ParseError("empty capture sheet", 1)
    header = tuple(cell.strip() for cell in rows[0])
    if header != CSV_COLUMNS:
        raise ParseError(
            f"bad header: expected {','.join(CSV_COLUMNS)}", 1
        )

    doc = PolicyDocument()
    known = set(known_policy_ids)
    for line_no, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(
                f"expected {len(CSV_COLUMNS)} cells, got {len(row)}", line_no
            )
        cells = dict(zip(CSV_COLUMNS, (cell.strip() for cell in row)))
        policy_id = cells["Policy"]
        if not policy_id:
            raise ParseError("blank Policy cell", line_no)
        if any(p.id == policy_id for p in doc.policies):
            raise ParseError(f"duplicate policy id {policy_id!r}", line_no)

        parent = derive_parent_id(policy_id)
        if parent is not None and parent not in doc.policy_ids and parent not in known:
            raise ParseError(
                f"orphan sub-policy {policy_id!r}: parent {parent!r} not found",
                line_no,
            )

        restrictions: list[Restriction] = []
        if cells["Requester"]:
            restrictions.append(RequesterIsA(cells["Requester"]))
            doc.referenced_class_ids.add(cells["Requester"])
        if cells["Affiliation"]:
            try:
                restrictions.append(AffiliationIs(parse_affiliation(cells["Affiliation"])))
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from exc
        if cells["Frequency"]:
            restrictions.append(_parse_frequency_cell(cells["Frequency"], line_no))
        if cells["Location"]:
            names = [n.strip() for n in cells["Location"].split(";") if n.strip()]
            if not names:
                raise ParseError("blank location list", line_no)
            if regions is None:
                raise ParseError(
                    "location cell present but no region store supplied", line_no
                )
            ids = []
            for name in names:
                resolved = regions.resolve(name)
                if resolved is None:
                    raise ParseError(f"unknown region name {name!r}", line_no)
                ids.append(resolved)
            restrictions.append(LocationWithinAny(frozenset(ids)))
            doc.referenced_region_ids.update(ids)

        obligations = tuple(
            o.strip() for o in cells["Obligations"].split(";") if o.strip()
        )
        effect: Effect | None = None
        if cells["Effect"]:
            kind = _EFFECT_CELLS.get(cells["Effect"].lower())
            if kind is None:
                raise ParseError(f"unknown effect {cells['Effect']!r}", line_no)
            if kind is EffectKind.PERMIT_WITH_OBLIGATIONS:
                if not obligations:
                    raise ParseError(
                        "permit-with-obligations row needs an Obligations cell",
                        line_no,
                    )
                effect = Effect(kind, obligations)
            else:
                effect = Effect(kind)

        metadata = {
            key: cells[column]
            for column, key in _METADATA_COLUMNS.items()
            if cells[column]
        }
        try:
            doc.policies.append(
                Policy(
                    id=policy_id,
                    parent=parent,
                    restrictions=tuple(restrictions),
                    effect=effect,
                    obligations=obligations,
                    metadata=metadata,
                )
            )
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
    return doc
