"""Repair legacy TimeML into TimeML-strict.

The engine is a planner/applier pair: planning walks the document, and
every action it decides on is immediately executed through the same
dispatcher that :func:`apply_actions` uses for replay.  Repairing a
document therefore *is* applying its plan, and replaying the logged
actions over the original parse reproduces the repaired document
exactly.

Repair is conservative: surface text inside TEXT is never altered
(escaping of raw bytes happens before parsing, in
:func:`repair_bytes`), annotation extents never move, and semantic
content (an event's class, a timex's value) is never invented.  What
cannot be fixed without inventing semantics is reported as irreparable.
"""

from __future__ import annotations

import copy as _copy
import re
from dataclasses import dataclass, field

from .model import (
    BOOLEAN_VALUES,
    EVENT_CLASSES,
    FUNCTION_IN_DOCUMENT,
    RELTYPES_BY_KIND,
    SYNTHETIC,
    TIMEX_TYPES,
    DctBlock,
    Document,
    Event,
    EventInstance,
    Link,
    ORIGIN_INLINE,
    ORIGIN_MAKEINSTANCE,
    RawSpan,
    Signal,
    SourcePos,
    TextRegion,
    Timex3,
    collect_ids,
    id_class,
    instances_of_event,
    resolve,
)
from .parser import DEFAULT_DOCTYPE, ParseMode, parse
from .validator import Diagnostic, ERROR, make_diagnostic, validate

# Action kinds (closed catalog).
ADD_DCT = "ADD_DCT"
WRAP_TEXT = "WRAP_TEXT"
RENAME_ID = "RENAME_ID"
RENUMBER_DUPLICATE = "RENUMBER_DUPLICATE"
DROP_DANGLING_LINK = "DROP_DANGLING_LINK"
RETARGET_REFERENCE = "RETARGET_REFERENCE"
FOLD_MAKEINSTANCE = "FOLD_MAKEINSTANCE"
SYNTHESIZE_INSTANCE = "SYNTHESIZE_INSTANCE"
FIX_ENUM_CASE = "FIX_ENUM_CASE"
ESCAPE_CHARS = "ESCAPE_CHARS"
ADD_DOCTYPE = "ADD_DOCTYPE"

# Dangling-reference policies.
DROP = "drop"
KEEP_AND_FAIL = "keep-and-fail"


@dataclass
class RepairConfig:
    dangling_policy: str = DROP
    dct_heuristic: str = "function-attribute-first"
    fold_single_instances: bool = True


@dataclass
class RepairAction:
    kind: str
    before: str
    after: str
    pos: SourcePos
    rationale: str
    detail: dict = field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "before": self.before,
            "after": self.after,
            "line": self.pos.line,
            "column": self.pos.column,
            "rationale": self.rationale,
        }


@dataclass
class RepairResult:
    document: Document | None
    actions: list[RepairAction]
    irreparable: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.document is not None and not self.irreparable


def actions_to_json(actions: list[RepairAction]) -> list[dict]:
    return [a.to_json_dict() for a in actions]


# ---------------------------------------------------------------------------
# Addressing and mechanical application
# ---------------------------------------------------------------------------

_LISTS = ("events", "timexes", "signals", "instances", "tlinks", "slinks", "alinks")


def _addressed(doc: Document, address: tuple):
    list_name, index = address
    return getattr(doc, list_name)[index]


def _address_of(doc: Document, item) -> tuple:
    for list_name in _LISTS:
        seq = getattr(doc, list_name)
        for i, candidate in enumerate(seq):
            if candidate is item:
                return (list_name, i)
    raise ValueError("item is not part of the document")


def _remove_from_layout(doc: Document, item) -> None:
    containers = [doc.layout]
    for dct in doc.dcts:
        containers.append(dct.children)
    for text in doc.texts:
        containers.append(text.content)
    for container in containers:
        for i, candidate in enumerate(container):
            if candidate is item:
                del container[i]
                return


_ID_ATTRS = {
    Event: "eid",
    Timex3: "tid",
    Signal: "sid",
    EventInstance: "eiid",
    Link: "lid",
}
_ID_CLASSES = {"eid": "eid", "tid": "tid", "sid": "sid", "eiid": "eiid", "lid": "lid"}


def _rewrite_references(doc: Document, old: str, new: str) -> int:
    """Point every reference equal to ``old`` at ``new``; returns count."""
    count = 0
    for link in doc.links:
        if link.source == old:
            link.source = new
            count += 1
        if link.target == old:
            link.target = new
            count += 1
        if link.signal_id == old:
            link.signal_id = new
            count += 1
    for timex in doc.timexes:
        for attr in ("anchor_time_id", "begin_point", "end_point"):
            if getattr(timex, attr) == old:
                setattr(timex, attr, new)
                count += 1
    for inst in doc.instances:
        if inst.event_id == old:
            inst.event_id = new
            count += 1
        if inst.signal_id == old:
            inst.signal_id = new
            count += 1
    return count


def _apply_one(doc: Document, action: RepairAction) -> None:
    """Execute one action; the dispatcher the planner and replay share."""
    kind, detail = action.kind, action.detail

    if kind == ESCAPE_CHARS:
        return  # byte-level, handled before parsing
    if kind == ADD_DOCTYPE:
        doc.had_doctype = True
        doc.doctype_raw = DEFAULT_DOCTYPE
        return
    if kind == FIX_ENUM_CASE:
        item = _addressed(doc, detail["address"])
        setattr(item, detail["attr"], detail["value"])
        return
    if kind == RENAME_ID:
        item = _addressed(doc, detail["address"])
        setattr(item, detail["id_attr"], detail["new"])
        _rewrite_references(doc, detail["old"], detail["new"])
        return
    if kind == RENUMBER_DUPLICATE:
        item = _addressed(doc, detail["address"])
        setattr(item, detail["id_attr"], detail["new"])
        return
    if kind == SYNTHESIZE_INSTANCE:
        if "address" in detail:  # inline attributes lacked an eiid
            _addressed(doc, detail["address"]).eiid = detail["new"]
            return
        event = _addressed(doc, detail["event_address"])
        instance = EventInstance(
            eiid=detail["new"], event_id=event.eid, origin=ORIGIN_INLINE
        )
        event.inline_instance = instance
        doc.instances.append(instance)
        return
    if kind == RETARGET_REFERENCE:
        link = _addressed(doc, detail["address"])
        setattr(link, detail["slot"], detail["new"])
        return
    if kind == FOLD_MAKEINSTANCE:
        inst = _addressed(doc, detail["address"])
        event = _addressed(doc, detail["event_address"])
        event.inline_instance = inst
        inst.origin = ORIGIN_INLINE
        _remove_from_layout(doc, inst)
        return
    if kind == DROP_DANGLING_LINK:
        list_name, index = detail["address"]
        item = getattr(doc, list_name)[index]
        del getattr(doc, list_name)[index]
        _remove_from_layout(doc, item)
        return
    if kind == ADD_DCT:
        _apply_add_dct(doc, detail)
        return
    if kind == WRAP_TEXT:
        _apply_wrap_text(doc, detail["span"])
        return
    raise ValueError(f"unknown action kind {kind}")


def _apply_add_dct(doc: Document, detail: dict) -> None:
    if "set_fid" in detail:
        _addressed(doc, detail["set_fid"]).function_in_document = "CREATION_TIME"
        return
    if "copy_from" in detail:
        source = _addressed(doc, detail["copy_from"])
        timex = Timex3(
            tid=detail["tid"],
            type=source.type,
            value=source.value,
            mod=source.mod,
            quant=source.quant,
            freq=source.freq,
            temporal_function=source.temporal_function,
            function_in_document="CREATION_TIME",
            surface_text=source.surface_text,
            surface_raw=source.surface_raw,
        )
    else:
        timex = Timex3(tid=detail["tid"], value="XXXX-XX-XX")
    dct = DctBlock(children=[timex])
    doc.layout.insert(0, dct)
    doc.layout.insert(1, RawSpan(raw="\n"))
    doc.dcts.insert(0, dct)
    doc.timexes.insert(0, timex)


def _apply_wrap_text(doc: Document, span: tuple) -> None:
    start, end = span
    data = doc.source_bytes
    encoding = doc.source_encoding

    def split_raw(item: RawSpan) -> list:
        """Split a positioned raw span at the wrap boundaries."""
        o, e = item.pos.offset, item.pos.end_offset
        cuts = sorted({o, e, min(max(start, o), e), min(max(end, o), e)})
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            if a == b:
                continue
            raw = data[a:b].decode(encoding, errors="replace")
            pieces.append(RawSpan(raw=raw, pos=SourcePos(a, item.pos.line, item.pos.column, b)))
        return pieces or [item]

    region = TextRegion(pos=SYNTHETIC)
    new_layout: list = []
    displaced: list = []
    inserted = False

    def is_inside(offset: int) -> bool:
        return start <= offset < end

    for item in doc.layout:
        offset = item.pos.offset if hasattr(item, "pos") else -1
        if isinstance(item, RawSpan) and not item.is_cdata and not item.pos.synthetic:
            for piece in split_raw(item):
                if is_inside(piece.pos.offset):
                    if not inserted:
                        new_layout.append(region)
                        inserted = True
                    region.content.append(piece)
                else:
                    new_layout.append(piece)
            continue
        if offset >= 0 and is_inside(offset):
            if isinstance(item, (Link, EventInstance)):
                displaced.append(item)
                continue
            if not inserted:
                new_layout.append(region)
                inserted = True
            region.content.append(item)
        else:
            new_layout.append(item)
    if not inserted:
        new_layout.append(region)
    at = new_layout.index(region) + 1
    for item in reversed(displaced):
        new_layout.insert(at, item)
        new_layout.insert(at, RawSpan(raw="\n"))
    doc.layout = new_layout
    doc.texts.append(region)


def apply_actions(doc: Document, actions: list[RepairAction]) -> Document:
    """Replay an action log over a document (ESCAPE_CHARS entries, which
    operate on raw bytes before parsing, are skipped)."""
    out = _copy.deepcopy(doc)
    for action in actions:
        _apply_one(out, action)
    return out


# ---------------------------------------------------------------------------
# Planning passes
# ---------------------------------------------------------------------------

class _Planner:
    def __init__(self, doc: Document, cfg: RepairConfig):
        self.doc = doc
        self.cfg = cfg
        self.actions: list[RepairAction] = []
        self.used_ids: set[str] = set()

    def do(self, kind, before, after, pos, rationale, detail) -> None:
        action = RepairAction(kind, before, after, pos, rationale, detail)
        _apply_one(self.doc, action)
        self.actions.append(action)

    def fresh_id(self, prefix: str, cls: str, hint: str | None = None) -> str:
        """A deterministic unused identifier: the hinted form when it is
        grammatical and free, else the smallest free positive integer."""
        if hint is not None:
            for candidate in (hint, prefix + hint):
                if id_class(candidate) == cls and candidate not in self.used_ids:
                    self.used_ids.add(candidate)
                    return candidate
        n = 1
        while f"{prefix}{n}" in self.used_ids:
            n += 1
        fresh = f"{prefix}{n}"
        self.used_ids.add(fresh)
        return fresh

    # -- passes ---------------------------------------------------------

    def pass_doctype(self) -> None:
        if not self.doc.had_doctype:
            self.do(
                ADD_DOCTYPE,
                "",
                DEFAULT_DOCTYPE,
                SYNTHETIC,
                "documents should reference the TimeML DTD",
                {},
            )

    _ENUM_FIELDS = [
        ("events", "event_class", EVENT_CLASSES, str.upper),
        ("timexes", "type", TIMEX_TYPES, str.upper),
        ("timexes", "function_in_document", FUNCTION_IN_DOCUMENT, str.upper),
        ("timexes", "temporal_function", BOOLEAN_VALUES, str.lower),
    ]

    def pass_enum_case(self) -> None:
        for list_name, attr, allowed, normalize in self._ENUM_FIELDS:
            for i, item in enumerate(getattr(self.doc, list_name)):
                value = getattr(item, attr)
                if value is not None and value not in allowed and normalize(value) in allowed:
                    self.do(
                        FIX_ENUM_CASE,
                        value,
                        normalize(value),
                        item.pos,
                        f"{attr} values are case-sensitive",
                        {"address": (list_name, i), "attr": attr, "value": normalize(value)},
                    )
        for list_name in ("tlinks", "slinks", "alinks"):
            for i, link in enumerate(getattr(self.doc, list_name)):
                allowed = RELTYPES_BY_KIND[link.kind]
                value = link.rel_type
                if value is not None and value not in allowed and value.upper() in allowed:
                    self.do(
                        FIX_ENUM_CASE,
                        value,
                        value.upper(),
                        link.pos,
                        "relType values are case-sensitive",
                        {"address": (list_name, i), "attr": "rel_type", "value": value.upper()},
                    )

    def _seed_used_ids(self) -> None:
        self.used_ids = set(collect_ids(self.doc).bindings)

    def pass_rename_ids(self) -> None:
        self._seed_used_ids()
        for list_name in _LISTS:
            for i, item in enumerate(getattr(self.doc, list_name)):
                id_attr = _ID_ATTRS[type(item)]
                cls = _ID_CLASSES[id_attr]
                value = getattr(item, id_attr)
                if value is None or id_class(value) == cls:
                    continue
                new = self.fresh_id(
                    {"eid": "e", "tid": "t", "sid": "s", "eiid": "ei", "lid": "l"}[cls],
                    cls,
                    hint=value.strip().lower(),
                )
                self.do(
                    RENAME_ID,
                    value,
                    new,
                    item.pos,
                    f"{id_attr} must match the {cls} grammar; references follow the rename",
                    {"address": (list_name, i), "id_attr": id_attr, "old": value, "new": new},
                )

    def pass_renumber_duplicates(self) -> None:
        index = collect_ids(self.doc)
        self.used_ids = set(index.bindings)
        for identifier in index.duplicates:
            for extra in index.bindings[identifier][1:]:
                id_attr = _ID_ATTRS[type(extra)]
                cls = _ID_CLASSES[id_attr]
                new = self.fresh_id(
                    {"eid": "e", "tid": "t", "sid": "s", "eiid": "ei", "lid": "l"}[cls], cls
                )
                self.do(
                    RENUMBER_DUPLICATE,
                    identifier,
                    new,
                    extra.pos,
                    "identifiers must be unique; existing references keep the first binding",
                    {"address": _address_of(self.doc, extra), "id_attr": id_attr, "new": new},
                )

    def pass_synthesize_inline_eiids(self) -> None:
        self._seed_used_ids()
        for i, inst in enumerate(self.doc.instances):
            if inst.origin == ORIGIN_INLINE and inst.eiid is None:
                new = self.fresh_id("ei", "eiid")
                self.do(
                    SYNTHESIZE_INSTANCE,
                    "",
                    new,
                    inst.pos,
                    "EVENT carries instance attributes, so an eiid is required",
                    {"address": ("instances", i), "new": new},
                )

    def pass_instance_slot_references(self) -> None:
        """eventInstanceID-style slots carrying an event id: point them at
        the event's instance, synthesizing one when the event has none."""
        self._seed_used_ids()
        for list_name in ("tlinks", "slinks", "alinks"):
            for i, link in enumerate(getattr(self.doc, list_name)):
                for slot, attr_name in (("source", link.source_attr), ("target", link.target_attr)):
                    value = getattr(link, slot)
                    if value is None or id_class(value) != "eid":
                        continue
                    if attr_name is not None and attr_name in ("timeID", "relatedToTime"):
                        continue  # a time slot cannot take an event
                    index = collect_ids(self.doc)
                    event = resolve(index, value)
                    if not isinstance(event, Event):
                        continue
                    instances = instances_of_event(self.doc, value)
                    if len(instances) > 1:
                        continue  # ambiguous; left for the validator
                    if len(instances) == 1 and instances[0].eiid is not None:
                        new = instances[0].eiid
                    else:
                        new = self.fresh_id("ei", "eiid")
                        self.do(
                            SYNTHESIZE_INSTANCE,
                            "",
                            new,
                            event.pos,
                            f"instantiate event {value} so links can reference it",
                            {"event_address": _address_of(self.doc, event), "new": new},
                        )
                    self.do(
                        RETARGET_REFERENCE,
                        value,
                        new,
                        link.pos,
                        f"instance slots take an eiid; {value} resolves to instance {new}",
                        {"address": (list_name, i), "slot": slot, "new": new},
                    )

    def pass_drop_dangling_instances(self) -> None:
        if self.cfg.dangling_policy != DROP:
            return
        index = collect_ids(self.doc)
        for i in range(len(self.doc.instances) - 1, -1, -1):
            inst = self.doc.instances[i]
            if inst.origin != ORIGIN_MAKEINSTANCE or inst.event_id is None:
                continue
            if isinstance(resolve(index, inst.event_id), Event):
                continue
            self.do(
                DROP_DANGLING_LINK,
                f"MAKEINSTANCE {inst.eiid or ''} eventID={inst.event_id}".strip(),
                "",
                inst.pos,
                "its event does not exist and cannot be invented",
                {"address": ("instances", i)},
            )

    def pass_fold_makeinstances(self) -> None:
        if not self.cfg.fold_single_instances:
            return
        index = collect_ids(self.doc)
        for i, inst in enumerate(list(self.doc.instances)):
            if inst.origin != ORIGIN_MAKEINSTANCE or inst.event_id is None:
                continue
            event = resolve(index, inst.event_id)
            if not isinstance(event, Event):
                continue
            if len(instances_of_event(self.doc, inst.event_id)) != 1:
                continue
            if event.inline_instance is not None:
                continue
            if inst.eiid is None or inst.cardinality is not None or inst.signal_id is not None:
                continue  # not representable inline
            if inst.extra_attrs:
                continue
            self.do(
                FOLD_MAKEINSTANCE,
                f"MAKEINSTANCE {inst.eiid}",
                f"EVENT {event.eid} inline attributes",
                inst.pos,
                "singly-instantiated events carry their instance inline",
                {
                    "address": ("instances", i),
                    "event_address": _address_of(self.doc, event),
                },
            )

    def pass_dct(self) -> None:
        doc = self.doc
        if len(doc.dcts) == 1:
            timex = doc.dcts[0].timex
            if (
                timex is not None
                and timex.value != "XXXX-XX-XX"
                and timex.function_in_document is None
            ):
                self.do(
                    ADD_DCT,
                    "",
                    'functionInDocument="CREATION_TIME"',
                    timex.pos,
                    "the DCT timex is the document's default anchor",
                    {"set_fid": _address_of(doc, timex)},
                )
            return
        if len(doc.dcts) > 1:
            return  # irreparable E007
        self._seed_used_ids()
        tid = "t0" if "t0" not in self.used_ids else self.fresh_id("t", "tid")
        self.used_ids.add(tid)
        for fid in ("CREATION_TIME", "PUBLICATION_TIME"):
            candidates = [
                t for t in doc.timexes if t.function_in_document == fid
            ]
            if len(candidates) == 1:
                source = candidates[0]
                self.do(
                    ADD_DCT,
                    "",
                    f"DCT copied from TIMEX3 {source.tid}",
                    source.pos,
                    f"the unique {fid} timex serves as creation time",
                    {"copy_from": _address_of(doc, source), "tid": tid},
                )
                return
            if len(candidates) > 1:
                break  # ambiguous: fall through to the unknown form
        self.do(
            ADD_DCT,
            "",
            f'<DCT><TIMEX3 tid="{tid}" value="XXXX-XX-XX" /></DCT>',
            SYNTHETIC,
            "creation time unknown; the underspecified day-level form is used",
            {"tid": tid},
        )

    def pass_text(self) -> None:
        if self.doc.texts:
            return
        span = wrap_text_heuristic(self.doc)
        if span is None:
            return  # undecidable: E009 stays, reported irreparable
        self.do(
            WRAP_TEXT,
            "",
            f"<TEXT> around bytes {span[0]}..{span[1]}",
            SYNTHETIC,
            "the linguistic body must be delimited from the preamble",
            {"span": span},
        )

    def pass_drop_dangling_links(self) -> None:
        if self.cfg.dangling_policy != DROP:
            return
        index = collect_ids(self.doc)
        for list_name in ("tlinks", "slinks", "alinks"):
            links = getattr(self.doc, list_name)
            for i in range(len(links) - 1, -1, -1):
                link = links[i]
                bad = None
                for value in (link.source, link.target, link.signal_id):
                    if value is None:
                        continue
                    if id_class(value) is None or resolve(index, value) is None:
                        bad = value
                        break
                if bad is None:
                    continue
                self.do(
                    DROP_DANGLING_LINK,
                    f"{link.kind} {link.lid or ''} -> {bad}".replace("  ", " "),
                    "",
                    link.pos,
                    "the reference names no findable element and a target cannot be invented",
                    {"address": (list_name, i)},
                )


def wrap_text_heuristic(doc: Document) -> tuple[int, int] | None:
    """Choose the byte span of the linguistic body for a TEXT-less document.

    With annotations present: the smallest span covering every root-level
    annotation, widened to line boundaries.  Without annotations: the
    content after the last metadata-looking line that precedes the first
    line with five or more word tokens.  Returns None when undecidable.
    """
    data = doc.source_bytes
    if data is None:
        return None
    positioned = [
        item
        for item in doc.layout
        if hasattr(item, "pos") and not item.pos.synthetic and item.pos.offset >= 0
    ]
    if not positioned:
        return None
    interior_start = min(item.pos.offset for item in positioned)
    interior_end = max(item.pos.end_offset for item in positioned)

    def line_start(offset: int) -> int:
        at = data.rfind(b"\n", 0, offset)
        return at + 1 if at >= 0 else 0

    def line_end(offset: int) -> int:
        at = data.find(b"\n", offset)
        return at + 1 if at >= 0 else len(data)

    entities = [
        item for item in doc.entities_outside_text() if not item.pos.synthetic
    ]
    if entities:
        start = line_start(min(e.pos.offset for e in entities))
        end = line_end(max(e.pos.end_offset for e in entities) - 1)
        return max(start, interior_start), min(end, interior_end)

    # No annotations: scan the raw preamble for a header/content boundary.
    content_line = None
    header_lines = []
    for item in doc.layout:
        if not isinstance(item, RawSpan) or item.is_cdata or item.pos.synthetic:
            continue
        offset = item.pos.offset
        for line in item.raw.splitlines(keepends=True):
            stripped = line.strip()
            if stripped:
                words = [t for t in stripped.split() if re.match(r"[^\W\d_]", t)]
                if len(words) >= 5 and not _looks_like_header(stripped):
                    content_line = (offset, line)
                    break
                if _looks_like_header(stripped):
                    header_lines.append((offset, line))
            offset += len(line.encode(doc.source_encoding))
        if content_line:
            break
    if content_line is None:
        return None
    preceding = [h for h in header_lines if h[0] < content_line[0]]
    if preceding:
        last_offset, last_line = preceding[-1]
        start = last_offset + len(last_line.encode(doc.source_encoding))
    else:
        start = line_start(content_line[0])
    last_raw = [
        item
        for item in doc.layout
        if isinstance(item, RawSpan) and not item.pos.synthetic and item.raw.strip()
    ]
    end = line_end(max(item.pos.end_offset for item in last_raw) - 1)
    return max(start, interior_start), min(end, interior_end)


def _looks_like_header(stripped: str) -> bool:
    """Metadata-looking line: all-caps, or mostly slug/numeric tokens."""
    if stripped == stripped.upper():
        return True
    tokens = stripped.split()
    with_digits = sum(1 for t in tokens if any(c.isdigit() for c in t))
    return bool(tokens) and with_digits * 2 >= len(tokens)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def repair(doc: Document, cfg: RepairConfig | None = None) -> RepairResult:
    """Produce a repaired copy of the document plus the full action log.

    The input document is never mutated.  Whatever strict-validity
    violations survive (semantic gaps that cannot be fixed without
    inventing content) are returned as ``irreparable``.
    """
    cfg = cfg or RepairConfig()
    planner = _Planner(_copy.deepcopy(doc), cfg)
    planner.pass_doctype()
    planner.pass_enum_case()
    planner.pass_rename_ids()
    planner.pass_renumber_duplicates()
    planner.pass_synthesize_inline_eiids()
    planner.pass_instance_slot_references()
    planner.pass_drop_dangling_instances()
    planner.pass_fold_makeinstances()
    planner.pass_dct()
    planner.pass_text()
    planner.pass_drop_dangling_links()
    repaired = planner.doc
    irreparable = [d for d in validate(repaired) if d.severity == ERROR]
    return RepairResult(document=repaired, actions=planner.actions, irreparable=irreparable)


def plan(doc: Document, cfg: RepairConfig | None = None) -> list[RepairAction]:
    """Dry run: the exact action list :func:`repair` would apply."""
    return repair(doc, cfg).actions


# Bare ampersands and angle brackets that cannot open markup.
_BARE_MARKUP = re.compile(
    rb"&(?!(?:amp|lt|gt|quot|apos|#[0-9]+|#x[0-9a-fA-F]+);)|<(?![A-Za-z_/!?])"
)
_CDATA_RANGE = re.compile(rb"<!\[CDATA\[.*?\]\]>", re.DOTALL)


def _escape_bytes(data: bytes) -> tuple[bytes, list[RepairAction]]:
    cdata_ranges = [m.span() for m in _CDATA_RANGE.finditer(data)]
    actions: list[RepairAction] = []
    out = bytearray()
    last = 0
    for match in _BARE_MARKUP.finditer(data):
        offset = match.start()
        if any(a <= offset < b for a, b in cdata_ranges):
            continue  # literal markup characters are fine inside CDATA
        replacement = b"&amp;" if match.group(0) == b"&" else b"&lt;"
        line = data.count(b"\n", 0, offset) + 1
        col = offset - (data.rfind(b"\n", 0, offset) + 1) + 1
        actions.append(
            RepairAction(
                ESCAPE_CHARS,
                match.group(0).decode("ascii", "replace"),
                replacement.decode("ascii"),
                SourcePos(offset, line, col, offset + 1),
                "bare markup characters must be escaped to form well-formed XML",
                {"offset": offset},
            )
        )
        out += data[last:offset] + replacement
        last = match.end()
    out += data[last:]
    return bytes(out), actions


def repair_bytes(data: bytes, cfg: RepairConfig | None = None) -> RepairResult:
    """Repair a raw file: escape stray markup characters if that is what
    blocks parsing, then parse leniently and run :func:`repair`."""
    escape_actions: list[RepairAction] = []
    doc, errors = parse(data, ParseMode.LENIENT)
    if doc is None and errors and errors[0].category.value == "not-well-formed":
        fixed, escape_actions = _escape_bytes(data)
        if escape_actions:
            doc, errors = parse(fixed, ParseMode.LENIENT)
    if doc is None:
        return RepairResult(
            document=None,
            actions=[],
            irreparable=[make_diagnostic("E001", e.message, e.pos) for e in errors],
        )
    result = repair(doc, cfg)
    result.actions[:0] = escape_actions
    return result
