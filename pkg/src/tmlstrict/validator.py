"""The TimeML-strict rule catalog.

Every rule is checked against the in-memory document model, so the same
validator serves parsed files and programmatically built documents.  The
catalog is closed:

    E001  not well-formed XML / unsupported encoding (fatal at parse)
    E002  unknown or misplaced element / unknown attribute
    E003  missing required attribute
    E004  malformed identifier
    E005  duplicate identifier
    E006  dangling reference
    E007  DCT count != 1
    E008  DCT content malformed
    E009  TEXT count != 1
    E010  illegal enumeration value
    E011  MAKEINSTANCE for a singly-instantiated event
    E012  reference prefix illegal for its slot
    W101  advisory temporal inconsistency
    W103  annotation outside TEXT
    W104  missing DOCTYPE
    I201  multi-word extent (informational, off by default)

A document is TimeML-strict iff validation yields no ERROR-severity
diagnostic.  Validation never fails fast; the repair engine plans all
its fixes from one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    BOOLEAN_VALUES,
    EVENT_CLASSES,
    FUNCTION_IN_DOCUMENT,
    RELTYPES_BY_KIND,
    TIMEX_TYPES,
    DctBlock,
    Document,
    Event,
    EventInstance,
    Foreign,
    IdIndex,
    Link,
    ORIGIN_MAKEINSTANCE,
    RawSpan,
    Signal,
    SourcePos,
    SYNTHETIC,
    TextRegion,
    Timex3,
    collect_ids,
    id_class,
    instances_of_event,
    resolve,
)

ERROR = "ERROR"
WARNING = "WARNING"
INFO = "INFO"

CODE_SEVERITY = {
    "E001": ERROR,
    "E002": ERROR,
    "E003": ERROR,
    "E004": ERROR,
    "E005": ERROR,
    "E006": ERROR,
    "E007": ERROR,
    "E008": ERROR,
    "E009": ERROR,
    "E010": ERROR,
    "E011": ERROR,
    "E012": ERROR,
    "W101": WARNING,
    "W103": WARNING,
    "W104": WARNING,
    "I201": INFO,
}

UNKNOWN_DCT_VALUE = "XXXX-XX-XX"


@dataclass
class Diagnostic:
    code: str
    severity: str
    message: str
    pos: SourcePos
    involved_ids: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "line": self.pos.line,
            "column": self.pos.column,
            "ids": list(self.involved_ids),
        }

    def __str__(self) -> str:
        ids = f" [{', '.join(self.involved_ids)}]" if self.involved_ids else ""
        return (
            f"{self.code} {self.severity.lower()} "
            f"line {self.pos.line}, col {self.pos.column}: {self.message}{ids}"
        )


def make_diagnostic(code: str, message: str, pos: SourcePos | None, ids: list | None = None) -> Diagnostic:
    return Diagnostic(
        code=code,
        severity=CODE_SEVERITY[code],
        message=message,
        pos=pos if pos is not None else SYNTHETIC,
        involved_ids=[i for i in (ids or []) if i is not None],
    )


def _sorted(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diagnostics, key=lambda d: (d.pos.offset, d.code, d.message))


# ---------------------------------------------------------------------------
# Individual rule groups
# ---------------------------------------------------------------------------

def _walk(doc: Document):
    """Yield (item, container) over the whole layout tree."""
    stack = [(item, None) for item in reversed(doc.layout)]
    while stack:
        item, container = stack.pop()
        yield item, container
        if isinstance(item, DctBlock):
            stack.extend((child, item) for child in reversed(item.children))
        elif isinstance(item, TextRegion):
            stack.extend((child, item) for child in reversed(item.content))


def check_vocabulary(doc: Document) -> list[Diagnostic]:
    """E002: unknown elements and attributes, misplaced elements."""
    out = []
    if doc.root_tag != "TimeML":
        out.append(
            make_diagnostic("E002", f"root element {doc.root_tag}, expected TimeML", SYNTHETIC)
        )
    for name in sorted(doc.root_attrs):
        out.append(make_diagnostic("E002", f"unknown attribute {name} on {doc.root_tag}", SYNTHETIC))
    for item, container in _walk(doc):
        if isinstance(item, Foreign) and item.tag is not None:
            out.append(make_diagnostic("E002", f"unknown element {item.tag}", item.pos))
        elif isinstance(item, (Link, EventInstance)) and isinstance(container, TextRegion):
            name = item.kind if isinstance(item, Link) else "MAKEINSTANCE"
            out.append(
                make_diagnostic(
                    "E002", f"{name} not allowed inside TEXT", item.pos, [item.id]
                )
            )
        if isinstance(item, (Event, Timex3, Signal, Link, EventInstance)):
            elem = item.kind if isinstance(item, Link) else type(item).__name__
            names = {"Event": "EVENT", "Timex3": "TIMEX3", "Signal": "SIGNAL", "EventInstance": "MAKEINSTANCE"}
            elem = names.get(elem, elem)
            for name in sorted(item.extra_attrs):
                out.append(
                    make_diagnostic(
                        "E002", f"unknown attribute {name} on {elem}", item.pos, [item.id]
                    )
                )
    for code, message, pos in doc.parse_deviations:
        out.append(make_diagnostic(code, message, pos))
    return out


def check_required(doc: Document) -> list[Diagnostic]:
    """E003: required attributes that are absent from the model."""
    out = []
    dct_timexes = {id(t) for dct in doc.dcts for t in dct.timexes}
    for event in doc.events:
        if event.eid is None:
            out.append(make_diagnostic("E003", "EVENT missing required attribute eid", event.pos))
        if event.event_class is None:
            out.append(
                make_diagnostic(
                    "E003", "EVENT missing required attribute class", event.pos, [event.eid]
                )
            )
        inline = event.inline_instance
        if inline is not None and inline.eiid is None:
            out.append(
                make_diagnostic(
                    "E003",
                    "EVENT carries instance attributes but no eiid",
                    event.pos,
                    [event.eid],
                )
            )
    for timex in doc.timexes:
        if timex.tid is None:
            out.append(make_diagnostic("E003", "TIMEX3 missing required attribute tid", timex.pos))
        if timex.value is None:
            out.append(
                make_diagnostic(
                    "E003", "TIMEX3 missing required attribute value", timex.pos, [timex.tid]
                )
            )
        unknown_dct_form = id(timex) in dct_timexes and timex.value == UNKNOWN_DCT_VALUE
        if timex.type is None and not unknown_dct_form:
            out.append(
                make_diagnostic(
                    "E003", "TIMEX3 missing required attribute type", timex.pos, [timex.tid]
                )
            )
    for signal in doc.signals:
        if signal.sid is None:
            out.append(make_diagnostic("E003", "SIGNAL missing required attribute sid", signal.pos))
    for inst in doc.instances:
        if inst.origin == ORIGIN_MAKEINSTANCE:
            if inst.eiid is None:
                out.append(
                    make_diagnostic("E003", "MAKEINSTANCE missing required attribute eiid", inst.pos)
                )
            if inst.event_id is None:
                out.append(
                    make_diagnostic(
                        "E003", "MAKEINSTANCE missing required attribute eventID", inst.pos, [inst.eiid]
                    )
                )
    for link in doc.links:
        if link.lid is None:
            out.append(make_diagnostic("E003", f"{link.kind} missing required attribute lid", link.pos))
        if link.rel_type is None:
            out.append(
                make_diagnostic(
                    "E003", f"{link.kind} missing required attribute relType", link.pos, [link.lid]
                )
            )
        if link.source is None:
            out.append(
                make_diagnostic("E003", f"{link.kind} missing source endpoint", link.pos, [link.lid])
            )
        if link.target is None:
            out.append(
                make_diagnostic("E003", f"{link.kind} missing target endpoint", link.pos, [link.lid])
            )
    return out


def _check_id_value(value, cls, attr, pos, owner) -> list[Diagnostic]:
    if value is not None and id_class(value) != cls:
        return [
            make_diagnostic(
                "E004", f"malformed identifier {value!r} for attribute {attr}", pos, [owner]
            )
        ]
    return []


def check_identifiers(doc: Document) -> list[Diagnostic]:
    """E004: identifier grammar, on definitions and on references."""
    out = []
    for event in doc.events:
        out += _check_id_value(event.eid, "eid", "eid", event.pos, None)
        if event.inline_instance is not None:
            out += _check_id_value(event.inline_instance.eiid, "eiid", "eiid", event.pos, event.eid)
    for timex in doc.timexes:
        out += _check_id_value(timex.tid, "tid", "tid", timex.pos, None)
        for attr, value in (
            ("anchorTimeID", timex.anchor_time_id),
            ("beginPoint", timex.begin_point),
            ("endPoint", timex.end_point),
        ):
            if value is not None and id_class(value) is None:
                out.append(
                    make_diagnostic(
                        "E004",
                        f"malformed identifier {value!r} for attribute {attr}",
                        timex.pos,
                        [timex.tid],
                    )
                )
    for signal in doc.signals:
        out += _check_id_value(signal.sid, "sid", "sid", signal.pos, None)
    for inst in doc.instances:
        if inst.origin == ORIGIN_MAKEINSTANCE:
            out += _check_id_value(inst.eiid, "eiid", "eiid", inst.pos, None)
            if inst.event_id is not None and id_class(inst.event_id) is None:
                out.append(
                    make_diagnostic(
                        "E004",
                        f"malformed identifier {inst.event_id!r} for attribute eventID",
                        inst.pos,
                        [inst.eiid],
                    )
                )
        if inst.signal_id is not None and id_class(inst.signal_id) is None:
            out.append(
                make_diagnostic(
                    "E004",
                    f"malformed identifier {inst.signal_id!r} for attribute signalID",
                    inst.pos,
                    [inst.eiid],
                )
            )
    for link in doc.links:
        out += _check_id_value(link.lid, "lid", "lid", link.pos, None)
        for attr, value in (
            (link.source_attr or "source", link.source),
            (link.target_attr or "target", link.target),
            ("signalID", link.signal_id),
        ):
            if value is not None and id_class(value) is None:
                out.append(
                    make_diagnostic(
                        "E004",
                        f"malformed identifier {value!r} for attribute {attr}",
                        link.pos,
                        [link.lid],
                    )
                )
    return out


def check_duplicates(doc: Document, index: IdIndex) -> list[Diagnostic]:
    """E005: identifiers bound more than once."""
    out = []
    for identifier in index.duplicates:
        bindings = index.bindings[identifier]
        pos = bindings[1].pos if len(bindings) > 1 else bindings[0].pos
        out.append(
            make_diagnostic(
                "E005",
                f"identifier {identifier} bound {len(bindings)} times",
                pos,
                [identifier],
            )
        )
    return out


# Slot -> identifier classes that may legally fill it.
_SLOT_CLASSES = {
    ("TLINK", "eventInstanceID"): {"eiid"},
    ("TLINK", "timeID"): {"tid"},
    ("TLINK", "relatedToEventInstance"): {"eiid"},
    ("TLINK", "relatedToTime"): {"tid"},
    ("SLINK", "eventInstanceID"): {"eiid"},
    ("SLINK", "subordinatedEventInstance"): {"eiid"},
    ("ALINK", "eventInstanceID"): {"eiid"},
    ("ALINK", "relatedToEventInstance"): {"eiid"},
}
_KIND_ENDPOINT_CLASSES = {
    "TLINK": {"eiid", "tid"},
    "SLINK": {"eiid"},
    "ALINK": {"eiid"},
}


def check_references(doc: Document, index: IdIndex | None = None) -> list[Diagnostic]:
    """E006 dangling references and E012 slot-class mismatches."""
    if index is None:
        index = collect_ids(doc)
    out = []

    def ref(value, expected: set, attr: str, pos, owner, owner_name: str):
        if value is None or id_class(value) is None:
            return  # absent, or already E004
        cls = id_class(value)
        if cls not in expected:
            out.append(
                make_diagnostic(
                    "E012",
                    f"reference {value} has prefix illegal for {attr} on {owner_name}",
                    pos,
                    [owner, value],
                )
            )
        if resolve(index, value) is None:
            out.append(
                make_diagnostic(
                    "E006",
                    f"{owner_name} references missing identifier {value} ({attr})",
                    pos,
                    [owner, value],
                )
            )

    for link in doc.links:
        name = f"{link.kind} {link.lid}" if link.lid else link.kind
        source_slot = link.source_attr
        target_slot = link.target_attr
        source_expected = _SLOT_CLASSES.get(
            (link.kind, source_slot), _KIND_ENDPOINT_CLASSES[link.kind]
        )
        target_expected = _SLOT_CLASSES.get(
            (link.kind, target_slot), _KIND_ENDPOINT_CLASSES[link.kind]
        )
        ref(link.source, source_expected, source_slot or "source", link.pos, link.lid, name)
        ref(link.target, target_expected, target_slot or "target", link.pos, link.lid, name)
        ref(link.signal_id, {"sid"}, "signalID", link.pos, link.lid, name)
    for timex in doc.timexes:
        name = f"TIMEX3 {timex.tid}" if timex.tid else "TIMEX3"
        ref(timex.anchor_time_id, {"tid"}, "anchorTimeID", timex.pos, timex.tid, name)
        ref(timex.begin_point, {"tid"}, "beginPoint", timex.pos, timex.tid, name)
        ref(timex.end_point, {"tid"}, "endPoint", timex.pos, timex.tid, name)
    for inst in doc.instances:
        name = f"MAKEINSTANCE {inst.eiid}" if inst.eiid else "MAKEINSTANCE"
        if inst.origin == ORIGIN_MAKEINSTANCE:
            ref(inst.event_id, {"eid"}, "eventID", inst.pos, inst.eiid, name)
        ref(inst.signal_id, {"sid"}, "signalID", inst.pos, inst.eiid, name)
    return out


def check_dct(doc: Document) -> list[Diagnostic]:
    """E007 (count) and E008 (content) for the DCT block."""
    out = []
    if len(doc.dcts) != 1:
        pos = doc.dcts[1].pos if len(doc.dcts) > 1 else SYNTHETIC
        out.append(
            make_diagnostic(
                "E007", f"expected exactly one DCT element, found {len(doc.dcts)}", pos
            )
        )
    for dct in doc.dcts:
        timexes = dct.timexes
        if len(timexes) != 1:
            out.append(
                make_diagnostic(
                    "E008",
                    f"DCT must enclose exactly one TIMEX3, found {len(timexes)}",
                    dct.pos,
                )
            )
        # A TEXT region inside DCT is a sanctioned nesting; anything else
        # (text nodes included) is stray content.
        stray = [c for c in dct.stray if not isinstance(c, TextRegion)]
        if stray:
            out.append(
                make_diagnostic(
                    "E008",
                    "DCT contains stray content beside its TIMEX3",
                    stray[0].pos if hasattr(stray[0], "pos") else dct.pos,
                )
            )
        timex = dct.timex
        if timex is not None and timex.value != UNKNOWN_DCT_VALUE:
            fid = timex.function_in_document
            if fid is None:
                out.append(
                    make_diagnostic(
                        "E008",
                        "DCT timex must carry functionInDocument=\"CREATION_TIME\"",
                        timex.pos,
                        [timex.tid],
                    )
                )
            elif fid in FUNCTION_IN_DOCUMENT and fid != "CREATION_TIME":
                out.append(
                    make_diagnostic(
                        "E008",
                        f"DCT timex declares functionInDocument=\"{fid}\", expected CREATION_TIME",
                        timex.pos,
                        [timex.tid],
                    )
                )
    return out


def check_text(doc: Document) -> list[Diagnostic]:
    """E009: exactly one TEXT element."""
    if len(doc.texts) == 1:
        return []
    pos = doc.texts[1].pos if len(doc.texts) > 1 else SYNTHETIC
    return [
        make_diagnostic("E009", f"expected exactly one TEXT element, found {len(doc.texts)}", pos)
    ]


def check_enums(doc: Document) -> list[Diagnostic]:
    """E010: closed-vocabulary attribute values."""
    out = []

    def bad(value, allowed, attr, elem, pos, owner):
        if value is not None and value not in allowed:
            out.append(
                make_diagnostic(
                    "E010", f"illegal value {value!r} for {attr} on {elem}", pos, [owner]
                )
            )

    for event in doc.events:
        bad(event.event_class, EVENT_CLASSES, "class", "EVENT", event.pos, event.eid)
    for timex in doc.timexes:
        bad(timex.type, TIMEX_TYPES, "type", "TIMEX3", timex.pos, timex.tid)
        bad(
            timex.function_in_document,
            FUNCTION_IN_DOCUMENT,
            "functionInDocument",
            "TIMEX3",
            timex.pos,
            timex.tid,
        )
        bad(timex.temporal_function, BOOLEAN_VALUES, "temporalFunction", "TIMEX3", timex.pos, timex.tid)
    for link in doc.links:
        bad(link.rel_type, RELTYPES_BY_KIND[link.kind], "relType", link.kind, link.pos, link.lid)
    return out


def check_makeinstance(doc: Document, index: IdIndex) -> list[Diagnostic]:
    """E011: standalone instantiation where inline attributes suffice."""
    out = []
    for inst in doc.instances:
        if inst.origin != ORIGIN_MAKEINSTANCE or inst.event_id is None:
            continue
        event = resolve(index, inst.event_id)
        if not isinstance(event, Event):
            continue  # dangling or mis-typed: E006/E012 territory
        if len(instances_of_event(doc, inst.event_id)) < 2:
            out.append(
                make_diagnostic(
                    "E011",
                    f"MAKEINSTANCE {inst.eiid} for singly-instantiated event {inst.event_id}; "
                    "instance attributes belong on the EVENT",
                    inst.pos,
                    [inst.eiid, inst.event_id],
                )
            )
    return out


def check_warnings(doc: Document) -> list[Diagnostic]:
    """W103 (annotation outside TEXT) and W104 (missing DOCTYPE)."""
    out = []
    for item in doc.entities_outside_text():
        elem = {"Event": "EVENT", "Timex3": "TIMEX3", "Signal": "SIGNAL"}[type(item).__name__]
        out.append(
            make_diagnostic("W103", f"{elem} {item.id or ''} outside TEXT".replace("  ", " "), item.pos, [item.id])
        )
    if not doc.had_doctype:
        out.append(make_diagnostic("W104", "missing DOCTYPE declaration", SYNTHETIC))
    return out


def check_extents(doc: Document) -> list[Diagnostic]:
    """I201: multi-word EVENT/TIMEX3 extents (informational only)."""
    out = []
    for item in [*doc.events, *doc.timexes]:
        elem = "EVENT" if isinstance(item, Event) else "TIMEX3"
        if len(item.surface_text.split()) > 1:
            out.append(
                make_diagnostic(
                    "I201",
                    f"{elem} {item.id or ''} annotates a multi-word extent".replace("  ", " "),
                    item.pos,
                    [item.id],
                )
            )
    return out


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def validate(
    doc: Document,
    *,
    enable_consistency_lint: bool = False,
    enable_extent_info: bool = False,
) -> list[Diagnostic]:
    """Run the whole rule catalog; diagnostics sorted by position then code."""
    index = collect_ids(doc)
    diagnostics = []
    diagnostics += check_vocabulary(doc)
    diagnostics += check_required(doc)
    diagnostics += check_identifiers(doc)
    diagnostics += check_duplicates(doc, index)
    diagnostics += check_references(doc, index)
    diagnostics += check_dct(doc)
    diagnostics += check_text(doc)
    diagnostics += check_enums(doc)
    diagnostics += check_makeinstance(doc, index)
    diagnostics += check_warnings(doc)
    if enable_extent_info:
        diagnostics += check_extents(doc)
    if enable_consistency_lint and not any(
        d.code in ("E004", "E005", "E006", "E010", "E012") for d in diagnostics
    ):
        from .allen import consistency_lint

        diagnostics += consistency_lint(doc.tlinks, index)
    return _sorted(diagnostics)


def is_strict(doc: Document) -> bool:
    """True iff the document carries no strict-validity violation."""
    return not any(d.severity == ERROR for d in validate(doc))


def validate_bytes(
    data: bytes,
    *,
    enable_consistency_lint: bool = False,
    enable_extent_info: bool = False,
):
    """Parse leniently and validate; fatal parse failures become E001.

    Returns ``(document_or_none, diagnostics)``.
    """
    from .parser import ParseMode, parse

    doc, errors = parse(data, ParseMode.LENIENT)
    if doc is None:
        return None, [
            make_diagnostic("E001", err.message, err.pos) for err in errors
        ]
    return doc, validate(
        doc,
        enable_consistency_lint=enable_consistency_lint,
        enable_extent_info=enable_extent_info,
    )


def diagnostics_to_json(diagnostics: list[Diagnostic]) -> list[dict]:
    """The stable wire form: {code, severity, message, line, column, ids}."""
    return [d.to_json_dict() for d in diagnostics]
