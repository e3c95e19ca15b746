"""In-memory model of a TimeML document.

Every annotation element is represented by a dataclass carrying the raw
attribute strings found in the source (no coercion: invalid values must
survive a lenient parse so the validator and the repair engine can see
them).  Documents keep an ordered ``layout`` of segments which is the
single source of truth for serialization; the ``events`` / ``timexes`` /
... lists are document-ordered views over the same objects.

Documents and id indexes are treated as immutable after construction:
nothing in the public API mutates them, so they can be shared freely
between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Attribute vocabularies of TimeML 1.2 plus the verb-form / predicate
# additions.  Values are validated by the strict validator, not here.
EVENT_CLASSES = frozenset(
    ["OCCURRENCE", "PERCEPTION", "REPORTING", "ASPECTUAL", "STATE", "I_STATE", "I_ACTION"]
)
TIMEX_TYPES = frozenset(["DATE", "TIME", "DURATION", "SET"])
FUNCTION_IN_DOCUMENT = frozenset(
    [
        "CREATION_TIME",
        "PUBLICATION_TIME",
        "RELEASE_TIME",
        "RECEPTION_TIME",
        "EXPIRATION_TIME",
        "MODIFICATION_TIME",
        "NONE",
    ]
)
BOOLEAN_VALUES = frozenset(["true", "false"])

TLINK_RELTYPES = frozenset(
    [
        "BEFORE",
        "AFTER",
        "INCLUDES",
        "IS_INCLUDED",
        "DURING",
        "DURING_INV",
        "SIMULTANEOUS",
        "IDENTITY",
        "BEGINS",
        "BEGUN_BY",
        "ENDS",
        "ENDED_BY",
        "IBEFORE",
        "IAFTER",
    ]
)
SLINK_RELTYPES = frozenset(
    ["MODAL", "EVIDENTIAL", "NEG_EVIDENTIAL", "FACTIVE", "COUNTER_FACTIVE", "CONDITIONAL"]
)
ALINK_RELTYPES = frozenset(
    ["INITIATES", "CULMINATES", "TERMINATES", "CONTINUES", "REINITIATES"]
)
RELTYPES_BY_KIND = {
    "TLINK": TLINK_RELTYPES,
    "SLINK": SLINK_RELTYPES,
    "ALINK": ALINK_RELTYPES,
}

# Identifier grammars.  t0 is legal (conventionally the document creation
# time); every other class requires a positive integer part.
ID_GRAMMARS = {
    "eiid": re.compile(r"ei[1-9][0-9]*\Z"),
    "eid": re.compile(r"e[1-9][0-9]*\Z"),
    "tid": re.compile(r"t(0|[1-9][0-9]*)\Z"),
    "sid": re.compile(r"s[1-9][0-9]*\Z"),
    "lid": re.compile(r"l[1-9][0-9]*\Z"),
}


def id_class(identifier: str) -> str | None:
    """Return the identifier class ('eid', 'eiid', ...) or None if malformed.

    'ei...' is tested before 'e...' so the two grammars stay disjoint.
    """
    for cls in ("eiid", "eid", "tid", "sid", "lid"):
        if ID_GRAMMARS[cls].match(identifier):
            return cls
    return None


@dataclass(frozen=True)
class SourcePos:
    """Byte span of a construct in the original file (1-based line/column)."""

    offset: int
    line: int
    column: int
    end_offset: int
    synthetic: bool = False

    @classmethod
    def for_synthetic(cls) -> "SourcePos":
        return cls(offset=-1, line=0, column=0, end_offset=-1, synthetic=True)


SYNTHETIC = SourcePos.for_synthetic()


@dataclass(eq=True)
class RawSpan:
    """A run of untagged source text, stored exactly as written (escaped).

    ``raw`` is compared for equality; the position is presentation data.
    ``is_cdata`` marks content that came from a CDATA section and must be
    re-emitted inside one.
    """

    raw: str
    pos: SourcePos = field(default=SYNTHETIC, compare=False)
    is_cdata: bool = False

    @property
    def text(self) -> str:
        """The decoded character content of the span."""
        if self.is_cdata:
            return self.raw
        return unescape(self.raw)


@dataclass(eq=True)
class Foreign:
    """Markup preserved verbatim but not modelled: unknown start/end tags,
    comments and processing instructions.  ``tag`` is the element name for
    unknown tags and None for comments/PIs (which are not violations)."""

    raw: str
    tag: str | None = None
    pos: SourcePos = field(default=SYNTHETIC, compare=False)


@dataclass(eq=True)
class Timex3:
    tid: str | None = None
    type: str | None = None
    value: str | None = None
    mod: str | None = None
    quant: str | None = None
    freq: str | None = None
    temporal_function: str | None = None
    function_in_document: str | None = None
    anchor_time_id: str | None = None
    begin_point: str | None = None
    end_point: str | None = None
    surface_text: str = ""
    surface_raw: str | None = field(default=None, compare=False)
    extra_attrs: dict[str, str] = field(default_factory=dict)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    @property
    def id(self) -> str | None:
        return self.tid


@dataclass(eq=True)
class Event:
    eid: str | None = None
    event_class: str | None = None
    stem: str | None = None
    surface_text: str = ""
    surface_raw: str | None = field(default=None, compare=False)
    inline_instance: "EventInstance | None" = None
    extra_attrs: dict[str, str] = field(default_factory=dict)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    @property
    def id(self) -> str | None:
        return self.eid


@dataclass(eq=True)
class Signal:
    sid: str | None = None
    surface_text: str = ""
    surface_raw: str | None = field(default=None, compare=False)
    extra_attrs: dict[str, str] = field(default_factory=dict)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    @property
    def id(self) -> str | None:
        return self.sid


# How an event instance entered the document.
ORIGIN_INLINE = "INLINE"
ORIGIN_MAKEINSTANCE = "MAKEINSTANCE"


@dataclass(eq=True)
class EventInstance:
    eiid: str | None = None
    event_id: str | None = None
    tense: str | None = None
    aspect: str | None = None
    polarity: str | None = None
    pos_tag: str | None = None
    modality: str | None = None
    v_form: str | None = None
    pred: str | None = None
    cardinality: str | None = None
    signal_id: str | None = None
    origin: str = ORIGIN_MAKEINSTANCE
    extra_attrs: dict[str, str] = field(default_factory=dict)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    @property
    def id(self) -> str | None:
        return self.eiid


@dataclass(eq=True)
class Link:
    """A TLINK, SLINK or ALINK.

    ``source_attr`` / ``target_attr`` remember the attribute names that
    carried the endpoints in the source so that lenient round-trips are
    faithful; constructed links may leave them None and get canonical
    names on serialization.
    """

    lid: str | None = None
    kind: str = "TLINK"
    rel_type: str | None = None
    source: str | None = None
    target: str | None = None
    signal_id: str | None = None
    source_attr: str | None = None
    target_attr: str | None = None
    extra_attrs: dict[str, str] = field(default_factory=dict)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    @property
    def id(self) -> str | None:
        return self.lid


@dataclass(eq=True)
class DctBlock:
    """The document-creation-time wrapper.

    ``children`` keeps everything found inside the element in order; a
    well-formed block has exactly one Timex3 child and nothing else.
    """

    children: list = field(default_factory=list)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    @property
    def timexes(self) -> list[Timex3]:
        return [c for c in self.children if isinstance(c, Timex3)]

    @property
    def timex(self) -> Timex3 | None:
        timexes = self.timexes
        return timexes[0] if timexes else None

    @property
    def stray(self) -> list:
        """Child nodes other than Timex3 elements (text nodes included)."""
        return [c for c in self.children if not isinstance(c, Timex3)]


@dataclass(eq=True)
class TextRegion:
    """The TEXT element: an ordered mix of raw spans and annotations."""

    content: list = field(default_factory=list)
    pos: SourcePos = field(default=SYNTHETIC, compare=False)

    def plain_text(self) -> str:
        """Linguistic content with entity surface text inlined."""
        parts = []
        for item in self.content:
            if isinstance(item, RawSpan):
                parts.append(item.text)
            elif isinstance(item, (Event, Timex3, Signal)):
                parts.append(item.surface_text)
        return "".join(parts)


@dataclass(eq=True)
class Document:
    """A parsed or constructed TimeML document.

    ``layout`` holds the root element's children in document order and is
    what the serializer walks; the entity/link lists are views in the same
    order.  ``dcts``/``texts`` list every DCT/TEXT block so count rules can
    be checked; strict documents have exactly one of each.
    """

    root_tag: str = "TimeML"
    root_attrs: dict[str, str] = field(default_factory=dict)
    layout: list = field(default_factory=list)
    dcts: list[DctBlock] = field(default_factory=list)
    texts: list[TextRegion] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    timexes: list[Timex3] = field(default_factory=list)
    signals: list[Signal] = field(default_factory=list)
    instances: list[EventInstance] = field(default_factory=list)
    tlinks: list[Link] = field(default_factory=list)
    slinks: list[Link] = field(default_factory=list)
    alinks: list[Link] = field(default_factory=list)
    had_doctype: bool = field(default=False, compare=False)
    doctype_raw: str | None = field(default=None, compare=False)
    # Deviations seen at parse time that the model cannot represent
    # (e.g. a nested annotation that was flattened); (code, message, pos).
    # Parse metadata, not document structure: excluded from equality.
    parse_deviations: list = field(default_factory=list, compare=False)
    source_bytes: bytes | None = field(default=None, compare=False)
    source_encoding: str = field(default="utf-8", compare=False)

    @property
    def dct(self) -> DctBlock | None:
        return self.dcts[0] if self.dcts else None

    @property
    def text_region(self) -> TextRegion | None:
        return self.texts[0] if self.texts else None

    @property
    def links(self) -> list[Link]:
        return [*self.tlinks, *self.slinks, *self.alinks]

    @property
    def preamble(self) -> str:
        """Raw content at root level before the first TEXT element."""
        parts = []
        for item in self.layout:
            if isinstance(item, TextRegion):
                break
            if isinstance(item, (RawSpan, Foreign)):
                parts.append(item.raw)
        return "".join(parts)

    @property
    def source_map(self) -> dict[str, SourcePos]:
        """Identifier -> source position for every identified element."""
        result: dict[str, SourcePos] = {}
        for item in _identified_items(self):
            if item.id is not None and item.id not in result:
                result[item.id] = item.pos
        return result

    def entities_outside_text(self) -> list:
        """EVENT/TIMEX3/SIGNAL elements at root level (DCT content excluded)."""
        return [
            item for item in self.layout if isinstance(item, (Event, Timex3, Signal))
        ]


def _identified_items(doc: Document):
    yield from doc.events
    yield from doc.timexes
    yield from doc.signals
    yield from doc.instances
    yield from doc.links


@dataclass
class IdIndex:
    """First-binding-wins map of identifier -> element.

    ``duplicates`` lists identifiers bound more than once, in the order
    their second binding appeared; duplicates are data at this layer, the
    validator turns them into diagnostics.
    """

    table: dict[str, object] = field(default_factory=dict)
    duplicates: list[str] = field(default_factory=list)
    bindings: dict[str, list] = field(default_factory=dict)

    def __contains__(self, identifier: str) -> bool:
        return identifier in self.table


def collect_ids(doc: Document) -> IdIndex:
    """Index every eid, eiid, tid, sid and lid defined in the document."""
    index = IdIndex()
    for item in _identified_items(doc):
        identifier = item.id
        if identifier is None:
            continue
        index.bindings.setdefault(identifier, []).append(item)
        if identifier in index.table:
            if identifier not in index.duplicates:
                index.duplicates.append(identifier)
        else:
            index.table[identifier] = item
    return index


def resolve(index: IdIndex, identifier: str):
    """The element bound to ``identifier`` (first binding), or None."""
    return index.table.get(identifier)


def instances_of_event(doc: Document, eid: str) -> list[EventInstance]:
    return [inst for inst in doc.instances if inst.event_id == eid]


_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;"}
_UNESCAPES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}
_ENTITY_RE = re.compile(r"&(#x[0-9a-fA-F]+|#[0-9]+|[A-Za-z][A-Za-z0-9._-]*);")


def escape_text(text: str) -> str:
    """Canonical escaping for character content."""
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def escape_attr(value: str) -> str:
    """Canonical escaping for attribute values (double-quoted)."""
    return escape_text(value).replace('"', "&quot;")


def _entity_sub(match: re.Match) -> str:
    body = match.group(1)
    if body.startswith("#x") or body.startswith("#X"):
        return chr(int(body[2:], 16))
    if body.startswith("#"):
        return chr(int(body[1:]))
    # Unknown named references are kept literal; the raw form is what
    # round-trips, so this only affects the decoded view.
    return _UNESCAPES.get(body, match.group(0))


def unescape(raw: str) -> str:
    """Decode entity and character references in a raw source slice."""
    return _ENTITY_RE.sub(_entity_sub, raw)
