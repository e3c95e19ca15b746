"""TimeML XML reader and writer.

The parser wraps expat: expat provides well-formedness checking and the
byte position of every markup token, while raw text runs are recovered
by slicing the input between tokens.  Slices are stored verbatim in the
document model, which is what makes serialize . parse round-trips
byte-faithful for untouched content.

Two modes:

* STRICT rejects the document on any schema-level deviation (unknown
  element or attribute, missing required attribute, malformed value);
* LENIENT keeps parsing and returns a best-effort document plus the full
  deviation list, which is what the repair engine consumes.

Non-well-formed XML and unsupported encodings are fatal in both modes.
External entity resolution and internal entity declarations are
deliberately disabled.
"""

from __future__ import annotations

import codecs
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from xml.parsers import expat

from .model import (
    ALINK_RELTYPES,
    BOOLEAN_VALUES,
    EVENT_CLASSES,
    FUNCTION_IN_DOCUMENT,
    SLINK_RELTYPES,
    TIMEX_TYPES,
    TLINK_RELTYPES,
    DctBlock,
    Document,
    Event,
    EventInstance,
    Foreign,
    Link,
    ORIGIN_INLINE,
    ORIGIN_MAKEINSTANCE,
    RawSpan,
    Signal,
    SourcePos,
    TextRegion,
    Timex3,
    escape_attr,
    escape_text,
    id_class,
)


class ParseMode(Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class ErrorCategory(Enum):
    NOT_WELL_FORMED = "not-well-formed"
    BAD_ENCODING = "bad-encoding"
    UNKNOWN_ELEMENT = "unknown-element"
    UNKNOWN_ATTRIBUTE = "unknown-attribute"
    MISSING_REQUIRED_ATTRIBUTE = "missing-required-attribute"
    BAD_ATTRIBUTE_VALUE = "bad-attribute-value"


FATAL_CATEGORIES = frozenset([ErrorCategory.NOT_WELL_FORMED, ErrorCategory.BAD_ENCODING])


@dataclass
class ParseError:
    category: ErrorCategory
    message: str
    pos: SourcePos

    def __str__(self) -> str:
        return f"{self.category.value} at line {self.pos.line}, col {self.pos.column}: {self.message}"


KNOWN_ELEMENTS = frozenset(
    ["TimeML", "DCT", "TEXT", "EVENT", "TIMEX3", "SIGNAL", "MAKEINSTANCE", "TLINK", "SLINK", "ALINK"]
)

# Attribute vocabulary per element (TimeML 1.2 plus vForm/pred and the
# inline instantiation attributes on EVENT).
EVENT_ATTRS = frozenset(
    ["eid", "class", "stem", "eiid", "tense", "aspect", "polarity", "pos", "modality", "vForm", "pred"]
)
INLINE_INSTANCE_ATTRS = frozenset(
    ["eiid", "tense", "aspect", "polarity", "pos", "modality", "vForm", "pred"]
)
TIMEX_ATTRS = frozenset(
    [
        "tid",
        "type",
        "value",
        "mod",
        "quant",
        "freq",
        "temporalFunction",
        "functionInDocument",
        "anchorTimeID",
        "beginPoint",
        "endPoint",
    ]
)
SIGNAL_ATTRS = frozenset(["sid"])
MAKEINSTANCE_ATTRS = frozenset(
    [
        "eiid",
        "eventID",
        "tense",
        "aspect",
        "polarity",
        "pos",
        "modality",
        "vForm",
        "pred",
        "cardinality",
        "signalID",
    ]
)
LINK_ATTRS = {
    "TLINK": frozenset(
        ["lid", "relType", "signalID", "eventInstanceID", "timeID", "relatedToEventInstance", "relatedToTime"]
    ),
    "SLINK": frozenset(["lid", "relType", "signalID", "eventInstanceID", "subordinatedEventInstance"]),
    "ALINK": frozenset(["lid", "relType", "signalID", "eventInstanceID", "relatedToEventInstance"]),
}
LINK_SOURCE_ATTRS = {
    "TLINK": ("eventInstanceID", "timeID"),
    "SLINK": ("eventInstanceID",),
    "ALINK": ("eventInstanceID",),
}
LINK_TARGET_ATTRS = {
    "TLINK": ("relatedToEventInstance", "relatedToTime"),
    "SLINK": ("subordinatedEventInstance",),
    "ALINK": ("relatedToEventInstance",),
}

DEFAULT_DOCTYPE = '<!DOCTYPE TimeML SYSTEM "TimeML_1.2.1.dtd">'

_ACCEPTED_ENCODINGS = {"utf-8": "utf-8", "iso8859-1": "iso8859-1", "ascii": "ascii"}

UNKNOWN_DCT_VALUE = "XXXX-XX-XX"


class _Abort(Exception):
    """Raised inside expat handlers to stop parsing after a fatal error."""


@dataclass
class _Frame:
    tag: str
    start: int
    token_end: int
    pos: SourcePos
    obj: object = None
    kind: str = "container"  # container | entity | record | foreign | absorb
    self_closing: bool = False
    # Entity surface assembly: list of (slice, is_cdata).
    parts: list = field(default_factory=list)


class _Builder:
    def __init__(self, data: bytes, mode: ParseMode):
        self.data = data
        self.mode = mode
        self.errors: list[ParseError] = []
        self.doc: Document | None = None
        self.stack: list[_Frame] = []
        self.last_end = 0
        self.encoding = "utf-8"
        self.fatal: ParseError | None = None
        self._newlines = [i for i, b in enumerate(data) if b == 0x0A]

    # -- positions ------------------------------------------------------

    def pos_at(self, offset: int, end_offset: int | None = None) -> SourcePos:
        offset = max(0, min(offset, len(self.data)))
        line_idx = bisect_right(self._newlines, offset - 1)
        line_start = self._newlines[line_idx - 1] + 1 if line_idx else 0
        return SourcePos(
            offset=offset,
            line=line_idx + 1,
            column=offset - line_start + 1,
            end_offset=end_offset if end_offset is not None else offset,
        )

    def attr_pos(self, frame: _Frame, attr: str) -> SourcePos:
        tag_slice = self.data[frame.start : frame.token_end]
        match = re.search(
            rb"(?<![\w:])" + re.escape(attr.encode("ascii")) + rb"\s*=", tag_slice
        )
        if match:
            at = frame.start + match.start()
            return self.pos_at(at, at + len(attr))
        return self.pos_at(frame.start, frame.token_end)

    def decode(self, start: int, end: int) -> str:
        return self.data[start:end].decode(self.encoding, errors="replace")

    # -- error recording ------------------------------------------------

    def error(self, category: ErrorCategory, message: str, pos: SourcePos) -> None:
        self.errors.append(ParseError(category, message, pos))

    def deviation(self, code: str, message: str, pos: SourcePos) -> None:
        if self.doc is not None:
            self.doc.parse_deviations.append((code, message, pos))

    # -- token scanning -------------------------------------------------

    def scan_tag_end(self, start: int) -> int:
        data, n = self.data, len(self.data)
        i, quote = start, 0
        while i < n:
            b = data[i]
            if quote:
                if b == quote:
                    quote = 0
            elif b in (0x22, 0x27):
                quote = b
            elif b == 0x3E:  # >
                return i + 1
            i += 1
        return n

    def _find(self, marker: bytes, start: int) -> int:
        at = self.data.find(marker, start)
        return len(self.data) if at < 0 else at + len(marker)

    # -- container plumbing ---------------------------------------------

    def current_container(self) -> _Frame | None:
        for frame in reversed(self.stack):
            if frame.kind in ("container", "entity", "record"):
                return frame
        return None

    def place(self, item) -> None:
        """Attach a finished node to the innermost real container."""
        frame = self.current_container()
        if frame is None:
            return
        if isinstance(frame.obj, Document):
            frame.obj.layout.append(item)
        elif isinstance(frame.obj, DctBlock):
            frame.obj.children.append(item)
        elif isinstance(frame.obj, TextRegion):
            frame.obj.content.append(item)

    def flush_gap(self, upto: int) -> None:
        if upto <= self.last_end:
            return
        start, end = self.last_end, upto
        self.last_end = upto
        if not self.stack:
            return  # prolog / epilog whitespace is not modelled
        frame = self.current_container()
        if frame is None:
            return
        raw = self.decode(start, end)
        if frame.kind == "entity":
            frame.parts.append((raw, False))
            return
        if frame.kind == "record":
            if raw.strip():
                self.deviation(
                    "E002",
                    f"character data not allowed inside {frame.tag}",
                    self.pos_at(start, end),
                )
            return
        self.place(RawSpan(raw=raw, pos=self.pos_at(start, end)))

    # -- expat handlers ---------------------------------------------------

    def on_xml_decl(self, version, encoding, standalone) -> None:
        if encoding is None:
            return
        try:
            normalized = codecs.lookup(encoding).name
        except LookupError:
            normalized = ""
        accepted = _ACCEPTED_ENCODINGS.get(normalized)
        if accepted is None:
            self.fatal = ParseError(
                ErrorCategory.BAD_ENCODING,
                f"unsupported encoding {encoding!r} (accepted: UTF-8, ISO-8859-1)",
                self.pos_at(0),
            )
            raise _Abort()
        self.encoding = accepted

    def on_doctype(self, name, sysid, pubid, has_internal_subset) -> None:
        at = self.data.find(b"<!DOCTYPE")
        if at >= 0:
            end = self._scan_doctype_end(at)
            raw = self.decode(at, end)
        else:
            raw = DEFAULT_DOCTYPE
        self._doctype_raw = raw

    def _scan_doctype_end(self, start: int) -> int:
        data, n = self.data, len(self.data)
        i, depth = start, 0
        while i < n:
            b = data[i]
            if b == 0x5B:  # [
                depth += 1
            elif b == 0x5D:  # ]
                depth -= 1
            elif b == 0x3E and depth <= 0:  # >
                return i + 1
            i += 1
        return n

    def on_entity_decl(self, *args) -> None:
        self.fatal = ParseError(
            ErrorCategory.NOT_WELL_FORMED,
            "internal entity declarations are not supported",
            self.pos_at(self.parser.CurrentByteIndex),
        )
        raise _Abort()

    def on_start(self, tag: str, attrs: list) -> None:
        start = self.parser.CurrentByteIndex
        self.flush_gap(start)
        token_end = self.scan_tag_end(start)
        self.last_end = token_end
        # expat's position convention for the matching end event of an
        # empty-element tag is not stable; the token itself is.
        self_closing = self.data[start:token_end].rstrip().endswith(b"/>")
        pos = self.pos_at(start, token_end)
        pairs = [(attrs[i], attrs[i + 1]) for i in range(0, len(attrs), 2)]

        if not self.stack:
            self.doc = Document(root_tag=tag, root_attrs=dict(pairs))
            self.doc.had_doctype = getattr(self, "_doctype_raw", None) is not None
            self.doc.doctype_raw = getattr(self, "_doctype_raw", None)
            if tag != "TimeML":
                self.error(
                    ErrorCategory.UNKNOWN_ELEMENT, f"root element {tag}, expected TimeML", pos
                )
            for name, _ in pairs:
                self.error(
                    ErrorCategory.UNKNOWN_ATTRIBUTE, f"unknown attribute {name} on {tag}", pos
                )
            root = _Frame(tag, start, token_end, pos, obj=self.doc)
            root.self_closing = self_closing
            self.stack.append(root)
            return

        enclosing = self.current_container()
        inside_entity = enclosing is not None and enclosing.kind == "entity"

        if inside_entity:
            # Entity extents are flat text; nested markup is flattened into
            # the surface and reported.
            self.deviation(
                "E002", f"element {tag} not allowed inside {enclosing.tag}", pos
            )
            frame = _Frame(tag, start, token_end, pos, kind="absorb")
        else:
            frame = self._open_element(tag, pairs, start, token_end, pos)
        frame.self_closing = self_closing
        self.stack.append(frame)

    def _open_element(self, tag, pairs, start, token_end, pos) -> _Frame:
        frame = _Frame(tag, start, token_end, pos)
        if tag == "DCT":
            frame.obj = DctBlock(pos=pos)
            self._reject_attrs(tag, pairs, frame)
        elif tag == "TEXT":
            frame.obj = TextRegion(pos=pos)
            self._reject_attrs(tag, pairs, frame)
        elif tag == "EVENT":
            frame.kind = "entity"
            frame.obj = self._build_event(pairs, frame)
        elif tag == "TIMEX3":
            frame.kind = "entity"
            frame.obj = self._build_timex(pairs, frame)
        elif tag == "SIGNAL":
            frame.kind = "entity"
            frame.obj = self._build_signal(pairs, frame)
        elif tag == "MAKEINSTANCE":
            frame.kind = "record"
            frame.obj = self._build_instance(pairs, frame)
        elif tag in ("TLINK", "SLINK", "ALINK"):
            frame.kind = "record"
            frame.obj = self._build_link(tag, pairs, frame)
        elif tag == "TimeML":
            frame.kind = "foreign"
            self.error(ErrorCategory.UNKNOWN_ELEMENT, "nested TimeML element", pos)
            self.place(Foreign(raw=self.decode(start, token_end), tag=tag, pos=pos))
        else:
            frame.kind = "foreign"
            self.error(ErrorCategory.UNKNOWN_ELEMENT, f"unknown element {tag}", pos)
            self.place(Foreign(raw=self.decode(start, token_end), tag=tag, pos=pos))
        return frame

    def _reject_attrs(self, tag, pairs, frame) -> None:
        for name, _ in pairs:
            self.error(
                ErrorCategory.UNKNOWN_ATTRIBUTE,
                f"unknown attribute {name} on {tag}",
                self.attr_pos(frame, name),
            )

    def _require(self, present: dict, names: tuple, tag: str, frame: _Frame) -> None:
        for name in names:
            if name not in present:
                self.error(
                    ErrorCategory.MISSING_REQUIRED_ATTRIBUTE,
                    f"{tag} missing required attribute {name}",
                    frame.pos,
                )

    def _check_id(self, value: str, cls: str, attr: str, frame: _Frame) -> None:
        if id_class(value) != cls:
            self.error(
                ErrorCategory.BAD_ATTRIBUTE_VALUE,
                f"malformed identifier {value!r} for attribute {attr}",
                self.attr_pos(frame, attr),
            )

    def _check_ref(self, value: str, attr: str, frame: _Frame) -> None:
        if id_class(value) is None:
            self.error(
                ErrorCategory.BAD_ATTRIBUTE_VALUE,
                f"malformed identifier {value!r} for attribute {attr}",
                self.attr_pos(frame, attr),
            )

    def _check_enum(self, value: str, allowed: frozenset, attr: str, tag: str, frame: _Frame) -> None:
        if value not in allowed:
            self.error(
                ErrorCategory.BAD_ATTRIBUTE_VALUE,
                f"illegal value {value!r} for {attr} on {tag}",
                self.attr_pos(frame, attr),
            )

    def _split_attrs(self, tag: str, pairs, known: frozenset, frame: _Frame):
        """Partition attributes into known (dict) and extras (dict)."""
        present: dict[str, str] = {}
        extras: dict[str, str] = {}
        for name, value in pairs:
            if name in known and name not in present:
                present[name] = value
            else:
                if name in known:
                    message = f"conflicting duplicate attribute {name} on {tag}"
                else:
                    message = f"unknown attribute {name} on {tag}"
                self.error(ErrorCategory.UNKNOWN_ATTRIBUTE, message, self.attr_pos(frame, name))
                extras[name] = value
        return present, extras

    def _build_event(self, pairs, frame) -> Event:
        present, extras = self._split_attrs("EVENT", pairs, EVENT_ATTRS, frame)
        self._require(present, ("eid", "class"), "EVENT", frame)
        if "eid" in present:
            self._check_id(present["eid"], "eid", "eid", frame)
        if "class" in present:
            self._check_enum(present["class"], EVENT_CLASSES, "class", "EVENT", frame)
        event = Event(
            eid=present.get("eid"),
            event_class=present.get("class"),
            stem=present.get("stem"),
            extra_attrs=extras,
            pos=frame.pos,
        )
        inline_given = [a for a in INLINE_INSTANCE_ATTRS if a in present]
        if inline_given:
            if "eiid" in present:
                self._check_id(present["eiid"], "eiid", "eiid", frame)
            else:
                self.error(
                    ErrorCategory.MISSING_REQUIRED_ATTRIBUTE,
                    "EVENT carries instance attributes but no eiid",
                    frame.pos,
                )
            instance = EventInstance(
                eiid=present.get("eiid"),
                event_id=event.eid,
                tense=present.get("tense"),
                aspect=present.get("aspect"),
                polarity=present.get("polarity"),
                pos_tag=present.get("pos"),
                modality=present.get("modality"),
                v_form=present.get("vForm"),
                pred=present.get("pred"),
                origin=ORIGIN_INLINE,
                pos=frame.pos,
            )
            event.inline_instance = instance
        return event

    def _build_timex(self, pairs, frame) -> Timex3:
        present, extras = self._split_attrs("TIMEX3", pairs, TIMEX_ATTRS, frame)
        in_dct = any(isinstance(f.obj, DctBlock) for f in self.stack)
        required = ("tid", "value") if (
            in_dct and present.get("value") == UNKNOWN_DCT_VALUE
        ) else ("tid", "type", "value")
        self._require(present, required, "TIMEX3", frame)
        if "tid" in present:
            self._check_id(present["tid"], "tid", "tid", frame)
        if "type" in present:
            self._check_enum(present["type"], TIMEX_TYPES, "type", "TIMEX3", frame)
        if "functionInDocument" in present:
            self._check_enum(
                present["functionInDocument"], FUNCTION_IN_DOCUMENT, "functionInDocument", "TIMEX3", frame
            )
        if "temporalFunction" in present:
            self._check_enum(
                present["temporalFunction"], BOOLEAN_VALUES, "temporalFunction", "TIMEX3", frame
            )
        for ref_attr in ("anchorTimeID", "beginPoint", "endPoint"):
            if ref_attr in present:
                self._check_ref(present[ref_attr], ref_attr, frame)
        return Timex3(
            tid=present.get("tid"),
            type=present.get("type"),
            value=present.get("value"),
            mod=present.get("mod"),
            quant=present.get("quant"),
            freq=present.get("freq"),
            temporal_function=present.get("temporalFunction"),
            function_in_document=present.get("functionInDocument"),
            anchor_time_id=present.get("anchorTimeID"),
            begin_point=present.get("beginPoint"),
            end_point=present.get("endPoint"),
            extra_attrs=extras,
            pos=frame.pos,
        )

    def _build_signal(self, pairs, frame) -> Signal:
        present, extras = self._split_attrs("SIGNAL", pairs, SIGNAL_ATTRS, frame)
        self._require(present, ("sid",), "SIGNAL", frame)
        if "sid" in present:
            self._check_id(present["sid"], "sid", "sid", frame)
        return Signal(sid=present.get("sid"), extra_attrs=extras, pos=frame.pos)

    def _build_instance(self, pairs, frame) -> EventInstance:
        present, extras = self._split_attrs("MAKEINSTANCE", pairs, MAKEINSTANCE_ATTRS, frame)
        self._require(present, ("eiid", "eventID"), "MAKEINSTANCE", frame)
        if "eiid" in present:
            self._check_id(present["eiid"], "eiid", "eiid", frame)
        if "eventID" in present:
            self._check_ref(present["eventID"], "eventID", frame)
        if "signalID" in present:
            self._check_ref(present["signalID"], "signalID", frame)
        return EventInstance(
            eiid=present.get("eiid"),
            event_id=present.get("eventID"),
            tense=present.get("tense"),
            aspect=present.get("aspect"),
            polarity=present.get("polarity"),
            pos_tag=present.get("pos"),
            modality=present.get("modality"),
            v_form=present.get("vForm"),
            pred=present.get("pred"),
            cardinality=present.get("cardinality"),
            signal_id=present.get("signalID"),
            origin=ORIGIN_MAKEINSTANCE,
            extra_attrs=extras,
            pos=frame.pos,
        )

    def _build_link(self, kind: str, pairs, frame) -> Link:
        present, extras = self._split_attrs(kind, pairs, LINK_ATTRS[kind], frame)
        self._require(present, ("lid", "relType"), kind, frame)
        if "lid" in present:
            self._check_id(present["lid"], "lid", "lid", frame)
        if "relType" in present:
            allowed = {"TLINK": TLINK_RELTYPES, "SLINK": SLINK_RELTYPES, "ALINK": ALINK_RELTYPES}[kind]
            self._check_enum(present["relType"], allowed, "relType", kind, frame)
        if "signalID" in present:
            self._check_ref(present["signalID"], "signalID", frame)

        def pick(slot_attrs: tuple, slot_name: str):
            given = [a for a in slot_attrs if a in present]
            if not given:
                self.error(
                    ErrorCategory.MISSING_REQUIRED_ATTRIBUTE,
                    f"{kind} missing {slot_name} attribute ({' or '.join(slot_attrs)})",
                    frame.pos,
                )
                return None, None
            if len(given) > 1:
                for name in given[1:]:
                    self.error(
                        ErrorCategory.BAD_ATTRIBUTE_VALUE,
                        f"attribute {name} conflicts with {given[0]} on {kind}",
                        self.attr_pos(frame, name),
                    )
                    extras[name] = present[name]
            attr = given[0]
            self._check_ref(present[attr], attr, frame)
            return present[attr], attr

        source, source_attr = pick(LINK_SOURCE_ATTRS[kind], "source")
        target, target_attr = pick(LINK_TARGET_ATTRS[kind], "target")
        return Link(
            lid=present.get("lid"),
            kind=kind,
            rel_type=present.get("relType"),
            source=source,
            target=target,
            signal_id=present.get("signalID"),
            source_attr=source_attr,
            target_attr=target_attr,
            extra_attrs=extras,
            pos=frame.pos,
        )

    def on_end(self, tag: str) -> None:
        idx = self.parser.CurrentByteIndex
        frame = self.stack[-1]
        if frame.self_closing:
            end_offset = frame.token_end
        else:
            self.flush_gap(idx)
            end_offset = self.scan_tag_end(idx)
            self.last_end = end_offset
        self.stack.pop()
        full_pos = SourcePos(
            offset=frame.pos.offset,
            line=frame.pos.line,
            column=frame.pos.column,
            end_offset=end_offset,
        )

        if frame.kind == "absorb":
            # Flattened markup inside an entity: inner text flows to the
            # enclosing entity, the tags themselves are dropped.
            return
        if frame.kind == "foreign":
            if end_offset > frame.token_end:
                raw = self.decode(idx, end_offset)
                self.place(Foreign(raw=raw, tag=frame.tag, pos=self.pos_at(idx, end_offset)))
            return

        obj = frame.obj
        if isinstance(obj, Document):
            return
        if isinstance(obj, (Event, Timex3, Signal)):
            raw_parts = frame.parts
            obj.pos = full_pos
            obj.surface_text = "".join(
                (part if is_cdata else RawSpan(part).text) for part, is_cdata in raw_parts
            )
            if any(is_cdata for _, is_cdata in raw_parts):
                obj.surface_raw = None
            else:
                obj.surface_raw = "".join(part for part, _ in raw_parts)
            self.place(obj)
            doc = self.doc
            if isinstance(obj, Event):
                doc.events.append(obj)
                if obj.inline_instance is not None:
                    doc.instances.append(obj.inline_instance)
            elif isinstance(obj, Timex3):
                doc.timexes.append(obj)
            else:
                doc.signals.append(obj)
            return
        if isinstance(obj, DctBlock):
            obj.pos = full_pos
            self.place(obj)
            self.doc.dcts.append(obj)
            return
        if isinstance(obj, TextRegion):
            obj.pos = full_pos
            self.place(obj)
            self.doc.texts.append(obj)
            return
        if isinstance(obj, EventInstance):
            obj.pos = full_pos
            self.place(obj)
            self.doc.instances.append(obj)
            return
        if isinstance(obj, Link):
            obj.pos = full_pos
            self.place(obj)
            {"TLINK": self.doc.tlinks, "SLINK": self.doc.slinks, "ALINK": self.doc.alinks}[
                obj.kind
            ].append(obj)
            return

    def on_comment(self, text: str) -> None:
        start = self.parser.CurrentByteIndex
        self.flush_gap(start)
        end = self._find(b"-->", start)
        self.last_end = end
        frame = self.current_container()
        if frame is not None and frame.kind in ("entity", "record"):
            return  # legal XML, but extents and records carry no comments
        self.place(Foreign(raw=self.decode(start, end), tag=None, pos=self.pos_at(start, end)))

    def on_pi(self, target: str, data: str) -> None:
        start = self.parser.CurrentByteIndex
        self.flush_gap(start)
        end = self._find(b"?>", start)
        self.last_end = end
        frame = self.current_container()
        if frame is not None and frame.kind in ("entity", "record"):
            return
        self.place(Foreign(raw=self.decode(start, end), tag=None, pos=self.pos_at(start, end)))

    def on_cdata_start(self) -> None:
        start = self.parser.CurrentByteIndex
        self.flush_gap(start)
        end = self._find(b"]]>", start)
        self.last_end = end
        inner = self.decode(start + len("<![CDATA["), end - len("]]>"))
        frame = self.current_container()
        if frame is None:
            return
        if frame.kind == "entity":
            frame.parts.append((inner, True))
        elif frame.kind == "record":
            if inner.strip():
                self.deviation(
                    "E002",
                    f"character data not allowed inside {frame.tag}",
                    self.pos_at(start, end),
                )
        else:
            self.place(RawSpan(raw=inner, pos=self.pos_at(start, end), is_cdata=True))

    # -- driver -----------------------------------------------------------

    def run(self):
        parser = expat.ParserCreate()
        self.parser = parser
        parser.ordered_attributes = True
        parser.buffer_text = True
        parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
        parser.XmlDeclHandler = self.on_xml_decl
        parser.StartDoctypeDeclHandler = self.on_doctype
        parser.EntityDeclHandler = self.on_entity_decl
        parser.StartElementHandler = self.on_start
        parser.EndElementHandler = self.on_end
        parser.CommentHandler = self.on_comment
        parser.ProcessingInstructionHandler = self.on_pi
        parser.StartCdataSectionHandler = self.on_cdata_start
        parser.ExternalEntityRefHandler = lambda *args: 1  # never resolved

        try:
            parser.Parse(self.data, True)
        except _Abort:
            return None, [self.fatal]
        except expat.ExpatError as exc:
            category = ErrorCategory.NOT_WELL_FORMED
            if exc.code in (
                expat.errors.codes[expat.errors.XML_ERROR_UNKNOWN_ENCODING],
                expat.errors.codes[expat.errors.XML_ERROR_INCORRECT_ENCODING],
                expat.errors.codes[expat.errors.XML_ERROR_PARTIAL_CHAR],
            ):
                category = ErrorCategory.BAD_ENCODING
            else:
                offset = max(0, min(parser.ErrorByteIndex, len(self.data) - 1))
                if self.data and self.data[offset] >= 0x80:
                    category = ErrorCategory.BAD_ENCODING
            fatal = ParseError(
                category,
                expat.errors.messages[exc.code],
                self.pos_at(parser.ErrorByteIndex),
            )
            return None, [fatal]

        if self.doc is None:
            return None, [
                ParseError(ErrorCategory.NOT_WELL_FORMED, "no root element", self.pos_at(0))
            ]
        self.doc.source_bytes = self.data
        self.doc.source_encoding = self.encoding
        return self.doc, self.errors


def parse(data: bytes | str, mode: ParseMode = ParseMode.STRICT):
    """Parse TimeML bytes.

    Returns ``(document, errors)``.  The document is None when the input
    is not well-formed XML or uses an unsupported encoding; in STRICT
    mode it is also withheld when any schema-level deviation was found.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    doc, errors = _Builder(data, mode).run()
    if doc is None:
        return None, errors
    if mode is ParseMode.STRICT and errors:
        return None, errors
    return doc, errors


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_ATTR_NAME = {
    "event_class": "class",
    "pos_tag": "pos",
    "v_form": "vForm",
    "function_in_document": "functionInDocument",
    "temporal_function": "temporalFunction",
    "anchor_time_id": "anchorTimeID",
    "begin_point": "beginPoint",
    "end_point": "endPoint",
    "signal_id": "signalID",
    "event_id": "eventID",
    "rel_type": "relType",
}


def _element(name: str, attrs: dict, content: str) -> str:
    rendered = "".join(
        f' {key}="{escape_attr(value)}"'
        for key, value in sorted(attrs.items())
        if value is not None
    )
    if content:
        return f"<{name}{rendered}>{content}</{name}>"
    return f"<{name}{rendered} />"


def _entity_content(entity) -> str:
    if entity.surface_raw is not None:
        return entity.surface_raw
    return escape_text(entity.surface_text)


def _emit_event(event: Event) -> str:
    attrs = {"eid": event.eid, "class": event.event_class, "stem": event.stem}
    inst = event.inline_instance
    if inst is not None:
        attrs.update(
            eiid=inst.eiid,
            tense=inst.tense,
            aspect=inst.aspect,
            polarity=inst.polarity,
            pos=inst.pos_tag,
            modality=inst.modality,
            vForm=inst.v_form,
            pred=inst.pred,
        )
    attrs.update(event.extra_attrs)
    return _element("EVENT", attrs, _entity_content(event))


def _emit_timex(timex: Timex3) -> str:
    attrs = {
        "tid": timex.tid,
        "type": timex.type,
        "value": timex.value,
        "mod": timex.mod,
        "quant": timex.quant,
        "freq": timex.freq,
        "temporalFunction": timex.temporal_function,
        "functionInDocument": timex.function_in_document,
        "anchorTimeID": timex.anchor_time_id,
        "beginPoint": timex.begin_point,
        "endPoint": timex.end_point,
    }
    attrs.update(timex.extra_attrs)
    return _element("TIMEX3", attrs, _entity_content(timex))


def _emit_signal(signal: Signal) -> str:
    attrs = {"sid": signal.sid}
    attrs.update(signal.extra_attrs)
    return _element("SIGNAL", attrs, _entity_content(signal))


def _emit_instance(inst: EventInstance) -> str:
    attrs = {
        "eiid": inst.eiid,
        "eventID": inst.event_id,
        "tense": inst.tense,
        "aspect": inst.aspect,
        "polarity": inst.polarity,
        "pos": inst.pos_tag,
        "modality": inst.modality,
        "vForm": inst.v_form,
        "pred": inst.pred,
        "cardinality": inst.cardinality,
        "signalID": inst.signal_id,
    }
    attrs.update(inst.extra_attrs)
    return _element("MAKEINSTANCE", attrs, "")


def _default_slot(link: Link, endpoint: str | None, role: str) -> str:
    if role == "source":
        names = LINK_SOURCE_ATTRS[link.kind]
    else:
        names = LINK_TARGET_ATTRS[link.kind]
    if link.kind == "TLINK" and endpoint is not None and id_class(endpoint) == "tid":
        return names[1]
    return names[0]


def _emit_link(link: Link) -> str:
    attrs = {"lid": link.lid, "relType": link.rel_type, "signalID": link.signal_id}
    if link.source is not None:
        attrs[link.source_attr or _default_slot(link, link.source, "source")] = link.source
    if link.target is not None:
        attrs[link.target_attr or _default_slot(link, link.target, "target")] = link.target
    attrs.update(link.extra_attrs)
    return _element(link.kind, attrs, "")


def _emit_item(item) -> str:
    if isinstance(item, RawSpan):
        if item.is_cdata:
            return f"<![CDATA[{item.raw}]]>"
        return item.raw
    if isinstance(item, Foreign):
        return item.raw
    if isinstance(item, DctBlock):
        return "<DCT>" + "".join(_emit_item(child) for child in item.children) + "</DCT>"
    if isinstance(item, TextRegion):
        return "<TEXT>" + "".join(_emit_item(child) for child in item.content) + "</TEXT>"
    if isinstance(item, Event):
        return _emit_event(item)
    if isinstance(item, Timex3):
        return _emit_timex(item)
    if isinstance(item, Signal):
        return _emit_signal(item)
    if isinstance(item, EventInstance):
        return _emit_instance(item)
    if isinstance(item, Link):
        return _emit_link(item)
    raise TypeError(f"cannot serialize {type(item).__name__}")


def serialize(doc: Document) -> bytes:
    """Write a document back to TimeML XML (always UTF-8, with DOCTYPE)."""
    parts = ['<?xml version="1.0" encoding="UTF-8"?>\n']
    parts.append((doc.doctype_raw or DEFAULT_DOCTYPE) + "\n")
    root_attrs = "".join(
        f' {key}="{escape_attr(value)}"' for key, value in sorted(doc.root_attrs.items())
    )
    parts.append(f"<{doc.root_tag}{root_attrs}>")
    parts.extend(_emit_item(item) for item in doc.layout)
    parts.append(f"</{doc.root_tag}>\n")
    return "".join(parts).encode("utf-8")
