import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmlstrict import Document, ParseMode, RawSpan, TextRegion, Timex3, parse, serialize
from tmlstrict.parser import DEFAULT_DOCTYPE, ErrorCategory

from conftest import corpus_paths, fixture_bytes


def lenient(data):
    return parse(data, ParseMode.LENIENT)


class TestParseBasics:
    def test_example_dct_fields(self):
        doc, errors = parse(fixture_bytes("valid/v02_example_dct.tml"), ParseMode.STRICT)
        assert errors == []
        timex = doc.dct.timex
        assert timex.tid == "t0"
        assert timex.value == "2013-03-22"
        assert timex.function_in_document == "CREATION_TIME"
        assert timex.temporal_function == "false"
        assert timex.surface_text == "March 22, 2013"

    def test_minimal_skeleton(self):
        doc, errors = parse(b"<TimeML><TEXT></TEXT></TimeML>", ParseMode.STRICT)
        assert errors == []
        assert doc.dct is None
        assert doc.text_region is not None
        assert doc.text_region.content == []

    def test_unknown_dct_form(self):
        doc, errors = parse(fixture_bytes("valid/v03_unknown_dct.tml"), ParseMode.STRICT)
        assert errors == []
        timex = doc.dct.timex
        assert timex.value == "XXXX-XX-XX"
        assert timex.type is None
        assert timex.surface_text == ""

    def test_bad_eid_positioned_in_lenient(self):
        data = fixture_bytes("errors/e004_bad_eid.tml")
        doc, errors = lenient(data)
        assert doc is not None
        [error] = errors
        assert error.category is ErrorCategory.BAD_ATTRIBUTE_VALUE
        assert data[error.pos.offset : error.pos.offset + 3] == b"eid"

    def test_strict_withholds_document_on_deviation(self):
        doc, errors = parse(fixture_bytes("errors/e004_bad_eid.tml"), ParseMode.STRICT)
        assert doc is None
        assert errors

    def test_not_well_formed_fatal_in_both_modes(self):
        data = fixture_bytes("errors/e001_not_well_formed.tml")
        for mode in (ParseMode.STRICT, ParseMode.LENIENT):
            doc, errors = parse(data, mode)
            assert doc is None
            assert errors[0].category is ErrorCategory.NOT_WELL_FORMED

    def test_bad_encoding_fatal(self):
        doc, errors = lenient(fixture_bytes("errors/e001_bad_encoding.tml"))
        assert doc is None
        assert errors[0].category is ErrorCategory.BAD_ENCODING

    def test_unsupported_declared_encoding(self):
        doc, errors = lenient(b'<?xml version="1.0" encoding="UTF-16LE"?>\n<TimeML/>')
        assert doc is None
        assert errors[0].category is ErrorCategory.BAD_ENCODING

    def test_latin1_input_decoded(self):
        doc, errors = parse(fixture_bytes("valid/v12_latin1.tml"), ParseMode.STRICT)
        assert errors == []
        assert "Café" in doc.text_region.plain_text()

    def test_position_soundness(self):
        for path in corpus_paths("errors"):
            data = path.read_bytes()
            _, errors = lenient(data)
            for error in errors:
                assert 0 <= error.pos.offset <= len(data), path

    def test_lenient_never_fabricates_entities(self):
        for path in corpus_paths("valid", "errors"):
            data = path.read_bytes()
            doc, _ = lenient(data)
            if doc is None:
                continue
            assert len(doc.events) == len(re.findall(rb"<EVENT[\s/>]", data)), path
            assert len(doc.timexes) == len(re.findall(rb"<TIMEX3[\s/>]", data)), path

    def test_inline_instance_extraction(self):
        doc, _ = parse(fixture_bytes("valid/v05_links.tml"), ParseMode.STRICT)
        inst = doc.events[0].inline_instance
        assert inst is not None
        assert inst.eiid == "ei1"
        assert inst.event_id == "e1"
        assert inst.origin == "INLINE"
        assert inst in doc.instances

    def test_makeinstance_origin(self):
        doc, _ = parse(fixture_bytes("valid/v08_multi_instance.tml"), ParseMode.STRICT)
        origins = sorted(inst.origin for inst in doc.instances)
        assert origins == ["INLINE", "MAKEINSTANCE"]

    def test_conflicting_endpoint_attributes(self):
        data = (
            b"<TimeML><TEXT/>"
            b'<TLINK lid="l1" relType="BEFORE" eventInstanceID="ei1" timeID="t1"'
            b' relatedToTime="t2" /></TimeML>'
        )
        doc, errors = lenient(data)
        [link] = doc.tlinks
        assert link.source == "ei1"
        assert link.extra_attrs == {"timeID": "t1"}
        assert any(e.category is ErrorCategory.BAD_ATTRIBUTE_VALUE for e in errors)

    def test_doctype_recorded_verbatim(self):
        doc, _ = parse(fixture_bytes("valid/v01_minimal.tml"), ParseMode.STRICT)
        assert doc.had_doctype
        assert doc.doctype_raw == DEFAULT_DOCTYPE

    def test_entity_lists_preserve_document_order(self):
        doc, _ = parse(fixture_bytes("valid/v05_links.tml"), ParseMode.STRICT)
        assert [e.eid for e in doc.events] == ["e1", "e2", "e3", "e4"]
        offsets = [e.pos.offset for e in doc.events]
        assert offsets == sorted(offsets)

    def test_str_input_accepted(self):
        doc, errors = parse("<TimeML><TEXT>ok</TEXT></TimeML>", ParseMode.STRICT)
        assert errors == []
        assert doc.text_region.plain_text() == "ok"


class TestSerialize:
    def test_synthesized_unknown_dct_byte_shape(self):
        from tmlstrict.model import DctBlock

        doc = Document()
        timex = Timex3(tid="t0", value="XXXX-XX-XX")
        doc.dcts.append(DctBlock(children=[timex]))
        doc.timexes.append(timex)
        doc.layout.append(doc.dcts[0])
        doc.texts.append(TextRegion(content=[RawSpan(raw="x")]))
        doc.layout.append(doc.texts[0])
        out = serialize(doc)
        assert b'<DCT><TIMEX3 tid="t0" value="XXXX-XX-XX" /></DCT>' in out
        assert out.startswith(b'<?xml version="1.0" encoding="UTF-8"?>\n<!DOCTYPE TimeML')

    def test_escaping_fixpoint(self):
        doc = Document()
        doc.texts.append(TextRegion(content=[RawSpan(raw="a &lt; b &amp; c")]))
        doc.layout.append(doc.texts[0])
        out = serialize(doc)
        reparsed, errors = parse(out, ParseMode.STRICT)
        assert errors == []
        assert reparsed.text_region.plain_text() == "a < b & c"

    def test_emit_always_utf8(self):
        doc, _ = parse(fixture_bytes("valid/v12_latin1.tml"), ParseMode.STRICT)
        out = serialize(doc)
        assert b"encoding=\"UTF-8\"" in out
        out.decode("utf-8")  # must not raise

    def test_attribute_order_alphabetical(self):
        doc, _ = parse(
            b'<TimeML><TEXT><EVENT eid="e1" class="STATE">x</EVENT></TEXT></TimeML>',
            ParseMode.LENIENT,
        )
        assert b'<EVENT class="STATE" eid="e1">' in serialize(doc)


class TestRoundTrip:
    @pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.name)
    def test_parse_serialize_parse_identity(self, path):
        doc, errors = lenient(path.read_bytes())
        if doc is None:
            pytest.skip("fatal parse failure fixture")
        again, errors2 = lenient(serialize(doc))
        assert again is not None
        assert again == doc

    @pytest.mark.parametrize(
        "path",
        [p for p in corpus_paths("valid")],
        ids=lambda p: p.name,
    )
    def test_clean_parse_raw_segments_byte_identical(self, path):
        doc, errors = lenient(path.read_bytes())
        assert errors == []
        again, _ = lenient(serialize(doc))

        def raw_segments(d):
            return [
                seg.raw
                for text in d.texts
                for seg in text.content
                if isinstance(seg, RawSpan)
            ]

        assert raw_segments(again) == raw_segments(doc)

    @settings(max_examples=60, deadline=None)
    @given(st.text(min_size=0, max_size=60))
    def test_surface_text_survives_round_trip(self, text):
        # XML cannot carry control characters or lone surrogates.
        if any(ord(c) < 32 and c not in "\t\n" for c in text):
            return
        if any(0xD800 <= ord(c) <= 0xDFFF for c in text):
            return
        if "\r" in text:
            return  # XML parsers normalize CR; not representable verbatim
        doc = Document()
        doc.texts.append(TextRegion(content=[RawSpan(raw="")]))
        doc.layout.append(doc.texts[0])
        from tmlstrict.model import Event

        event = Event(eid="e1", event_class="OCCURRENCE", surface_text=text)
        doc.events.append(event)
        doc.texts[0].content.append(event)
        reparsed, errors = parse(serialize(doc), ParseMode.STRICT)
        assert errors == []
        assert reparsed.events[0].surface_text == text

    def test_cdata_preserved(self):
        data = fixture_bytes("valid/v18_cdata.tml")
        doc, errors = lenient(data)
        assert errors == []
        assert "a < b && c > d" in doc.text_region.plain_text()
        again, _ = lenient(serialize(doc))
        assert again == doc
