"""Acceptance suite: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line
per criterion.  Every tolerance (runtime bounds, trial counts, corpus
size) is pinned here.
"""

import json
import random
import time

import jsonschema
import pytest
from scipy.optimize import linprog

from tmlstrict import (
    ParseMode,
    RawSpan,
    apply_actions,
    collect_ids,
    consistency_lint,
    is_strict,
    parse,
    repair,
    repair_bytes,
    serialize,
    validate,
    validate_bytes,
    wrap_text_heuristic,
)
from tmlstrict.allen import AllenRelation, classify, compose_basic, endpoint_oracle, inverse, to_allen
from tmlstrict.cli import main as cli_main
from tmlstrict.model import Document, Link, Timex3

from conftest import FIXTURES, corpus_paths, fixture_bytes, fixture_path


def _ok(number: int, name: str) -> None:
    print(f"ACCEPTANCE {number} {name}: PASS")


# -------------------------------------------------------------------------
# 1. Rule-catalog soundness
# -------------------------------------------------------------------------

def test_criterion_1_rule_catalog_soundness():
    started = time.perf_counter()
    seen_codes = set()
    for path in corpus_paths("errors"):
        expected = path.name[:4].upper()  # e006_... -> E006
        _, diagnostics = validate_bytes(path.read_bytes())
        error_codes = {d.code for d in diagnostics if d.severity == "ERROR"}
        assert error_codes == {expected}, f"{path.name}: {sorted(error_codes)}"
        assert all(d.severity == "ERROR" for d in diagnostics), path.name
        seen_codes.add(expected)
    assert seen_codes == {f"E{n:03d}" for n in range(1, 13)}
    # a clean fixture triggers nothing at all
    _, diagnostics = validate_bytes(fixture_bytes("valid/v02_example_dct.tml"))
    assert diagnostics == []
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"rule-catalog suite took {elapsed:.2f}s"
    _ok(1, "rule-catalog soundness")


# -------------------------------------------------------------------------
# 2. Example conformance
# -------------------------------------------------------------------------

def test_criterion_2_example_conformance():
    # (a) canonical creation-time block validates clean
    doc, errors = parse(fixture_bytes("valid/v02_example_dct.tml"), ParseMode.STRICT)
    assert errors == [] and validate(doc) == []
    timex = doc.dct.timex
    assert (timex.tid, timex.value, timex.function_in_document) == (
        "t0",
        "2013-03-22",
        "CREATION_TIME",
    )

    # (b) the underspecified unknown-DCT form validates clean
    doc, errors = parse(fixture_bytes("valid/v03_unknown_dct.tml"), ParseMode.STRICT)
    assert errors == [] and validate(doc) == []
    assert doc.dct.timex.value == "XXXX-XX-XX"

    # (c) raw newswire without TEXT is wrapped starting at the body
    data = fixture_bytes("repair/r05_wrap_text.tml")
    doc, _ = parse(data, ParseMode.LENIENT)
    span = wrap_text_heuristic(doc)
    body_line_start = data.rfind(b"\n", 0, data.index(b"Iraq's")) + 1
    assert span is not None and span[0] == body_line_start
    result = repair(doc)
    assert "WRAP_TEXT" in [a.kind for a in result.actions]
    assert result.document.text_region.plain_text().startswith("Iraq's Saddam Hussein")
    assert is_strict(result.document)

    # (d) the contradictory link pair stays valid, one advisory only
    doc, errors = parse(fixture_bytes("valid/v07_inconsistent_pair.tml"), ParseMode.STRICT)
    assert errors == []
    diagnostics = validate(doc, enable_consistency_lint=True)
    assert [d.code for d in diagnostics] == ["W101"]
    assert not any(d.severity == "ERROR" for d in diagnostics)
    _ok(2, "example conformance")


# -------------------------------------------------------------------------
# 3. DURING mapping
# -------------------------------------------------------------------------

def test_criterion_3_during_mapping():
    assert to_allen("DURING") is AllenRelation.OVERLAPPED_BY
    assert to_allen("DURING_INV") is AllenRelation.OVERLAPS

    # concrete model: a starts inside b and persists beyond its end
    a, b = (0.9, 1.5), (0.0, 1.0)
    assert b[0] < a[0] < b[1] and a[1] > b[1]
    realized = classify(*a, *b)
    tlink_reltypes = [
        "BEFORE", "AFTER", "INCLUDES", "IS_INCLUDED", "DURING", "DURING_INV",
        "SIMULTANEOUS", "IDENTITY", "BEGINS", "BEGUN_BY", "ENDS", "ENDED_BY",
        "IBEFORE", "IAFTER",
    ]
    satisfied = [rt for rt in tlink_reltypes if to_allen(rt) is realized]
    assert satisfied == ["DURING"]

    # and that is exactly the sample annotation's link
    doc, errors = parse(fixture_bytes("valid/v06_during.tml"), ParseMode.STRICT)
    assert errors == []
    [link] = doc.tlinks
    assert (link.lid, link.source, link.rel_type, link.target) == ("l1", "ei1", "DURING", "t1")
    assert (link.source_attr, link.target_attr) == ("eventInstanceID", "relatedToTime")
    _ok(3, "DURING mapping")


# -------------------------------------------------------------------------
# 4. Composition-table equivalence
# -------------------------------------------------------------------------

def test_criterion_4_composition_table_equivalence():
    started = time.perf_counter()
    for r1 in AllenRelation:
        for r2 in AllenRelation:
            derived = compose_basic(r1, r2)
            truth = endpoint_oracle(r1, r2)
            assert derived == truth, (r1.name, r2.name)
            flipped = compose_basic(inverse(r2), inverse(r1))
            assert flipped == frozenset(inverse(x) for x in derived), (r1.name, r2.name)
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"composition comparison took {elapsed:.2f}s"
    _ok(4, "composition-table equivalence")


# -------------------------------------------------------------------------
# 5. Round-trip fidelity
# -------------------------------------------------------------------------

def _all_raw_spans(doc):
    out = []
    stack = list(doc.layout)
    while stack:
        item = stack.pop(0)
        if isinstance(item, RawSpan):
            out.append(item.raw)
        elif hasattr(item, "children"):
            stack = list(item.children) + stack
        elif hasattr(item, "content"):
            stack = list(item.content) + stack
    return out


def test_criterion_5_round_trip():
    parsed = 0
    for path in corpus_paths():
        data = path.read_bytes()
        doc, errors = parse(data, ParseMode.LENIENT)
        if doc is None:
            continue  # the fatal-encoding/wellformedness fixtures
        parsed += 1
        again, reparse_errors = parse(serialize(doc), ParseMode.LENIENT)
        assert again is not None, path
        assert again == doc, path
        if not errors:
            assert _all_raw_spans(again) == _all_raw_spans(doc), path
    assert parsed >= 30, f"corpus too small: {parsed}"
    _ok(5, "round-trip fidelity")


# -------------------------------------------------------------------------
# 6. Repair properties
# -------------------------------------------------------------------------

def test_criterion_6_repair_properties():
    for path in corpus_paths("repair"):
        data = path.read_bytes()
        result = repair_bytes(data)
        assert result.document is not None, path

        # strictness: no irreparables means the output validates clean
        if not result.irreparable:
            assert is_strict(result.document), path
        else:
            assert not is_strict(result.document), path

        # idempotence: a second repair plans nothing
        assert repair(result.document).actions == [], path

        # conservativity: surface text inside TEXT unchanged mod escaping
        doc, _ = parse(data, ParseMode.LENIENT)
        if doc is not None and doc.text_region is not None:
            assert result.document.texts[0].plain_text() == doc.text_region.plain_text(), path

        # replay: the log reproduces the repaired document
        if doc is not None:
            again = repair(doc)
            assert apply_actions(doc, again.actions) == again.document, path
    _ok(6, "repair properties")


# -------------------------------------------------------------------------
# 7. Consistency-lint soundness
# -------------------------------------------------------------------------

_LP_CONSTRAINTS = {
    # (strict "x < y" pairs, equality pairs) over endpoint indexes
    # 0=a.start 1=a.end 2=b.start 3=b.end
    "BEFORE": ([(1, 2)], []),
    "AFTER": ([(3, 0)], []),
    "IBEFORE": ([], [(1, 2)]),
    "IAFTER": ([], [(3, 0)]),
    "INCLUDES": ([(0, 2), (3, 1)], []),
    "IS_INCLUDED": ([(2, 0), (1, 3)], []),
    "BEGINS": ([(1, 3)], [(0, 2)]),
    "BEGUN_BY": ([(3, 1)], [(0, 2)]),
    "ENDS": ([(2, 0)], [(1, 3)]),
    "ENDED_BY": ([(0, 2)], [(1, 3)]),
    "SIMULTANEOUS": ([], [(0, 2), (1, 3)]),
    "IDENTITY": ([], [(0, 2), (1, 3)]),
    "DURING": ([(2, 0), (0, 3), (3, 1)], []),
    "DURING_INV": ([(0, 2), (2, 1), (1, 3)], []),
}


def _model_exists(n_intervals, constraints) -> bool:
    """Rational-endpoint feasibility via linear programming.

    Strict inequalities get a unit slack; scale-invariance over the
    rationals makes that equivalent to satisfiability.
    """
    n_vars = 2 * n_intervals
    a_ub, b_ub, a_eq, b_eq = [], [], [], []

    def lt(p, q):  # x_p + 1 <= x_q
        row = [0.0] * n_vars
        row[p], row[q] = 1.0, -1.0
        a_ub.append(row)
        b_ub.append(-1.0)

    def eq(p, q):
        row = [0.0] * n_vars
        row[p], row[q] = 1.0, -1.0
        a_eq.append(row)
        b_eq.append(0.0)

    for i in range(n_intervals):
        lt(2 * i, 2 * i + 1)  # start < end
    for rel, i, j in constraints:
        strict, equalities = _LP_CONSTRAINTS[rel]
        endpoint = {0: 2 * i, 1: 2 * i + 1, 2: 2 * j, 3: 2 * j + 1}
        for p, q in strict:
            lt(endpoint[p], endpoint[q])
        for p, q in equalities:
            eq(endpoint[p], endpoint[q])
    result = linprog(
        c=[0.0] * n_vars,
        A_ub=a_ub or None,
        b_ub=b_ub or None,
        A_eq=a_eq or None,
        b_eq=b_eq or None,
        bounds=[(None, None)] * n_vars,
        method="highs",
    )
    return result.status == 0


def test_criterion_7_lint_soundness():
    rng = random.Random(271828)
    reltypes = sorted(_LP_CONSTRAINTS)
    feasible_seen = 0
    for _ in range(1000):
        n = rng.randint(2, 5)
        m = rng.randint(1, 6)
        constraints = []
        for _ in range(m):
            i, j = rng.sample(range(n), 2)
            constraints.append((rng.choice(reltypes), i, j))

        doc = Document()
        for k in range(n):
            doc.timexes.append(Timex3(tid=f"t{k + 1}", type="DATE", value="2013"))
        doc.tlinks.extend(
            Link(lid=f"l{idx + 1}", kind="TLINK", rel_type=rel, source=f"t{i + 1}", target=f"t{j + 1}")
            for idx, (rel, i, j) in enumerate(constraints)
        )
        warnings = consistency_lint(doc.tlinks, collect_ids(doc))
        if _model_exists(n, constraints):
            feasible_seen += 1
            assert warnings == [], constraints
    assert feasible_seen >= 200, f"only {feasible_seen} satisfiable trials"
    _ok(7, f"lint soundness ({feasible_seen} satisfiable trials, 0 false positives)")


# -------------------------------------------------------------------------
# 8. CLI contract
# -------------------------------------------------------------------------

_DIAGNOSTIC_SCHEMA = {
    "type": "object",
    "required": ["code", "severity", "message", "line", "column", "ids"],
    "additionalProperties": False,
    "properties": {
        "code": {"type": "string", "pattern": "^[EWI][0-9]{3}$"},
        "severity": {"enum": ["ERROR", "WARNING", "INFO"]},
        "message": {"type": "string"},
        "line": {"type": "integer"},
        "column": {"type": "integer"},
        "ids": {"type": "array", "items": {"type": "string"}},
    },
}
_ACTION_SCHEMA = {
    "type": "object",
    "required": ["kind", "before", "after", "line", "column", "rationale"],
    "additionalProperties": False,
    "properties": {
        "kind": {"type": "string"},
        "before": {"type": "string"},
        "after": {"type": "string"},
        "line": {"type": "integer"},
        "column": {"type": "integer"},
        "rationale": {"type": "string"},
    },
}
_REPORT_SCHEMA = {
    "type": "object",
    "required": ["files", "totals"],
    "additionalProperties": False,
    "properties": {
        "files": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path", "strict", "diagnostics"],
                "properties": {
                    "path": {"type": "string"},
                    "strict": {"type": "boolean"},
                    "diagnostics": {"type": "array", "items": _DIAGNOSTIC_SCHEMA},
                    "actions": {"type": "array", "items": _ACTION_SCHEMA},
                },
                "additionalProperties": False,
            },
        },
        "totals": {
            "type": "object",
            "required": ["files", "errors", "warnings", "infos", "by_code"],
            "additionalProperties": False,
            "properties": {
                "files": {"type": "integer"},
                "errors": {"type": "integer"},
                "warnings": {"type": "integer"},
                "infos": {"type": "integer"},
                "by_code": {"type": "object", "additionalProperties": {"type": "integer"}},
            },
        },
    },
}


def test_criterion_8_cli_contract(capsys, tmp_path):
    # exit codes across the whole corpus
    for path in corpus_paths("valid"):
        assert cli_main(["validate", str(path)]) == 0, path
    for path in corpus_paths("errors"):
        expected = 2 if path.name.startswith("e001") else 1
        assert cli_main(["validate", str(path)]) == expected, path
    for path in corpus_paths("repair"):
        code = cli_main(["repair", "--out", str(tmp_path / "out"), str(path)])
        expected = 1 if path.name[:3] in ("r09", "r12") else 0
        assert code == expected, path
        if expected == 0:
            assert cli_main(["validate", str(tmp_path / "out" / path.name)]) == 0, path
    capsys.readouterr()

    # JSON payloads validate against the documented schema
    cli_main(["validate", "--json", "--consistency", str(FIXTURES / "valid"), str(FIXTURES / "errors")])
    validate_payload = capsys.readouterr().out
    jsonschema.validate(json.loads(validate_payload), _REPORT_SCHEMA)

    cli_main(["repair", "--json", "--dry-run", str(FIXTURES / "repair")])
    repair_payload = capsys.readouterr().out
    jsonschema.validate(json.loads(repair_payload), _REPORT_SCHEMA)

    # byte-identical across repeated runs on identical input
    cli_main(["validate", "--json", "--consistency", str(FIXTURES / "valid"), str(FIXTURES / "errors")])
    second = capsys.readouterr().out
    assert second == validate_payload
    _ok(8, "CLI contract")
