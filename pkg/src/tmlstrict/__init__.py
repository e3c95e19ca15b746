"""tmlstrict: TimeML parsing, strict validation, repair and interval linting.

The library side of the ``tmlstrict`` command-line tool.  Typical use:

    from tmlstrict import parse, ParseMode, validate, is_strict, repair

    doc, errors = parse(data, ParseMode.LENIENT)
    diagnostics = validate(doc, enable_consistency_lint=True)
    result = repair(doc)
"""

from .allen import (
    AllenRelation,
    classify,
    compose,
    compose_basic,
    consistency_lint,
    endpoint_oracle,
    from_allen,
    inverse,
    to_allen,
)
from .model import (
    DctBlock,
    Document,
    Event,
    EventInstance,
    Foreign,
    IdIndex,
    Link,
    RawSpan,
    Signal,
    SourcePos,
    TextRegion,
    Timex3,
    collect_ids,
    id_class,
    resolve,
)
from .parser import ErrorCategory, ParseError, ParseMode, parse, serialize
from .repair import (
    RepairAction,
    RepairConfig,
    RepairResult,
    apply_actions,
    plan,
    repair,
    repair_bytes,
    wrap_text_heuristic,
)
from .validator import (
    Diagnostic,
    diagnostics_to_json,
    is_strict,
    validate,
    validate_bytes,
)

__version__ = "0.1.0"

__all__ = [
    "AllenRelation",
    "DctBlock",
    "Diagnostic",
    "Document",
    "ErrorCategory",
    "Event",
    "EventInstance",
    "Foreign",
    "IdIndex",
    "Link",
    "ParseError",
    "ParseMode",
    "RawSpan",
    "RepairAction",
    "RepairConfig",
    "RepairResult",
    "Signal",
    "SourcePos",
    "TextRegion",
    "Timex3",
    "apply_actions",
    "classify",
    "collect_ids",
    "compose",
    "compose_basic",
    "consistency_lint",
    "diagnostics_to_json",
    "endpoint_oracle",
    "from_allen",
    "id_class",
    "inverse",
    "is_strict",
    "parse",
    "plan",
    "repair",
    "repair_bytes",
    "resolve",
    "serialize",
    "to_allen",
    "validate",
    "validate_bytes",
    "wrap_text_heuristic",
]
