"""Allen interval relations, the TimeML mapping, and consistency linting.

Relation sets are plain frozensets of :class:`AllenRelation`.  The
composition table is not typed in by hand: it is derived symbolically by
composing endpoint-order constraints through the three-valued point
algebra.  An independent brute-force oracle (`endpoint_oracle`) derives
the same table by enumerating every weak ordering of six interval
endpoints, so the two constructions check each other.

The TimeML vocabulary maps onto the thirteen basic relations totally:
DURING is overlapped_by (the first interval starts inside the second and
persists beyond its end) and DURING_INV is overlaps; SIMULTANEOUS and
IDENTITY both project to equals.
"""

from __future__ import annotations

import itertools
from enum import Enum
from functools import lru_cache

from .model import IdIndex, Link, resolve
from .validator import Diagnostic, make_diagnostic


class AllenRelation(Enum):
    BEFORE = "before"
    AFTER = "after"
    MEETS = "meets"
    MET_BY = "met_by"
    OVERLAPS = "overlaps"
    OVERLAPPED_BY = "overlapped_by"
    STARTS = "starts"
    STARTED_BY = "started_by"
    DURING = "during"
    CONTAINS = "contains"
    FINISHES = "finishes"
    FINISHED_BY = "finished_by"
    EQUALS = "equals"

    def __repr__(self) -> str:
        return f"AllenRelation.{self.name}"


ALL_RELATIONS = frozenset(AllenRelation)
FULL: frozenset[AllenRelation] = ALL_RELATIONS
EMPTY: frozenset[AllenRelation] = frozenset()

_INVERSE_PAIRS = [
    (AllenRelation.BEFORE, AllenRelation.AFTER),
    (AllenRelation.MEETS, AllenRelation.MET_BY),
    (AllenRelation.OVERLAPS, AllenRelation.OVERLAPPED_BY),
    (AllenRelation.STARTS, AllenRelation.STARTED_BY),
    (AllenRelation.DURING, AllenRelation.CONTAINS),
    (AllenRelation.FINISHES, AllenRelation.FINISHED_BY),
    (AllenRelation.EQUALS, AllenRelation.EQUALS),
]
_INVERSE = {}
for _a, _b in _INVERSE_PAIRS:
    _INVERSE[_a] = _b
    _INVERSE[_b] = _a


def inverse(relation: AllenRelation) -> AllenRelation:
    """The relation that holds with the arguments swapped."""
    return _INVERSE[relation]


def inverse_set(relations: frozenset[AllenRelation]) -> frozenset[AllenRelation]:
    return frozenset(_INVERSE[r] for r in relations)


# TimeML TLINK relType -> basic Allen relation (total on the vocabulary).
TIMEML_TO_ALLEN = {
    "BEFORE": AllenRelation.BEFORE,
    "AFTER": AllenRelation.AFTER,
    "IBEFORE": AllenRelation.MEETS,
    "IAFTER": AllenRelation.MET_BY,
    "INCLUDES": AllenRelation.CONTAINS,
    "IS_INCLUDED": AllenRelation.DURING,
    "BEGINS": AllenRelation.STARTS,
    "BEGUN_BY": AllenRelation.STARTED_BY,
    "ENDS": AllenRelation.FINISHES,
    "ENDED_BY": AllenRelation.FINISHED_BY,
    "SIMULTANEOUS": AllenRelation.EQUALS,
    "IDENTITY": AllenRelation.EQUALS,
    "DURING": AllenRelation.OVERLAPPED_BY,
    "DURING_INV": AllenRelation.OVERLAPS,
}

_ALLEN_TO_TIMEML = {
    allen: timeml
    for timeml, allen in TIMEML_TO_ALLEN.items()
    if timeml not in ("IDENTITY",)
}


def to_allen(rel_type: str) -> AllenRelation:
    """Map a TLINK relType to its Allen relation."""
    return TIMEML_TO_ALLEN[rel_type]


def from_allen(relation: AllenRelation, identity_hint: bool = False) -> str:
    """Right inverse of :func:`to_allen`.

    ``equals`` maps back to IDENTITY when the hint says the endpoints
    co-refer, otherwise to SIMULTANEOUS.
    """
    if relation is AllenRelation.EQUALS:
        return "IDENTITY" if identity_hint else "SIMULTANEOUS"
    return _ALLEN_TO_TIMEML[relation]


# ---------------------------------------------------------------------------
# Endpoint semantics
# ---------------------------------------------------------------------------

def classify(a_start, a_end, b_start, b_end) -> AllenRelation:
    """The basic relation between intervals (a_start, a_end) and (b_start, b_end).

    Endpoints may be any comparable numbers with start < end.
    """
    if a_end < b_start:
        return AllenRelation.BEFORE
    if b_end < a_start:
        return AllenRelation.AFTER
    if a_end == b_start:
        return AllenRelation.MEETS
    if b_end == a_start:
        return AllenRelation.MET_BY
    if a_start == b_start:
        if a_end == b_end:
            return AllenRelation.EQUALS
        return AllenRelation.STARTS if a_end < b_end else AllenRelation.STARTED_BY
    if a_end == b_end:
        return AllenRelation.FINISHES if a_start > b_start else AllenRelation.FINISHED_BY
    if a_start > b_start and a_end < b_end:
        return AllenRelation.DURING
    if a_start < b_start and a_end > b_end:
        return AllenRelation.CONTAINS
    return AllenRelation.OVERLAPS if a_start < b_start else AllenRelation.OVERLAPPED_BY


# Point-order pattern of each basic relation: constraints among the four
# endpoints x-, x+, y-, y+, as (index_p, index_q, order) with points
# numbered x-=0, x+=1, y-=2, y+=3.
_PATTERNS = {
    AllenRelation.BEFORE: [(1, 2, "<")],
    AllenRelation.MEETS: [(1, 2, "=")],
    AllenRelation.OVERLAPS: [(0, 2, "<"), (2, 1, "<"), (1, 3, "<")],
    AllenRelation.STARTS: [(0, 2, "="), (1, 3, "<")],
    AllenRelation.DURING: [(2, 0, "<"), (1, 3, "<")],
    AllenRelation.FINISHES: [(2, 0, "<"), (1, 3, "=")],
    AllenRelation.EQUALS: [(0, 2, "="), (1, 3, "=")],
}


def _pattern(relation: AllenRelation) -> list[tuple[int, int, str]]:
    if relation in _PATTERNS:
        return _PATTERNS[relation]
    # Inverse relation: swap the roles of x and y.
    swap = {0: 2, 1: 3, 2: 0, 3: 1}
    return [(swap[p], swap[q], order) for p, q, order in _PATTERNS[inverse(relation)]]


# Three-valued point algebra over {<, =, >}; sets are frozensets of the
# three symbols.  Only convex sets arise in the derivations below, for
# which path consistency is a complete decision procedure.
_PA_ALL = frozenset("<=>")
_PA_COMPOSE = {
    ("<", "<"): frozenset("<"),
    ("<", "="): frozenset("<"),
    ("<", ">"): _PA_ALL,
    ("=", "<"): frozenset("<"),
    ("=", "="): frozenset("="),
    ("=", ">"): frozenset(">"),
    (">", "<"): _PA_ALL,
    (">", "="): frozenset(">"),
    (">", ">"): frozenset(">"),
}
_PA_INVERT = {"<": ">", "=": "=", ">": "<"}


def _pa_compose(s1: frozenset, s2: frozenset) -> frozenset:
    out = set()
    for a in s1:
        for b in s2:
            out |= _PA_COMPOSE[(a, b)]
    return frozenset(out)


def _pa_propagate(net: list[list[frozenset]]) -> bool:
    """Path consistency over a small point network; False on empty edge."""
    n = len(net)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for k in range(n):
                    if k == i or k == j:
                        continue
                    refined = net[i][j] & _pa_compose(net[i][k], net[k][j])
                    if refined != net[i][j]:
                        if not refined:
                            return False
                        net[i][j] = refined
                        net[j][i] = frozenset(_PA_INVERT[s] for s in refined)
                        changed = True
    return True


def _fresh_net(n: int) -> list[list[frozenset]]:
    net = [[_PA_ALL for _ in range(n)] for _ in range(n)]
    for i in range(n):
        net[i][i] = frozenset("=")
    return net


def _constrain(net, p: int, q: int, order: str) -> None:
    net[p][q] = net[p][q] & frozenset(order)
    net[q][p] = net[q][p] & frozenset(_PA_INVERT[order])


def _apply_pattern(net, relation: AllenRelation, base_x: int, base_y: int) -> None:
    """Impose a relation's endpoint pattern between the intervals whose
    start points sit at net indexes base_x and base_y."""
    offset = {0: base_x, 1: base_x + 1, 2: base_y, 3: base_y + 1}
    for p, q, order in _pattern(relation):
        _constrain(net, offset[p], offset[q], order)


def _interval_axioms(net, *bases: int) -> None:
    for base in bases:
        _constrain(net, base, base + 1, "<")


@lru_cache(maxsize=1)
def _composition_table() -> dict:
    """Derive all 169 compositions through point-algebra propagation.

    For each pair (r1, r2) a six-point network encodes A r1 B and B r2 C;
    a basic relation is in the composition iff adding its pattern on
    (A, C) leaves the network satisfiable.
    """
    table = {}
    for r1 in AllenRelation:
        for r2 in AllenRelation:
            base = _fresh_net(6)
            _interval_axioms(base, 0, 2, 4)
            _apply_pattern(base, r1, 0, 2)
            _apply_pattern(base, r2, 2, 4)
            if not _pa_propagate(base):
                table[(r1, r2)] = EMPTY
                continue
            feasible = set()
            for candidate in AllenRelation:
                trial = [row[:] for row in base]
                _apply_pattern(trial, candidate, 0, 4)
                if _pa_propagate(trial):
                    feasible.add(candidate)
            table[(r1, r2)] = frozenset(feasible)
    return table


def compose_basic(r1: AllenRelation, r2: AllenRelation) -> frozenset[AllenRelation]:
    return _composition_table()[(r1, r2)]


def compose(s1: frozenset[AllenRelation], s2: frozenset[AllenRelation]) -> frozenset[AllenRelation]:
    """Composition of relation sets: union over the basic pairs."""
    table = _composition_table()
    out = set()
    for r1 in s1:
        for r2 in s2:
            out |= table[(r1, r2)]
    return frozenset(out)


@lru_cache(maxsize=1)
def _oracle_table() -> dict:
    """Ground-truth composition table by brute force.

    Enumerates every assignment of ranks 0..5 to the six endpoints of
    intervals A, B, C (every weak ordering of six points is realised by
    some such assignment), keeps the valid interval configurations, and
    buckets the induced relation of A to C under (rel(A,B), rel(B,C)).
    """
    table = {(r1, r2): set() for r1 in AllenRelation for r2 in AllenRelation}
    for ranks in itertools.product(range(6), repeat=6):
        a0, a1, b0, b1, c0, c1 = ranks
        if not (a0 < a1 and b0 < b1 and c0 < c1):
            continue
        rel_ab = classify(a0, a1, b0, b1)
        rel_bc = classify(b0, b1, c0, c1)
        rel_ac = classify(a0, a1, c0, c1)
        table[(rel_ab, rel_bc)].add(rel_ac)
    return {key: frozenset(val) for key, val in table.items()}


def endpoint_oracle(r1: AllenRelation, r2: AllenRelation) -> frozenset[AllenRelation]:
    """Brute-force composition of two basic relations (independent of
    :func:`compose`); the authority the symbolic table is tested against."""
    return _oracle_table()[(r1, r2)]


# ---------------------------------------------------------------------------
# Advisory consistency lint
# ---------------------------------------------------------------------------

_W101_NOTE = "annotated relations are best treated as approximate"


def consistency_lint(tlinks: list[Link], index: IdIndex) -> list[Diagnostic]:
    """Advisory path-consistency check over a document's TLINKs.

    Builds a constraint network over the link endpoints, intersects
    parallel links, and propagates compositions to a fixpoint.  An empty
    edge means no assignment of intervals can satisfy all the links at
    once; that is reported as W101 (never an error) with the witnessing
    link ids.  Path consistency is sound but not complete for the full
    Allen algebra, so a quiet run is not a consistency proof.
    """
    usable = [
        link
        for link in tlinks
        if link.kind == "TLINK"
        and link.rel_type in TIMEML_TO_ALLEN
        and link.source is not None
        and link.target is not None
        and resolve(index, link.source) is not None
        and resolve(index, link.target) is not None
    ]
    if not usable:
        return []

    diagnostics: list[Diagnostic] = []

    # Self-referential links: only an equals-projection is satisfiable.
    remaining = []
    for link in usable:
        if link.source == link.target:
            if to_allen(link.rel_type) is not AllenRelation.EQUALS:
                diagnostics.append(_w101([link], f"{link.rel_type} from {link.source} to itself"))
        else:
            remaining.append(link)

    nodes = sorted({link.source for link in remaining} | {link.target for link in remaining})
    order = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    edges: dict[tuple[int, int], frozenset] = {}
    edge_links: dict[tuple[int, int], list[Link]] = {}

    inconsistent_pairs = set()
    for link in remaining:
        i, j = order[link.source], order[link.target]
        rel = frozenset([to_allen(link.rel_type)])
        if i > j:
            i, j = j, i
            rel = inverse_set(rel)
        key = (i, j)
        edge_links.setdefault(key, []).append(link)
        previous = edges.get(key, FULL)
        edges[key] = previous & rel
        if not edges[key] and key not in inconsistent_pairs:
            inconsistent_pairs.add(key)
            witnesses = edge_links[key]
            diagnostics.append(
                _w101(witnesses, f"conflicting relations between {nodes[i]} and {nodes[j]}")
            )
    if inconsistent_pairs:
        return diagnostics

    def get(i: int, j: int) -> frozenset:
        if i == j:
            return frozenset([AllenRelation.EQUALS])
        if i < j:
            return edges.get((i, j), FULL)
        return inverse_set(edges.get((j, i), FULL))

    def put(i: int, j: int, value: frozenset) -> None:
        if i < j:
            edges[(i, j)] = value
        else:
            edges[(j, i)] = inverse_set(value)

    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for k in range(n):
                    if k == i or k == j:
                        continue
                    refined = get(i, j) & compose(get(i, k), get(k, j))
                    if refined != get(i, j):
                        if not refined:
                            witnesses = []
                            for pair in ((i, k), (k, j), (i, j)):
                                witnesses.extend(edge_links.get((min(pair), max(pair)), []))
                            diagnostics.append(
                                _w101(
                                    witnesses,
                                    f"no consistent interpretation for {nodes[i]}, {nodes[k]}, {nodes[j]}",
                                )
                            )
                            return diagnostics
                        put(i, j, refined)
                        changed = True
    return diagnostics


def _w101(witnesses: list[Link], detail: str) -> Diagnostic:
    lids = [link.lid for link in witnesses if link.lid is not None]
    pos = witnesses[0].pos if witnesses else None
    return make_diagnostic(
        "W101",
        f"temporal relations are inconsistent: {detail} ({_W101_NOTE})",
        pos,
        lids,
    )
