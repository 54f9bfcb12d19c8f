"""Per-edition tripartite family graphs and birth-order statistics."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import ChildKind, EditionId, PersonRecord, RecordId, listing_age
from .tabular import to_csv

PARENT, INDIVIDUAL, CHILD = "parent", "individual", "child"


def individual_node(rid: RecordId) -> str:
    return f"I:{rid.edition}:{rid.seq}"


def parent_node(rid: RecordId, role: str, name: str) -> str:
    # keyed within the family only; parents are never merged across records
    return f"P:{rid.edition}:{rid.seq}:{role}:{name}"


def child_node(rid: RecordId, position: int) -> str:
    return f"C:{rid.edition}:{rid.seq}:{position}"


@dataclass(frozen=True)
class FamilyGraph:
    edition: EditionId
    parent_nodes: frozenset
    individual_nodes: frozenset
    child_nodes: frozenset
    edges: frozenset  # (from, to)

    def kind_of(self, node: str) -> str:
        if node in self.parent_nodes:
            return PARENT
        if node in self.individual_nodes:
            return INDIVIDUAL
        if node in self.child_nodes:
            return CHILD
        raise KeyError(node)

    @property
    def node_count(self) -> int:
        return len(self.parent_nodes) + len(self.individual_nodes) + len(self.child_nodes)

    def violations(self) -> list[str]:
        """Every breach of the tripartite structure; empty when the graph is valid."""
        problems = []
        sets = {PARENT: self.parent_nodes, INDIVIDUAL: self.individual_nodes, CHILD: self.child_nodes}
        names = list(sets)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                for node in sets[a] & sets[b]:
                    problems.append(f"node {node} in both {a} and {b}")
        allowed = {(PARENT, INDIVIDUAL), (INDIVIDUAL, CHILD)}
        for src, dst in self.edges:
            kinds = (_membership(src, sets), _membership(dst, sets))
            if None in kinds:
                problems.append(f"edge {src}->{dst} has an endpoint outside the node sets")
            elif kinds not in allowed:
                problems.append(f"edge {src}->{dst} joins {kinds[0]} to {kinds[1]}")
        return problems


def _membership(node, sets):
    for kind, members in sets.items():
        if node in members:
            return kind
    return None


def build_graph(records: Sequence[PersonRecord]) -> FamilyGraph:
    """Build the graph for one edition's records."""
    editions = {r.edition for r in records}
    if len(editions) > 1:
        raise ValueError(f"records span several editions: {sorted(e.value for e in editions)}")
    edition = editions.pop() if editions else None
    parents, individuals, children, edges = set(), set(), set(), set()
    for record in records:
        rid = record.record_id
        me = individual_node(rid)
        individuals.add(me)
        for role, name in (("father", record.father_name), ("mother", record.mother_name)):
            if name:
                node = parent_node(rid, role, name)
                parents.add(node)
                edges.add((node, me))
        for child in record.children:
            node = child_node(rid, child.sequence_in_source)
            children.add(node)
            edges.add((me, node))
    return FamilyGraph(edition, frozenset(parents), frozenset(individuals), frozenset(children), frozenset(edges))


def graph_edges_csv(graph: FamilyGraph) -> str:
    rows = [
        (graph.edition.value if graph.edition else "", src, graph.kind_of(src), dst, graph.kind_of(dst))
        for src, dst in sorted(graph.edges)
    ]
    return to_csv(["edition", "from_node", "node_kind", "to_node", "node_kind"], rows)


# -- birth orders ----------------------------------------------------------

@dataclass(frozen=True)
class BirthOrderView:
    """Children of one family ordered by birth year.

    Orders hold ``sequence_in_source`` positions, eldest first. Same-year
    children keep source listing order.
    """

    family: RecordId
    per_type_orders: dict  # ChildKind -> tuple of positions
    overall_orders: tuple
    biological_orders: tuple
    kinds: dict  # position -> ChildKind
    unordered: int  # children lacking a birth year


def birth_orders(record: PersonRecord, include_illegitimate: bool = False) -> BirthOrderView:
    eligible = [c for c in record.children if include_illegitimate or c.legitimate]
    dated = sorted(
        (c for c in eligible if c.birth_year is not None), key=lambda c: (c.birth_year, c.sequence_in_source)
    )
    overall = tuple(c.sequence_in_source for c in dated)
    per_type = {kind: tuple(c.sequence_in_source for c in dated if c.kind is kind) for kind in ChildKind}
    biological = tuple(c.sequence_in_source for c in dated if c.kind.is_biological)
    return BirthOrderView(
        family=record.record_id,
        per_type_orders=per_type,
        overall_orders=overall,
        biological_orders=biological,
        kinds={c.sequence_in_source: c.kind for c in eligible},
        unordered=len(eligible) - len(dated),
    )


HISTOGRAM_PANELS = ("per_type", "overall", "biological_per_type", "biological_overall")


@dataclass
class CompositionHistograms:
    """Counts keyed by ``(edition, kind, order)`` for each panel."""

    per_type: Counter
    overall: Counter
    biological_per_type: Counter
    biological_overall: Counter
    unordered: Counter  # edition -> children without a birth year
    families: Counter  # edition -> families contributing

    def panel(self, name: str) -> Counter:
        return getattr(self, name)


def family_composition_histograms(
    records: Iterable[PersonRecord],
    restrict_father_age: Optional[int] = None,
    include_illegitimate: bool = False,
) -> CompositionHistograms:
    """Children per (kind, birth order), by edition.

    ``per_type`` orders children within their own kind; ``overall`` orders all
    children jointly; the ``biological_`` panels drop adopted sons before
    ordering. With ``restrict_father_age`` only fathers whose listing age is
    below the cutoff contribute.
    """
    out = CompositionHistograms(Counter(), Counter(), Counter(), Counter(), Counter(), Counter())
    for record in records:
        if not record.children:
            continue
        if restrict_father_age is not None:
            age = listing_age(record)
            if age is None or age >= restrict_father_age:
                continue
        view = birth_orders(record, include_illegitimate)
        ed = record.edition.value
        out.families[ed] += 1
        out.unordered[ed] += view.unordered
        for kind, positions in view.per_type_orders.items():
            for order, _ in enumerate(positions, start=1):
                out.per_type[ed, kind.value, order] += 1
                if kind.is_biological:
                    out.biological_per_type[ed, kind.value, order] += 1
        for order, pos in enumerate(view.overall_orders, start=1):
            out.overall[ed, view.kinds[pos].value, order] += 1
        for order, pos in enumerate(view.biological_orders, start=1):
            out.biological_overall[ed, view.kinds[pos].value, order] += 1
    return out


def histogram_csv(counts: Counter) -> str:
    rows = [(ed, kind, order, n) for (ed, kind, order), n in sorted(counts.items())]
    return to_csv(["edition", "kind", "order", "count"], rows)
