"""Cross-edition father-to-son linkage by exact name and birth-year keys.

Sons are listed in a father's record by given name only, and the father's
full name is a single string, so each son gets up to three candidate full
names built from the first one, two and three characters of the father's
name. Sons who took over their father's name on succeeding to the headship
are found by a second probe on (father's full name, son's birth year).

All functions expect records that have already been through
:func:`pirlink.normalize.normalize_record`.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import PARENT_EDITIONS, ChildKind, PersonRecord, RecordId
from .tabular import read_csv, to_csv

SUCCESSION = "succession_match"


def name_basis(surname_length: int) -> str:
    return f"candidate_name_match:{surname_length}"


@dataclass(frozen=True)
class SonCandidate:
    father_record: RecordId
    child_index: int  # sequence_in_source within the father's child list
    kind: ChildKind
    candidate_full_names: tuple[str, ...]  # surname lengths 1, 2, 3 in order
    birth_year: int

    def keys(self):
        for length, name in enumerate(self.candidate_full_names, start=1):
            yield length, (name, self.birth_year)


@dataclass(frozen=True, order=True)
class InterEditionLink:
    father: RecordId
    son: RecordId
    basis: tuple[str, ...]  # sorted, at least one entry
    ambiguous: bool = False

    def __post_init__(self):
        if not self.basis:
            raise ValueError("a link needs at least one basis")
        if self.father.edition not in PARENT_EDITIONS:
            raise ValueError(f"parent edition {self.father.edition} carries no child data")

    @property
    def pair(self) -> tuple[RecordId, RecordId]:
        return self.father, self.son


def _is_linkable_son(child) -> bool:
    return child.kind.is_son and child.legitimate and bool(child.given_name) and child.birth_year is not None


def build_candidates(parent_records: Iterable[PersonRecord]) -> list[SonCandidate]:
    """One candidate per legitimate son or adopted son with a given name and birth year."""
    out = []
    for record in parent_records:
        if record.edition.value not in PARENT_EDITIONS or record.name is None:
            continue
        full = record.name.normalized_full_name
        prefixes = [full[:k] for k in (1, 2, 3) if len(full) > k]
        if not prefixes:
            continue
        for child in record.children:
            if not _is_linkable_son(child):
                continue
            names = tuple(p + child.given_name for p in prefixes)
            out.append(SonCandidate(record.record_id, child.sequence_in_source, child.kind, names, child.birth_year))
    return out


def build_index(records: Iterable[PersonRecord]) -> dict[tuple[str, int], tuple[RecordId, ...]]:
    """Exact multi-map from (normalized full name, birth year) to record ids.

    Records lacking a name or birth year are not indexed. Collisions are kept.
    """
    index = defaultdict(list)
    for record in records:
        if record.name is None or record.birth_year is None or not record.name.complete:
            continue
        index[record.name.normalized_full_name, record.birth_year].append(record.record_id)
    return {key: tuple(sorted(ids)) for key, ids in index.items()}


# A probe result: (father record, child index, son edition) -> {son record: set of bases}
Hits = dict


def _later(father: RecordId, son: RecordId, same_edition: bool) -> bool:
    return son.edition > father.edition or (same_edition and son.edition == father.edition and son != father)


def probe_candidates(candidates: Iterable[SonCandidate], index, same_edition: bool = False) -> Hits:
    hits = defaultdict(lambda: defaultdict(set))
    for cand in candidates:
        for length, key in cand.keys():
            for rid in index.get(key, ()):
                if _later(cand.father_record, rid, same_edition):
                    hits[cand.father_record, cand.child_index, rid.edition][rid].add(name_basis(length))
    return hits


def probe_succession(parent_records: Iterable[PersonRecord], index, same_edition: bool = False) -> Hits:
    hits = defaultdict(lambda: defaultdict(set))
    for record in parent_records:
        if record.edition.value not in PARENT_EDITIONS or record.name is None:
            continue
        full = record.name.normalized_full_name
        for child in record.children:
            if not _is_linkable_son(child):
                continue
            for rid in index.get((full, child.birth_year), ()):
                if _later(record.record_id, rid, same_edition):
                    hits[record.record_id, child.sequence_in_source, rid.edition][rid].add(SUCCESSION)
    return hits


def merge_hits(*parts: Hits) -> Hits:
    merged = defaultdict(lambda: defaultdict(set))
    for part in parts:
        for slot, persons in part.items():
            for rid, bases in persons.items():
                merged[slot][rid] |= bases
    return merged


def resolve(hits: Hits) -> list[InterEditionLink]:
    """Turn probe hits into deduplicated links.

    A son whose keys reach two or more distinct people in one edition yields
    a link to each of them, all flagged ambiguous. Links to the same
    (father, son) pair from different children or paths are merged; the
    merged link is ambiguous if any contributing hit was.
    """
    bases = defaultdict(set)
    ambiguous = defaultdict(bool)
    for (father, _child, _edition), persons in hits.items():
        flag = len(persons) > 1
        for rid, basis in persons.items():
            bases[father, rid] |= basis
            ambiguous[father, rid] |= flag
    return sorted(
        InterEditionLink(father, son, tuple(sorted(b)), ambiguous[father, son]) for (father, son), b in bases.items()
    )


def match_candidates(candidates, index, same_edition: bool = False) -> list[InterEditionLink]:
    return resolve(probe_candidates(candidates, index, same_edition))


def match_succession(parent_records, index, same_edition: bool = False) -> list[InterEditionLink]:
    return resolve(probe_succession(parent_records, index, same_edition))


def link_editions(records: Sequence[PersonRecord], same_edition: bool = False) -> list[InterEditionLink]:
    """Run both probes over normalized, cleaned records from any editions.

    ``same_edition`` also admits sons found in their father's own edition;
    by default links run strictly forward.
    """
    index = build_index(records)
    parents = [r for r in records if r.edition.value in PARENT_EDITIONS]
    hits = merge_hits(
        probe_candidates(build_candidates(parents), index, same_edition),
        probe_succession(parents, index, same_edition),
    )
    return resolve(hits)


def pair_census(records: Iterable[PersonRecord]) -> tuple[int, int]:
    """Unique (father, son) and (father, daughter) pairs over parent editions.

    Children lacking a given name or birth year are skipped; illegitimate
    sons are excluded; repeated entries for the same child collapse.
    """
    sons, daughters = set(), set()
    for record in records:
        if record.edition.value not in PARENT_EDITIONS:
            continue
        for child in record.children:
            if not child.given_name or child.birth_year is None:
                continue
            key = (record.record_id, child.given_name, child.birth_year)
            if child.kind is ChildKind.BIOLOGICAL_DAUGHTER:
                daughters.add(key)
            elif child.legitimate:
                sons.add(key + (child.kind,))
    return len(sons), len(daughters)


# -- export ----------------------------------------------------------------

LINK_HEADER = ["parent_edition", "parent_id", "son_edition", "son_id", "basis", "ambiguous"]


def links_csv(links: Iterable[InterEditionLink]) -> str:
    rows = [
        (l.father.edition, l.father.seq, l.son.edition, l.son.seq, "|".join(l.basis), int(l.ambiguous))
        for l in sorted(links)
    ]
    return to_csv(LINK_HEADER, rows)


def read_links(path) -> list[InterEditionLink]:
    links = []
    for row in read_csv(path):
        links.append(
            InterEditionLink(
                RecordId(int(row["parent_edition"]), int(row["parent_id"])),
                RecordId(int(row["son_edition"]), int(row["son_id"])),
                tuple(sorted(row["basis"].split("|"))),
                row["ambiguous"] == "1",
            )
        )
    return links


def usable(links: Iterable[InterEditionLink], include_ambiguous: bool = False) -> list[InterEditionLink]:
    return [l for l in links if include_ambiguous or not l.ambiguous]


__all__ = [
    "InterEditionLink",
    "SonCandidate",
    "build_candidates",
    "build_index",
    "link_editions",
    "links_csv",
    "match_candidates",
    "match_succession",
    "pair_census",
    "read_links",
    "usable",
]
