"""Character standardization, name splitting and keyword classification."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    INDUSTRIES,
    PREFECTURE_CODES,
    TITLES,
    Education,
    PersonName,
    PersonRecord,
    SocialGroup,
    Wife,
)

DOMAIN_CATEGORIES = {
    "social_group": frozenset(g.value for g in SocialGroup),
    "education": frozenset(e.value for e in Education),
    "industry": frozenset(INDUSTRIES)
    | {"public_administration_national", "public_administration_local", "primary", "infrastructure", "other"},
    "title": frozenset(TITLES) | {"middle_manager"},
    "prefecture": frozenset(PREFECTURE_CODES),
    "medal": frozenset({"yes", "no"}),
}


class CharMap:
    """Archaic-to-modern character substitutions.

    Chains are resolved at construction (``a -> b``, ``b -> c`` becomes
    ``a -> c``) so every image is a fixed point and application is idempotent.
    """

    def __init__(self, entries: Mapping[str, str] = ()):
        entries = dict(entries)
        for old, new in entries.items():
            if len(old) != 1 or len(new) != 1:
                raise ValueError(f"char map entries must be single characters: {old!r} -> {new!r}")
        resolved = {}
        for old in entries:
            seen = {old}
            new = entries[old]
            while new in entries:
                if new in seen:
                    raise ValueError(f"cycle in char map at {old!r}")
                seen.add(new)
                new = entries[new]
            if new != old:
                resolved[old] = new
        self.entries = resolved
        self._table = str.maketrans(resolved)

    def extend(self, entries: Mapping[str, str]) -> "CharMap":
        merged = dict(self.entries)
        merged.update(entries)
        return CharMap(merged)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, CharMap) and self.entries == other.entries

    def __repr__(self):
        return f"CharMap({len(self.entries)} entries)"


@dataclass(frozen=True)
class KeywordTable:
    """Ordered substring rules; the first rule whose keyword occurs wins."""

    category_domain: str
    rules: tuple[tuple[str, str], ...]
    default_category: Optional[str] = None

    def __post_init__(self):
        allowed = DOMAIN_CATEGORIES.get(self.category_domain)
        if allowed is None:
            raise ValueError(f"unknown category domain {self.category_domain!r}")
        for keyword, category in self.rules:
            if not keyword:
                raise ValueError("empty keyword")
            if category not in allowed:
                raise ValueError(f"category {category!r} not in domain {self.category_domain!r}")
        if self.default_category is not None and self.default_category not in allowed:
            raise ValueError(f"default {self.default_category!r} not in domain {self.category_domain!r}")

    def match(self, text: str) -> Optional[str]:
        """First matching rule's category, or None when no rule fires."""
        for keyword, category in self.rules:
            if keyword in text:
                return category
        return None

    def lookup(self, text: str) -> Optional[str]:
        hit = self.match(text)
        return self.default_category if hit is None else hit

    def normalized(self, charmap: CharMap) -> "KeywordTable":
        rules = tuple((normalize_text(k, charmap), c) for k, c in self.rules)
        return replace(self, rules=rules)


# -- loading ---------------------------------------------------------------

def _read_csv(source) -> list[dict]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return list(csv.DictReader(io.StringIO(text)))


def load_charmap(source) -> CharMap:
    rows = _read_csv(source)
    return CharMap({row["old"]: row["new"] for row in rows})


def load_keyword_table(source, domain: str, default: Optional[str] = None) -> KeywordTable:
    """Read a ``priority,keyword,category`` file; lower priority is tried first.

    Rows sharing a priority keep their file order.
    """
    rows = _read_csv(source)
    ranked = sorted(enumerate(rows), key=lambda item: (int(item[1]["priority"]), item[0]))
    rules = tuple((row["keyword"], row["category"]) for _, row in ranked)
    return KeywordTable(domain, rules, default)


def write_keyword_table(table: KeywordTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["priority", "keyword", "category"])
        for i, (keyword, category) in enumerate(table.rules, start=1):
            writer.writerow([i, keyword, category])


DOMAIN_DEFAULTS = {
    "social_group": SocialGroup.COMMONER.value,
    "education": Education.NO_HIGHER_EDUCATION.value,
    "industry": None,
    "title": None,
    "prefecture": None,
    "medal": "no",
}


def _packaged(name: str):
    return resources.files("pirlink").joinpath("data", name).open(encoding="utf-8")


def default_charmap() -> CharMap:
    with _packaged("charmap.csv") as fh:
        return load_charmap(fh)


def default_table(domain: str) -> KeywordTable:
    with _packaged(f"{domain}.csv") as fh:
        return load_keyword_table(fh, domain, DOMAIN_DEFAULTS[domain])


@dataclass(frozen=True)
class Classifier:
    """The full set of tables used to classify a record."""

    social_group: KeywordTable
    education: KeywordTable
    industry: KeywordTable
    title: KeywordTable
    prefecture: KeywordTable
    medal: KeywordTable
    charmap: CharMap

    @classmethod
    def default(cls) -> "Classifier":
        return cls.from_directory(None)

    @classmethod
    def from_directory(cls, directory=None, charmap_path=None) -> "Classifier":
        """Load ``<domain>.csv`` from ``directory``, falling back to packaged tables."""
        tables = {}
        for domain in DOMAIN_DEFAULTS:
            path = Path(directory) / f"{domain}.csv" if directory else None
            if path is not None and path.exists():
                tables[domain] = load_keyword_table(path, domain, DOMAIN_DEFAULTS[domain])
            else:
                tables[domain] = default_table(domain)
        charmap = load_charmap(charmap_path) if charmap_path else default_charmap()
        tables = {domain: t.normalized(charmap) for domain, t in tables.items()}
        return cls(charmap=charmap, **tables)


# -- operations ------------------------------------------------------------

def normalize_text(s: str, charmap: CharMap) -> str:
    return s.translate(charmap._table)


def _require(table: KeywordTable, domain: str):
    if table.category_domain != domain:
        raise ValueError(f"expected a {domain} table, got {table.category_domain}")


def classify_social_group(record_text: str, table: KeywordTable) -> SocialGroup:
    _require(table, "social_group")
    return SocialGroup(table.match(record_text) or SocialGroup.COMMONER.value)


def classify_education(record_text: str, table: KeywordTable) -> Education:
    _require(table, "education")
    return Education(table.match(record_text) or Education.NO_HIGHER_EDUCATION.value)


def classify_occupations(
    entries: Iterable[str], industry_table: KeywordTable, title_table: KeywordTable
) -> tuple[frozenset[str], frozenset[str]]:
    """Union of per-entry first-match industries and titles."""
    _require(industry_table, "industry")
    _require(title_table, "title")
    industries, titles = set(), set()
    for entry in entries:
        industry = industry_table.match(entry)
        if industry is not None:
            industries.add(industry)
        title = title_table.match(entry)
        if title is not None:
            titles.add(title)
    return frozenset(industries), frozenset(titles)


def map_prefecture(place_text: str, table: KeywordTable) -> Optional[str]:
    _require(table, "prefecture")
    return table.match(place_text)


def classify_medal(decoration_text: str, table: KeywordTable) -> bool:
    _require(table, "medal")
    return table.match(decoration_text) == "yes"


def split_name(full: str, surname_length: int) -> PersonName:
    """Split a single-string full name positionally."""
    if surname_length not in (1, 2, 3):
        raise ValueError(f"surname length must be 1, 2 or 3, got {surname_length}")
    if len(full) <= surname_length:
        raise ValueError(f"{full!r} too short for a {surname_length}-character surname")
    return PersonName(full, full[:surname_length], full[surname_length:])


def name_splits(full: str) -> list[PersonName]:
    return [split_name(full, k) for k in (1, 2, 3) if len(full) > k]


def normalize_record(record: PersonRecord, charmap: CharMap) -> PersonRecord:
    """Apply the char map to every name and free-text field of ``record``."""

    def norm(s):
        return None if s is None else normalize_text(s, charmap)

    name = record.name
    if name is not None:
        name = PersonName(name.raw_full_name, norm(name.surname), norm(name.given_name))
    children = tuple(replace(c, given_name=norm(c.given_name)) for c in record.children)
    wife = record.wife and Wife(norm(record.wife.name), record.wife.birth_year)
    return replace(
        record,
        name=name,
        birth_place_text=norm(record.birth_place_text),
        residence_text=norm(record.residence_text),
        social_text=norm(record.social_text),
        education_text=norm(record.education_text),
        decoration_text=norm(record.decoration_text),
        occupation_entries=tuple(norm(e) for e in record.occupation_entries),
        father_name=norm(record.father_name),
        mother_name=norm(record.mother_name),
        wife=wife,
        children=children,
    )


def classify_record(record: PersonRecord, classifier: Classifier) -> PersonRecord:
    """Normalize ``record`` and fill every covariate that is still unset."""
    record = normalize_record(record, classifier.charmap)
    updates = {}
    if record.social_group is None:
        updates["social_group"] = classify_social_group(record.social_text, classifier.social_group)
    if record.education is None:
        updates["education"] = classify_education(record.education_text, classifier.education)
    if not record.industries and not record.occupation_titles:
        updates["industries"], updates["occupation_titles"] = classify_occupations(
            record.occupation_entries, classifier.industry, classifier.title
        )
    if record.birth_prefecture is None:
        updates["birth_prefecture"] = map_prefecture(record.birth_place_text, classifier.prefecture)
    if record.residence_prefecture is None:
        updates["residence_prefecture"] = map_prefecture(record.residence_text, classifier.prefecture)
    if record.medal_flag is None:
        updates["medal_flag"] = classify_medal(record.decoration_text, classifier.medal)
    return replace(record, **updates)


def classify_records(records: Sequence[PersonRecord], classifier: Classifier) -> list[PersonRecord]:
    return [classify_record(r, classifier) for r in records]

