"""Edition record files: parsing, serialization and attrition accounting.

File layout (UTF-8)::

    #pirlink<TAB>edition=4<TAB>schema=1
    id=1<TAB>surname=山田<TAB>given=太郎<TAB>birth_year=1860<TAB>child=一郎|1888|son|1 ...

Each record line is a tab-separated list of ``key=value`` fields. ``occupation``,
``industry``, ``title`` and ``child`` may repeat; repeated ``child`` fields keep
source order. An empty value means the field is missing.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import (
    ChildKind,
    ChildRecord,
    Education,
    EditionId,
    PersonName,
    PersonRecord,
    RecordId,
    SocialGroup,
    TaxStatus,
    Wife,
    check_prefecture,
    cleaning_failure,
)
from .tabular import round_half_up, to_csv

log = logging.getLogger(__name__)

MAGIC = "#pirlink"
SCHEMA_VERSION = 1

CHILD_KIND_CODES = {
    "son": ChildKind.BIOLOGICAL_SON,
    "daughter": ChildKind.BIOLOGICAL_DAUGHTER,
    "adopted": ChildKind.ADOPTED_SON,
}
CHILD_KIND_NAMES = {v: k for k, v in CHILD_KIND_CODES.items()}

REPEATABLE = frozenset({"occupation", "industry", "title", "child"})
COMMON_FIELDS = frozenset(
    {
        "id",
        "surname",
        "given",
        "raw_name",
        "birth_year",
        "birthplace",
        "residence",
        "social",
        "education",
        "decoration",
        "occupation",
        # classified covariates, written once the classify stage has run
        "social_group",
        "education_cat",
        "industry",
        "title",
        "birth_pref",
        "residence_pref",
        "medal",
    }
)
FAMILY_FIELDS = frozenset({"father", "mother", "wife", "child"})


class IngestError(Exception):
    """Unrecoverable problem with an edition file (bad or mismatched header)."""


class LineError(ValueError):
    pass


@dataclass(frozen=True)
class Schema:
    """Which keys each edition may carry."""

    version: int
    fields: dict

    def allowed(self, edition: EditionId) -> frozenset:
        return self.fields[edition.value]


def _default_schema() -> Schema:
    fields = {}
    for edition in EditionId:
        allowed = set(COMMON_FIELDS)
        if edition.has_children:
            allowed |= FAMILY_FIELDS
        if edition.has_tax:
            allowed.add("tax")
        fields[edition.value] = frozenset(allowed)
    return Schema(SCHEMA_VERSION, fields)


DEFAULT_SCHEMA = _default_schema()


@dataclass
class AttritionReport:
    edition: EditionId
    raw_count: int
    cleaned_count: int
    reasons: Counter = field(default_factory=Counter)
    line_errors: list = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.cleaned_count <= self.raw_count:
            raise ValueError("need 0 <= cleaned_count <= raw_count")

    @property
    def attrition_rate(self) -> Fraction:
        """Exact share of raw entries dropped; 0 for an empty edition."""
        if self.raw_count == 0:
            return Fraction(0)
        return Fraction(self.raw_count - self.cleaned_count, self.raw_count)


@dataclass(frozen=True)
class Header:
    edition: EditionId
    schema_version: int
    source: Optional[str] = None

    def render(self) -> str:
        parts = [MAGIC, f"edition={self.edition.value}", f"schema={self.schema_version}"]
        if self.source:
            parts.append(f"source={self.source}")
        return "\t".join(parts)


def parse_header(line: str) -> Header:
    parts = line.rstrip("\n").split("\t")
    if not parts or parts[0] != MAGIC:
        raise IngestError(f"missing {MAGIC} header")
    values = {}
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise IngestError(f"malformed header field {part!r}")
        values[key] = value
    try:
        edition = EditionId.parse(values["edition"])
        version = int(values["schema"])
    except (KeyError, ValueError) as exc:
        raise IngestError(f"malformed header: {exc}") from None
    return Header(edition, version, values.get("source") or None)


# -- record lines ----------------------------------------------------------

def _int_or_none(value: str, key: str) -> Optional[int]:
    if value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise LineError(f"{key}: not an integer: {value!r}") from None


def _flag(value: str, key: str) -> bool:
    if value not in ("0", "1"):
        raise LineError(f"{key}: expected 0 or 1, got {value!r}")
    return value == "1"


def _enum(cls, value: str, key: str):
    try:
        return cls(value)
    except ValueError:
        raise LineError(f"{key}: invalid value {value!r}") from None


def _parse_child(value: str, position: int) -> ChildRecord:
    parts = value.split("|")
    if len(parts) != 4:
        raise LineError(f"child: expected given|year|kind|legit, got {value!r}")
    given, year, kind, legit = parts
    if kind not in CHILD_KIND_CODES:
        raise LineError(f"child: unknown kind {kind!r}")
    return ChildRecord(given, _int_or_none(year, "child"), CHILD_KIND_CODES[kind], _flag(legit, "child"), position)


def parse_record_line(line: str, edition: EditionId, seq: int, schema: Schema = DEFAULT_SCHEMA) -> PersonRecord:
    allowed = schema.allowed(edition)
    single: dict[str, str] = {}
    multi: dict[str, list[str]] = {k: [] for k in REPEATABLE}
    for part in line.split("\t"):
        key, sep, value = part.partition("=")
        if not sep:
            raise LineError(f"field without '=': {part!r}")
        if key not in allowed:
            raise LineError(f"field {key!r} not available in edition {edition.value}")
        if key in REPEATABLE:
            multi[key].append(value)
        elif key in single:
            raise LineError(f"duplicate field {key!r}")
        else:
            single[key] = value

    def get(key):
        return single.get(key, "")

    if get("id"):
        seq = _int_or_none(get("id"), "id")
    surname, given = get("surname"), get("given")
    name = PersonName(get("raw_name") or surname + given, surname, given) if (surname or given) else None

    wife = None
    if get("wife"):
        wname, sep, wyear = get("wife").partition("|")
        wife = Wife(wname, _int_or_none(wyear, "wife"))

    children = tuple(_parse_child(v, i) for i, v in enumerate(multi["child"], start=1))

    if edition.has_tax:
        tax = _enum(TaxStatus, get("tax") or "no", "tax")
        if tax is TaxStatus.UNAVAILABLE:
            raise LineError("tax: 'unavailable' not allowed where tax data exists")
    else:
        tax = TaxStatus.UNAVAILABLE

    try:
        return PersonRecord(
            record_id=RecordId(edition.value, seq),
            name=name,
            birth_year=_int_or_none(get("birth_year"), "birth_year"),
            birth_place_text=get("birthplace"),
            residence_text=get("residence"),
            social_text=get("social"),
            education_text=get("education"),
            decoration_text=get("decoration"),
            occupation_entries=tuple(multi["occupation"]),
            birth_prefecture=check_prefecture(get("birth_pref") or None),
            residence_prefecture=check_prefecture(get("residence_pref") or None),
            social_group=_enum(SocialGroup, get("social_group"), "social_group") if get("social_group") else None,
            education=_enum(Education, get("education_cat"), "education_cat") if get("education_cat") else None,
            industries=frozenset(multi["industry"]),
            occupation_titles=frozenset(multi["title"]),
            top_income_flag=tax,
            medal_flag=_flag(get("medal"), "medal") if get("medal") else None,
            father_name=get("father") or None,
            mother_name=get("mother") or None,
            wife=wife,
            children=children,
        )
    except ValueError as exc:
        if isinstance(exc, LineError):
            raise
        raise LineError(str(exc)) from None


def _check_value(key: str, value: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"{key}: value may not contain tabs or newlines: {value!r}")
    return value


def _check_subfield(key: str, value: str) -> str:
    if "|" in value:
        raise ValueError(f"{key}: '|' not allowed in sub-field {value!r}")
    return _check_value(key, value)


def serialize_record(record: PersonRecord) -> str:
    """One record line; inverse of :func:`parse_record_line`."""
    fields: list[tuple[str, str]] = [("id", str(record.record_id.seq))]

    def put(key, value):
        if value is None or value == "":
            return
        fields.append((key, _check_value(key, str(value))))

    if record.name is not None:
        put("surname", record.name.surname)
        put("given", record.name.given_name)
        if record.name.raw_full_name != record.name.normalized_full_name:
            put("raw_name", record.name.raw_full_name)
    put("birth_year", record.birth_year)
    put("birthplace", record.birth_place_text)
    put("residence", record.residence_text)
    put("social", record.social_text)
    put("education", record.education_text)
    put("decoration", record.decoration_text)
    for entry in record.occupation_entries:
        fields.append(("occupation", _check_value("occupation", entry)))
    put("birth_pref", record.birth_prefecture)
    put("residence_pref", record.residence_prefecture)
    put("social_group", record.social_group and record.social_group.value)
    put("education_cat", record.education and record.education.value)
    for industry in sorted(record.industries):
        fields.append(("industry", industry))
    for title in sorted(record.occupation_titles):
        fields.append(("title", title))
    if record.medal_flag is not None:
        fields.append(("medal", "1" if record.medal_flag else "0"))
    if record.edition.has_tax:
        fields.append(("tax", record.top_income_flag.value))
    put("father", record.father_name)
    put("mother", record.mother_name)
    if record.wife is not None:
        year = "" if record.wife.birth_year is None else str(record.wife.birth_year)
        fields.append(("wife", _check_subfield("wife", record.wife.name) + "|" + year))
    for child in sorted(record.children, key=lambda c: c.sequence_in_source):
        year = "" if child.birth_year is None else str(child.birth_year)
        value = "|".join(
            [_check_subfield("child", child.given_name), year, CHILD_KIND_NAMES[child.kind], "1" if child.legitimate else "0"]
        )
        fields.append(("child", value))
    return "\t".join(f"{k}={v}" for k, v in fields)


def serialize_edition(records: Iterable[PersonRecord], edition: EditionId, source: Optional[str] = None) -> str:
    lines = [Header(EditionId.parse(edition), SCHEMA_VERSION, source).render()]
    for record in records:
        if record.edition != edition:
            raise ValueError(f"record {record.record_id} does not belong to edition {edition}")
        lines.append(serialize_record(record))
    return "\n".join(lines) + "\n"


def write_edition(path, records: Sequence[PersonRecord], edition: EditionId, source: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_edition(records, edition, source), encoding="utf-8")
    return path


# -- parsing whole files ---------------------------------------------------

@dataclass
class EditionParse:
    header: Header
    records: list  # every well-formed record, cleaned or not
    line_errors: list  # (line number, message)
    raw_count: int


def read_edition_text(
    text: str, edition: Optional[EditionId] = None, schema: Schema = DEFAULT_SCHEMA, origin: str = "<text>"
) -> EditionParse:
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise IngestError(f"{origin}: empty file, header required")
    header = parse_header(lines[0])
    if edition is not None and header.edition != EditionId.parse(edition):
        raise IngestError(f"{origin}: header declares edition {header.edition.value}, expected {int(edition)}")
    if header.schema_version != schema.version:
        raise IngestError(f"{origin}: schema version {header.schema_version}, expected {schema.version}")
    records, errors, seen = [], [], set()
    raw = 0
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        raw += 1
        try:
            record = parse_record_line(line, header.edition, raw, schema)
            if record.record_id in seen:
                raise LineError(f"duplicate record id {record.record_id.seq}")
        except LineError as exc:
            log.warning("%s:%d: %s", origin, lineno, exc)
            errors.append((lineno, str(exc)))
            continue
        seen.add(record.record_id)
        records.append(record)
    return EditionParse(header, records, errors, raw)


def read_edition(path, edition: Optional[EditionId] = None, schema: Schema = DEFAULT_SCHEMA) -> EditionParse:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path}: not valid UTF-8 ({exc})") from None
    return read_edition_text(text, edition, schema, origin=str(path))


def clean(parsed: EditionParse) -> tuple[list[PersonRecord], AttritionReport]:
    reasons = Counter()
    cleaned = []
    for record in parsed.records:
        reason = cleaning_failure(record)
        if reason is None:
            cleaned.append(record)
        else:
            reasons[reason] += 1
    if parsed.line_errors:
        reasons["malformed"] += len(parsed.line_errors)
    report = AttritionReport(parsed.header.edition, parsed.raw_count, len(cleaned), reasons, list(parsed.line_errors))
    return cleaned, report


def parse_edition(
    path, edition: EditionId, schema: Schema = DEFAULT_SCHEMA
) -> tuple[list[PersonRecord], AttritionReport]:
    """Parse an edition file and apply the cleaning rule.

    Returns the cleaned records and an attrition report counting malformed
    lines as raw-but-not-cleaned.
    """
    return clean(read_edition(path, edition, schema))


def attrition_table(reports: Sequence[AttritionReport]) -> list[tuple[int, int, int, Fraction]]:
    """Rows ``(edition, raw, cleaned, exact rate)`` sorted by edition index."""
    seen = set()
    for report in reports:
        if report.edition in seen:
            raise ValueError(f"duplicate report for edition {report.edition.value}")
        seen.add(report.edition)
    ordered = sorted(reports, key=lambda r: r.edition.value)
    return [(r.edition.value, r.raw_count, r.cleaned_count, r.attrition_rate) for r in ordered]


def attrition_csv(reports: Sequence[AttritionReport]) -> str:
    rows = [(e, raw, cleaned, round_half_up(rate, 3)) for e, raw, cleaned, rate in attrition_table(reports)]
    return to_csv(["edition", "raw", "cleaned", "rate"], rows)


def attrition_reasons_csv(reports: Sequence[AttritionReport]) -> str:
    rows = []
    for report in sorted(reports, key=lambda r: r.edition.value):
        for reason in sorted(report.reasons):
            rows.append((report.edition.value, reason, report.reasons[reason]))
    return to_csv(["edition", "reason", "count"], rows)
