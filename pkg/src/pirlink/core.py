"""Domain types shared by every pipeline stage.

Records are frozen dataclasses; stages derive new records with
:func:`dataclasses.replace` rather than mutating.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

MIN_LISTING_AGE = 17


class EditionId(int, Enum):
    """A directory edition, identified by its index in the series."""

    E1 = 1
    E4 = 4
    E8 = 8
    E10 = 10
    E12 = 12

    @property
    def year(self) -> int:
        return EDITION_YEARS[self.value]

    @property
    def has_children(self) -> bool:
        return self.value in PARENT_EDITIONS

    @property
    def has_tax(self) -> bool:
        return self.value in TAX_EDITIONS

    @classmethod
    def parse(cls, value) -> "EditionId":
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValueError(f"unknown edition index: {value!r}") from None

    def __str__(self) -> str:
        return str(self.value)


EDITION_YEARS = {1: 1903, 4: 1915, 8: 1928, 10: 1934, 12: 1939}
EDITIONS = tuple(EditionId)
PARENT_EDITIONS = frozenset({1, 4, 8})
TAX_EDITIONS = frozenset({10, 12})


def edition_for_year(year: int) -> EditionId:
    for index, y in EDITION_YEARS.items():
        if y == year:
            return EditionId(index)
    raise ValueError(f"no edition published in {year}")


class SocialGroup(str, Enum):
    KAZOKU = "kazoku"
    SAMURAI = "samurai"
    COMMONER = "commoner"


class Education(str, Enum):
    IMPERIAL_UNIVERSITY = "imperial_university"
    OTHER_UNIVERSITY = "other_university"
    PRIVATE_SCHOOL = "private_school"
    NO_HIGHER_EDUCATION = "no_higher_education"


class TaxStatus(str, Enum):
    YES = "yes"
    NO = "no"
    UNAVAILABLE = "unavailable"


class ChildKind(str, Enum):
    BIOLOGICAL_SON = "biological_son"
    BIOLOGICAL_DAUGHTER = "biological_daughter"
    ADOPTED_SON = "adopted_son"

    @property
    def is_son(self) -> bool:
        return self is not ChildKind.BIOLOGICAL_DAUGHTER

    @property
    def is_biological(self) -> bool:
        return self is not ChildKind.ADOPTED_SON


INDUSTRIES = (
    "finance",
    "manufacturing",
    "professional",
    "wholesale_retail",
    "information",
    "military",
    "public_administration",
    "transportation",
)

TITLES = (
    "executive",
    "military_officer",
    "scholar_engineer",
    "judge_lawyer",
    "physician",
    "teacher",
)

# JIS X 0401 order.
PREFECTURE_NAMES = (
    ("01", "北海道", "hokkaido"),
    ("02", "青森", "aomori"),
    ("03", "岩手", "iwate"),
    ("04", "宮城", "miyagi"),
    ("05", "秋田", "akita"),
    ("06", "山形", "yamagata"),
    ("07", "福島", "fukushima"),
    ("08", "茨城", "ibaraki"),
    ("09", "栃木", "tochigi"),
    ("10", "群馬", "gunma"),
    ("11", "埼玉", "saitama"),
    ("12", "千葉", "chiba"),
    ("13", "東京", "tokyo"),
    ("14", "神奈川", "kanagawa"),
    ("15", "新潟", "niigata"),
    ("16", "富山", "toyama"),
    ("17", "石川", "ishikawa"),
    ("18", "福井", "fukui"),
    ("19", "山梨", "yamanashi"),
    ("20", "長野", "nagano"),
    ("21", "岐阜", "gifu"),
    ("22", "静岡", "shizuoka"),
    ("23", "愛知", "aichi"),
    ("24", "三重", "mie"),
    ("25", "滋賀", "shiga"),
    ("26", "京都", "kyoto"),
    ("27", "大阪", "osaka"),
    ("28", "兵庫", "hyogo"),
    ("29", "奈良", "nara"),
    ("30", "和歌山", "wakayama"),
    ("31", "鳥取", "tottori"),
    ("32", "島根", "shimane"),
    ("33", "岡山", "okayama"),
    ("34", "広島", "hiroshima"),
    ("35", "山口", "yamaguchi"),
    ("36", "徳島", "tokushima"),
    ("37", "香川", "kagawa"),
    ("38", "愛媛", "ehime"),
    ("39", "高知", "kochi"),
    ("40", "福岡", "fukuoka"),
    ("41", "佐賀", "saga"),
    ("42", "長崎", "nagasaki"),
    ("43", "熊本", "kumamoto"),
    ("44", "大分", "oita"),
    ("45", "宮崎", "miyazaki"),
    ("46", "鹿児島", "kagoshima"),
    ("47", "沖縄", "okinawa"),
)
FOREIGN = "FOREIGN"
DOMESTIC_PREFECTURES = tuple(code for code, _, _ in PREFECTURE_NAMES)
PREFECTURE_CODES = DOMESTIC_PREFECTURES + (FOREIGN,)
PREFECTURE_INDEX = {code: i for i, code in enumerate(PREFECTURE_CODES)}


def check_prefecture(code: Optional[str]) -> Optional[str]:
    if code is not None and code not in PREFECTURE_INDEX:
        raise ValueError(f"invalid prefecture code: {code!r}")
    return code


class RecordId(NamedTuple):
    """(edition index, 1-based sequence within the edition file)."""

    edition: int
    seq: int

    def __str__(self) -> str:
        return f"{self.edition}:{self.seq}"


@dataclass(frozen=True)
class PersonName:
    raw_full_name: str
    surname: str
    given_name: str

    @property
    def normalized_full_name(self) -> str:
        return self.surname + self.given_name

    @property
    def complete(self) -> bool:
        return bool(self.surname) and bool(self.given_name)


@dataclass(frozen=True)
class ChildRecord:
    given_name: str
    birth_year: Optional[int]
    kind: ChildKind
    legitimate: bool = True
    sequence_in_source: int = 1

    def __post_init__(self):
        if not isinstance(self.kind, ChildKind):
            object.__setattr__(self, "kind", ChildKind(self.kind))
        if self.sequence_in_source < 1:
            raise ValueError("sequence_in_source must be >= 1")


@dataclass(frozen=True)
class Wife:
    name: str
    birth_year: Optional[int] = None


@dataclass(frozen=True)
class PersonRecord:
    """One listed individual in one edition.

    Classified covariates (``social_group`` and friends) stay ``None`` until
    the classification stage fills them from the raw ``*_text`` fields.
    """

    record_id: RecordId
    name: Optional[PersonName]
    birth_year: Optional[int] = None
    birth_place_text: str = ""
    residence_text: str = ""
    social_text: str = ""
    education_text: str = ""
    decoration_text: str = ""
    occupation_entries: tuple[str, ...] = ()
    birth_prefecture: Optional[str] = None
    residence_prefecture: Optional[str] = None
    social_group: Optional[SocialGroup] = None
    education: Optional[Education] = None
    industries: frozenset[str] = frozenset()
    occupation_titles: frozenset[str] = frozenset()
    top_income_flag: TaxStatus = TaxStatus.UNAVAILABLE
    medal_flag: Optional[bool] = None
    father_name: Optional[str] = None
    mother_name: Optional[str] = None
    wife: Optional[Wife] = None
    children: tuple[ChildRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.record_id, RecordId):
            object.__setattr__(self, "record_id", RecordId(*self.record_id))
        edition = EditionId.parse(self.record_id.edition)
        check_prefecture(self.birth_prefecture)
        check_prefecture(self.residence_prefecture)
        if edition.has_tax == (self.top_income_flag is TaxStatus.UNAVAILABLE):
            raise ValueError(
                f"record {self.record_id}: top_income_flag {self.top_income_flag.value} "
                f"inconsistent with edition {edition.value}"
            )
        if self.children and not edition.has_children:
            raise ValueError(f"record {self.record_id}: edition {edition.value} carries no child data")

    @property
    def edition(self) -> EditionId:
        return EditionId(self.record_id.edition)


def listing_age(record: PersonRecord) -> Optional[int]:
    """Publication year of the record's edition minus birth year."""
    if record.birth_year is None:
        return None
    return record.edition.year - record.birth_year


def cleaning_failure(record: PersonRecord) -> Optional[str]:
    """The first reason ``record`` fails cleaning, or None if it passes."""
    if record.name is None or not record.name.complete:
        return "missing_name"
    if record.birth_year is None:
        return "missing_birth_year"
    if listing_age(record) < MIN_LISTING_AGE:
        return "under_age"
    return None


def is_cleaned(record: PersonRecord) -> bool:
    return cleaning_failure(record) is None
