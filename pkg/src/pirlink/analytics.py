"""Descriptive statistics over cleaned, classified records.

Shares are exact :class:`fractions.Fraction` values; rounding happens only
when writing tables.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import (
    DOMESTIC_PREFECTURES,
    EDITION_YEARS,
    FOREIGN,
    INDUSTRIES,
    PARENT_EDITIONS,
    PREFECTURE_CODES,
    PREFECTURE_INDEX,
    TITLES,
    Education,
    EditionId,
    PersonRecord,
    SocialGroup,
    TaxStatus,
    listing_age,
)
from .linker import InterEditionLink
from .tabular import fraction_text, read_csv, round_half_up, to_csv

CHILD_EDITIONS = tuple(EDITION_YEARS)
PARENT_ROWS = tuple(sorted(PARENT_EDITIONS))
# prefecture denominators come from the nearest census
CENSUS_YEAR = {1: 1920, 4: 1920, 8: 1930, 10: 1930, 12: 1930}


class MissingPopulation(KeyError):
    def __init__(self, year, scope):
        super().__init__(f"no population row for year={year} scope={scope}")
        self.year, self.scope = year, scope

    def __str__(self):
        return self.args[0]


class PopulationTable:
    """Population counts keyed by (year, scope); scope is ``total``, ``male`` or a prefecture code."""

    def __init__(self, rows: Iterable[tuple[int, str, int]] = ()):
        self._rows = {}
        for year, scope, count in rows:
            key = (int(year), str(scope))
            if key in self._rows:
                raise ValueError(f"duplicate population row {key}")
            if int(count) <= 0:
                raise ValueError(f"population must be positive: {key}")
            self._rows[key] = int(count)

    @classmethod
    def from_csv(cls, path) -> "PopulationTable":
        return cls((row["year"], row["scope"], row["population"]) for row in read_csv(path))

    def get(self, year: int, scope: str) -> int:
        try:
            return self._rows[year, scope]
        except KeyError:
            raise MissingPopulation(year, scope) from None

    def __len__(self):
        return len(self._rows)


def _by_edition(records: Iterable[PersonRecord]) -> dict[int, list[PersonRecord]]:
    groups = defaultdict(list)
    for r in records:
        groups[r.edition.value].append(r)
    return dict(sorted(groups.items()))


def edition_totals(records: Iterable[PersonRecord]) -> dict[int, int]:
    return {ed: len(rs) for ed, rs in _by_edition(records).items()}


# -- representation --------------------------------------------------------

@dataclass(frozen=True)
class Representation:
    edition: int
    count: int
    share_total: Fraction
    share_male: Fraction


def representation_rate(edition_counts: Mapping[int, int], pop: PopulationTable) -> dict[int, Representation]:
    out = {}
    for ed in sorted(edition_counts):
        year = EditionId.parse(ed).year
        count = edition_counts[ed]
        out[ed] = Representation(
            ed, count, Fraction(count, pop.get(year, "total")), Fraction(count, pop.get(year, "male"))
        )
    return out


# -- geography -------------------------------------------------------------

@dataclass(frozen=True)
class PrefectureDistribution:
    edition: int
    counts: dict  # code -> count, all 47 codes
    shares: Optional[dict]  # code -> count / census population, when a table is given


def prefecture_distribution(
    records: Iterable[PersonRecord], pop: Optional[PopulationTable] = None
) -> dict[int, PrefectureDistribution]:
    """Elites per residence prefecture; missing and foreign residences are dropped."""
    out = {}
    for ed, rs in _by_edition(records).items():
        counts = dict.fromkeys(DOMESTIC_PREFECTURES, 0)
        for r in rs:
            if r.residence_prefecture in counts:
                counts[r.residence_prefecture] += 1
        shares = None
        if pop is not None:
            year = CENSUS_YEAR[ed]
            shares = {code: Fraction(n, pop.get(year, code)) for code, n in counts.items()}
        out[ed] = PrefectureDistribution(ed, counts, shares)
    return out


@dataclass(frozen=True)
class MobilityMatrix:
    """Birth-prefecture by residence-prefecture counts for one edition.

    ``counts`` is 48x48 in :data:`PREFECTURE_CODES` order with FOREIGN last;
    foreign births and residences are tallied there but take no part in
    ``row_shares``, which cover the 47 domestic prefectures only.
    """

    edition: int
    counts: np.ndarray

    def share(self, origin: str, destination: str) -> Fraction:
        if FOREIGN in (origin, destination):
            return Fraction(0)
        domestic = self.counts[: len(DOMESTIC_PREFECTURES), : len(DOMESTIC_PREFECTURES)]
        i, j = PREFECTURE_INDEX[origin], PREFECTURE_INDEX[destination]
        total = int(domestic[i].sum())
        return Fraction(int(domestic[i, j]), total) if total else Fraction(0)

    @property
    def row_shares(self) -> np.ndarray:
        n = len(DOMESTIC_PREFECTURES)
        shares = np.zeros(self.counts.shape, dtype=float)
        domestic = self.counts[:n, :n].astype(float)
        sums = domestic.sum(axis=1, keepdims=True)
        np.divide(domestic, sums, out=shares[:n, :n], where=sums > 0)
        return shares


def mobility_matrix(records: Iterable[PersonRecord], edition: int) -> MobilityMatrix:
    counts = np.zeros((len(PREFECTURE_CODES), len(PREFECTURE_CODES)), dtype=np.int64)
    for r in records:
        if r.edition.value != edition:
            continue
        if r.birth_prefecture is None or r.residence_prefecture is None:
            continue
        counts[PREFECTURE_INDEX[r.birth_prefecture], PREFECTURE_INDEX[r.residence_prefecture]] += 1
    return MobilityMatrix(int(edition), counts)


def mobility_matrices(records: Sequence[PersonRecord]) -> dict[int, MobilityMatrix]:
    return {ed: mobility_matrix(rs, ed) for ed, rs in _by_edition(records).items()}


# -- covariate shares ------------------------------------------------------

def _medal(r):
    return None if r.medal_flag is None else ("yes" if r.medal_flag else "no")


def _income(r):
    return None if r.top_income_flag is TaxStatus.UNAVAILABLE else r.top_income_flag.value


SELECTORS = {
    # name: (categories, value getter, set-valued)
    "social_group": (tuple(g.value for g in SocialGroup), lambda r: r.social_group and r.social_group.value, False),
    "education": (tuple(e.value for e in Education), lambda r: r.education and r.education.value, False),
    "industry": (INDUSTRIES, lambda r: r.industries, True),
    "title": (TITLES, lambda r: r.occupation_titles, True),
    "medal": (("yes", "no"), _medal, False),
    "top_income": (("yes", "no"), _income, False),
}


def covariate_shares(records: Iterable[PersonRecord], selector: str) -> dict[int, dict[str, Fraction]]:
    """Per-edition share of each category.

    For ``industry`` and ``title`` a person counts toward every category they
    hold, people holding none are left out of the denominator, and shares
    may sum past one. Records with the covariate unset are left out too.
    """
    categories, getter, multi = SELECTORS[selector]
    out = {}
    for ed, rs in _by_edition(records).items():
        tally = Counter()
        denominator = 0
        for r in rs:
            value = getter(r)
            if multi:
                if not value:
                    continue
                tally.update(value)
            else:
                if value is None:
                    continue
                tally[value] += 1
            denominator += 1
        cats = list(categories) + sorted(set(tally) - set(categories))
        out[ed] = {c: Fraction(tally[c], denominator) if denominator else Fraction(0) for c in cats}
    return out


# -- ages ------------------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    n: int
    mean: Optional[Fraction]
    sd: Optional[float]  # sample standard deviation


def summarize(hist: Mapping[int, int]) -> Summary:
    n = sum(hist.values())
    if n == 0:
        return Summary(0, None, None)
    mean = Fraction(sum(k * v for k, v in hist.items()), n)
    if n < 2:
        return Summary(n, mean, None)
    ss = sum(v * (k - mean) ** 2 for k, v in hist.items())
    return Summary(n, mean, math.sqrt(ss / (n - 1)))


@dataclass(frozen=True)
class AgeDistributions:
    first_listing: dict  # edition -> Counter(age -> people first listed in that edition)
    first_birth: dict  # edition -> Counter(age at first biological child)
    ambiguous_identities: int

    def summaries(self) -> dict:
        return {
            "first_listing": {ed: summarize(h) for ed, h in self.first_listing.items()},
            "first_birth": {ed: summarize(h) for ed, h in self.first_birth.items()},
        }


def age_distributions(records: Sequence[PersonRecord]) -> AgeDistributions:
    """Age when first listed, and age at first recorded biological child.

    A person is identified across editions by (normalized full name, birth
    year) and counted only in the edition of first appearance. Keys held by
    two or more records within one edition cannot be told apart and are left
    out, mirroring the linker's treatment of ambiguous keys.
    """
    per_key = defaultdict(list)
    for r in records:
        if r.name is not None and r.birth_year is not None:
            per_key[r.name.normalized_full_name, r.birth_year].append(r)
    first_listing = {ed: Counter() for ed in sorted({r.edition.value for r in records})}
    ambiguous = 0
    for key, rs in per_key.items():
        editions = Counter(r.edition.value for r in rs)
        if max(editions.values()) > 1:
            ambiguous += 1
            continue
        first = min(rs, key=lambda r: r.edition.value)
        first_listing[first.edition.value][listing_age(first)] += 1

    first_birth = {ed: Counter() for ed in sorted({r.edition.value for r in records} & PARENT_EDITIONS)}
    for r in records:
        if r.birth_year is None:
            continue
        years = [c.birth_year for c in r.children if c.kind.is_biological and c.birth_year is not None]
        if years and r.edition.value in first_birth:
            first_birth[r.edition.value][min(years) - r.birth_year] += 1
    return AgeDistributions(first_listing, first_birth, ambiguous)


# -- transmission ----------------------------------------------------------

@dataclass(frozen=True)
class TransmissionMatrix:
    """Sons of elites by father's edition (rows 1, 4, 8) and son's edition (columns)."""

    counts: np.ndarray  # 3x5 int
    totals: dict  # child edition -> cleaned elite total

    def __post_init__(self):
        if self.counts.shape != (len(PARENT_ROWS), len(CHILD_EDITIONS)):
            raise ValueError(f"counts must be {len(PARENT_ROWS)}x{len(CHILD_EDITIONS)}")
        for i, p in enumerate(PARENT_ROWS):
            for j, c in enumerate(CHILD_EDITIONS):
                if c < p and self.counts[i, j]:
                    raise ValueError(f"sons of edition-{p} fathers cannot appear in earlier edition {c}")

    def count(self, parent: int, child: int) -> int:
        return int(self.counts[PARENT_ROWS.index(parent), CHILD_EDITIONS.index(child)])

    def proportion(self, parent: int, child: int) -> Fraction:
        total = self.totals.get(child, 0)
        return Fraction(self.count(parent, child), total) if total else Fraction(0)

    @property
    def proportions(self) -> list[list[Fraction]]:
        return [[self.proportion(p, c) for c in CHILD_EDITIONS] for p in PARENT_ROWS]

    def rounded(self, places: int = 3) -> list[list[str]]:
        return [[round_half_up(x, places) for x in row] for row in self.proportions]


def transmission_from_counts(counts, edition_totals: Mapping[int, int]) -> TransmissionMatrix:
    """Build the matrix from a 3x5 array or a ``{(parent, child): count}`` mapping."""
    if isinstance(counts, Mapping):
        arr = np.zeros((len(PARENT_ROWS), len(CHILD_EDITIONS)), dtype=np.int64)
        for (p, c), n in counts.items():
            arr[PARENT_ROWS.index(p), CHILD_EDITIONS.index(c)] = n
    else:
        arr = np.asarray(counts, dtype=np.int64)
    return TransmissionMatrix(arr, {int(k): int(v) for k, v in edition_totals.items()})


def transmission_table(
    links: Iterable[InterEditionLink], edition_totals: Mapping[int, int], include_ambiguous: bool = False
) -> TransmissionMatrix:
    pairs = {(l.father, l.son) for l in links if include_ambiguous or not l.ambiguous}
    tally = Counter((father.edition, son.edition) for father, son in pairs)
    return transmission_from_counts(tally, edition_totals)


def overrepresentation(share, base_rate) -> float:
    """How many times more common elite status is than ``base_rate``."""
    if base_rate <= 0:
        raise ValueError("base rate must be positive")
    return float(Fraction(str(share)) / Fraction(str(base_rate)))


# -- exports ---------------------------------------------------------------

def representation_csv(reps: Mapping[int, Representation]) -> str:
    rows = [
        (r.edition, EditionId.parse(r.edition).year, r.count, round_half_up(r.share_total * 100, 3),
         round_half_up(r.share_male * 100, 3), fraction_text(r.share_total), fraction_text(r.share_male))
        for r in reps.values()
    ]
    return to_csv(["edition", "year", "count", "pct_total", "pct_male", "share_total", "share_male"], rows)


def prefecture_csv(dists: Mapping[int, PrefectureDistribution]) -> str:
    rows = []
    for ed, d in dists.items():
        for code, n in d.counts.items():
            share = "" if d.shares is None else fraction_text(d.shares[code])
            rows.append((ed, code, n, share))
    return to_csv(["edition", "prefecture", "count", "share"], rows)


def mobility_csv(matrices: Mapping[int, MobilityMatrix]) -> str:
    rows = []
    for ed, m in matrices.items():
        for origin in DOMESTIC_PREFECTURES:
            for dest in DOMESTIC_PREFECTURES:
                n = int(m.counts[PREFECTURE_INDEX[origin], PREFECTURE_INDEX[dest]])
                if n:
                    rows.append((ed, origin, dest, n, fraction_text(m.share(origin, dest))))
    return to_csv(["edition", "origin", "destination", "count", "share"], rows)


def shares_csv(shares_by_selector: Mapping[str, Mapping[int, Mapping[str, Fraction]]]) -> str:
    rows = []
    for selector, per_edition in shares_by_selector.items():
        for ed, shares in per_edition.items():
            for cat, share in shares.items():
                rows.append((ed, selector, cat, fraction_text(share), round_half_up(share, 3)))
    return to_csv(["edition", "covariate", "category", "share", "share_rounded"], rows)


def ages_csv(ages: AgeDistributions) -> str:
    rows = []
    for panel in ("first_listing", "first_birth"):
        for ed, hist in getattr(ages, panel).items():
            for age in sorted(hist):
                rows.append((panel, ed, age, hist[age]))
    return to_csv(["panel", "edition", "age", "count"], rows)


def age_summary_csv(ages: AgeDistributions) -> str:
    rows = []
    for panel, per_ed in ages.summaries().items():
        for ed, s in per_ed.items():
            mean = "" if s.mean is None else round_half_up(s.mean, 2)
            sd = "" if s.sd is None else f"{s.sd:.2f}"
            rows.append((panel, ed, s.n, mean, sd))
    return to_csv(["panel", "edition", "n", "mean", "sd"], rows)


def transmission_csv(matrix: TransmissionMatrix) -> str:
    rows = []
    for p in PARENT_ROWS:
        for c in CHILD_EDITIONS:
            rows.append((p, c, matrix.count(p, c), matrix.totals.get(c, ""), round_half_up(matrix.proportion(p, c), 3)))
    return to_csv(["parent_edition", "child_edition", "count", "child_total", "proportion"], rows)
