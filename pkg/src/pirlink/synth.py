"""Synthetic directory worlds with known lineage.

A world is a set of founding families, their children (some of whom become
listed elites themselves), and unrelated listed persons. It is rendered to
five edition files in the ingest format, alongside a ground truth that the
linker and analytics can be scored against.
"""
from __future__ import annotations

import hashlib
import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .core import (
    DOMESTIC_PREFECTURES,
    EDITION_YEARS,
    FOREIGN,
    PARENT_EDITIONS,
    PREFECTURE_NAMES,
    ChildKind,
    ChildRecord,
    EditionId,
    PersonName,
    PersonRecord,
    RecordId,
    TaxStatus,
    Wife,
)
from .ingest import SCHEMA_VERSION, Header, serialize_record
from .linker import InterEditionLink
from .normalize import default_charmap
from .tabular import read_csv, to_csv

# Modern characters used to build names. None of them is a key of the
# default char map; several are images, so archaic spellings get exercised.
NAME_CHARS = "".join(dict.fromkeys(
    "山田中村小林加藤吉井上木松本佐伯清水森川石原岡野宮長谷部藤橋口坂武安岩西東北南大太郎次三"
    "四五郎助吾介作平治正義信雄夫男彦一二之進寛明秀和久利光直昭清孝忠敏弘幸勝克豊国広栄蔵浜"
    "徳恵桜寿実高崎島滝鉄学会亀県権弥児円伝来与頼浅真黒渋礼弁塩静稲当関継万団宝営経総楽気両"
))

SOCIAL_TEXT = {
    "kazoku": ("華族", "男爵", "子爵", "伯爵"),
    "samurai": ("士族",),
    "commoner": ("", "平民"),
}
SOCIAL_WEIGHTS = {"kazoku": 0.04, "samurai": 0.26, "commoner": 0.70}

EDUCATION_TEXT = {
    "imperial_university": ("東京帝国大学法科大学", "京都帝国大学", "東京帝国大学"),
    "other_university": ("東京高等商業学校", "東京高等工業学校", "高等師範学校"),
    "private_school": ("慶應義塾", "東京専門学校", "明治法律学校"),
    "no_higher_education": ("",),
}
EDUCATION_WEIGHTS = {
    "imperial_university": 0.15,
    "other_university": 0.08,
    "private_school": 0.07,
    "no_higher_education": 0.70,
}

# (entry text, industry, title)
OCCUPATIONS = (
    ("第一銀行頭取", "finance", "executive"),
    ("安田銀行取締役", "finance", "executive"),
    ("明治生命保険監査役", "finance", "executive"),
    ("日本鉄道社長", "transportation", "executive"),
    ("日本郵船専務", "transportation", "executive"),
    ("大阪商船取締役", "transportation", "executive"),
    ("朝日新聞社主筆", "information", None),
    ("報知新聞記者", "information", None),
    ("三井物産支配人", "wholesale_retail", None),
    ("高島屋商店取締役", "wholesale_retail", "executive"),
    ("鐘淵紡績社長", "manufacturing", "executive"),
    ("王子製紙技師", "manufacturing", "scholar_engineer"),
    ("東京帝国大学教授", "professional", "scholar_engineer"),
    ("弁護士", "professional", "judge_lawyer"),
    ("東京地方裁判所判事", "professional", "judge_lawyer"),
    ("順天堂病院医師", "professional", "physician"),
    ("開業医師", "professional", "physician"),
    ("陸軍少将", "military", "military_officer"),
    ("海軍大佐", "military", "military_officer"),
    ("内務省書記官", "public_administration", None),
    ("東京市長", "public_administration", None),
    ("衆議院議員", "public_administration", None),
    ("中学校教諭", None, "teacher"),
    ("県立中学校長", None, "teacher"),
    ("農業", None, None),
)

DOMAIN_ALIASES = {"46": "薩摩国", "35": "長門国", "39": "土佐国", "17": "加賀国", "15": "越後国"}
FOREIGN_PLACES = ("台湾台北", "朝鮮京城", "関東州大連")
KANJI_DIGITS = "一二三四五六七八"
NOISE_FIELDS = frozenset({"birth_year", "name", "child_birth_year", "residence", "birthplace", "under_age"})


@dataclass(frozen=True)
class SynthParams:
    seed: int = 0
    families: int = 100
    surname_pool_size: int = 300
    given_name_pool_size: int = 600
    children_per_family: tuple = (0.08, 0.12, 0.2, 0.2, 0.16, 0.12, 0.07, 0.05)  # P(n children), n = 0..7
    daughter_probability: float = 0.5
    adopted_son_probability: float = 0.15
    illegitimate_probability: float = 0.0
    son_relisting_probability: float = 0.4
    succession_probability: float = 0.1
    collision_rate: float = 0.0
    extra_persons: int = 100
    archaic_rate: float = 0.1
    foreign_probability: float = 0.03
    noise: Mapping = field(default_factory=dict)  # field -> probability the value goes missing

    def __post_init__(self):
        probs = {
            "daughter_probability": self.daughter_probability,
            "adopted_son_probability": self.adopted_son_probability,
            "illegitimate_probability": self.illegitimate_probability,
            "son_relisting_probability": self.son_relisting_probability,
            "succession_probability": self.succession_probability,
            "collision_rate": self.collision_rate,
            "archaic_rate": self.archaic_rate,
            "foreign_probability": self.foreign_probability,
        }
        probs.update({f"noise[{k}]": v for k, v in self.noise.items()})
        for name, p in probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        unknown = set(self.noise) - NOISE_FIELDS
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        if self.surname_pool_size < 1 or self.given_name_pool_size < 1:
            raise ValueError("name pools must be non-empty")
        if self.families < 0 or self.extra_persons < 0:
            raise ValueError("families and extra_persons must be non-negative")
        dist = tuple(float(p) for p in self.children_per_family)
        if not dist or any(p < 0 for p in dist) or sum(dist) <= 0:
            raise ValueError("children_per_family must be a non-negative distribution with positive mass")
        object.__setattr__(self, "children_per_family", dist)
        object.__setattr__(self, "noise", dict(sorted(self.noise.items())))

    @property
    def world_id(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True)
        return "synth-" + hashlib.sha256(blob.encode()).hexdigest()[:12]

    @classmethod
    def from_mapping(cls, values: Mapping) -> "SynthParams":
        values = dict(values)
        if "children_per_family" in values:
            values["children_per_family"] = tuple(values["children_per_family"])
        return cls(**values)


# -- ground truth ----------------------------------------------------------

@dataclass(frozen=True)
class RecordFacts:
    """What a record really says, before any noise."""

    person_uid: str
    surname: str
    given: str
    birth_year: int
    birth_prefecture: Optional[str]
    residence_prefecture: Optional[str]
    social_group: str
    education: str
    industries: frozenset
    titles: frozenset
    medal: bool
    top_income: Optional[bool]
    father_name: Optional[str]
    mother_name: Optional[str]
    children: tuple  # ChildRecord values as listed
    noisy: bool = False


@dataclass
class GroundTruth:
    world_id: str
    persons: dict  # uid -> (surname, given, birth_year)
    records: dict  # RecordId -> uid
    edges: list  # (father uid, child uid, kind), kind may be "illegitimate_son"
    facts: dict  # RecordId -> RecordFacts

    def true_reappearances(self) -> set:
        """(father record, son record) pairs the linker should recover.

        A pair exists when a legitimate son or adopted son listed in the
        father's record (born by the edition year) is himself listed in a
        strictly later edition.
        """
        by_person = defaultdict(list)
        for rid, uid in self.records.items():
            by_person[uid].append(rid)
        sons = defaultdict(list)
        for father, child, kind in self.edges:
            if kind in (ChildKind.BIOLOGICAL_SON.value, ChildKind.ADOPTED_SON.value):
                sons[father].append(child)
        pairs = set()
        for rid, uid in self.records.items():
            if rid.edition not in PARENT_EDITIONS:
                continue
            year = EDITION_YEARS[rid.edition]
            for child in sons.get(uid, ()):
                if self.persons[child][2] > year:
                    continue
                for son_rid in by_person.get(child, ()):
                    if son_rid.edition > rid.edition:
                        pairs.add((rid, son_rid))
        return pairs

    def tables(self) -> dict[str, str]:
        persons = to_csv(
            ["person_uid", "surname", "given", "birth_year"],
            [(uid, *self.persons[uid]) for uid in sorted(self.persons)],
        )
        records = to_csv(
            ["person_uid", "edition", "record_id"],
            [(uid, rid.edition, rid.seq) for rid, uid in sorted(self.records.items())],
        )
        edges = to_csv(["father_uid", "child_uid", "kind"], sorted(self.edges))
        return {"persons.csv": persons, "records.csv": records, "edges.csv": edges}

    @classmethod
    def read(cls, directory, world_id: str = "") -> "GroundTruth":
        directory = Path(directory)
        persons = {
            r["person_uid"]: (r["surname"], r["given"], int(r["birth_year"]))
            for r in read_csv(directory / "persons.csv")
        }
        records = {
            RecordId(int(r["edition"]), int(r["record_id"])): r["person_uid"]
            for r in read_csv(directory / "records.csv")
        }
        edges = [(r["father_uid"], r["child_uid"], r["kind"]) for r in read_csv(directory / "edges.csv")]
        meta = directory / "world.json"
        if meta.exists():
            world_id = json.loads(meta.read_text(encoding="utf-8"))["world_id"]
        return cls(world_id, persons, records, edges, {})


@dataclass
class SyntheticWorld:
    params: SynthParams
    lines: dict  # edition index -> list of record lines
    truth: GroundTruth

    @property
    def world_id(self) -> str:
        return self.truth.world_id

    def edition_text(self, edition: int) -> str:
        header = Header(EditionId(edition), SCHEMA_VERSION, self.world_id).render()
        return "\n".join([header] + self.lines[edition]) + "\n"

    @property
    def editions(self) -> dict[int, str]:
        return {ed: self.edition_text(ed) for ed in EDITION_YEARS}

    def write(self, directory) -> dict[int, Path]:
        directory = Path(directory)
        (directory / "editions").mkdir(parents=True, exist_ok=True)
        (directory / "truth").mkdir(parents=True, exist_ok=True)
        paths = {}
        for ed, text in self.editions.items():
            paths[ed] = directory / "editions" / f"edition_{ed:02d}.txt"
            paths[ed].write_text(text, encoding="utf-8")
        for name, text in self.truth.tables().items():
            (directory / "truth" / name).write_text(text, encoding="utf-8")
        meta = {"world_id": self.world_id, "params": asdict(self.params)}
        (directory / "truth" / "world.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return paths

    def plant_namesake(self, record_id: RecordId) -> RecordId:
        """Append an unrelated person sharing ``record_id``'s name and birth year to the same edition."""
        facts = self.truth.facts[record_id]
        ed = record_id.edition
        seq = len(self.lines[ed]) + 1
        uid = f"N{len(self.truth.persons):05d}"
        rid = RecordId(ed, seq)
        self.truth.persons[uid] = (facts.surname, facts.given, facts.birth_year)
        self.truth.records[rid] = uid
        namesake = RecordFacts(
            uid, facts.surname, facts.given, facts.birth_year, None, None, "commoner",
            "no_higher_education", frozenset(), frozenset(), False,
            False if EditionId(ed).has_tax else None, None, None, (),
        )
        self.truth.facts[rid] = namesake
        self.lines[ed].append(serialize_record(_render(rid, namesake, {}, None, ())))
        return rid


# -- generation ------------------------------------------------------------

@dataclass
class _Person:
    uid: str
    surname: str
    given: str
    birth_year: int
    role: str  # founder, son, daughter, extra
    family: Optional[int] = None
    kind: Optional[ChildKind] = None
    legitimate: bool = True
    successor: bool = False  # listed under the father's full name
    editions: list = field(default_factory=list)
    children: list = field(default_factory=list)  # uids, in source order
    attrs: dict = field(default_factory=dict)

    @property
    def full(self) -> str:
        return self.surname + self.given


class _Generator:
    def __init__(self, params: SynthParams):
        self.p = params
        main, namesakes = np.random.SeedSequence(params.seed).spawn(2)
        self.rng = np.random.default_rng(main)
        self.crng = np.random.default_rng(namesakes)
        self.persons: dict[str, _Person] = {}
        inverse = defaultdict(list)
        for old, new in sorted(default_charmap().entries.items()):
            inverse[new].append(old)
        self.archaic = dict(inverse)
        self.surnames = self._pool(params.surname_pool_size, (1, 2, 3), (0.15, 0.7, 0.15))
        self.givens = self._pool(params.given_name_pool_size, (1, 2), (0.2, 0.8))

    def _pool(self, size, lengths, weights):
        pool, seen = [], set()
        attempts = 0
        while len(pool) < size:
            attempts += 1
            if attempts > size * 50:
                raise ValueError(f"cannot draw {size} distinct names")
            n = int(self.rng.choice(lengths, p=weights))
            name = "".join(NAME_CHARS[i] for i in self.rng.integers(0, len(NAME_CHARS), n))
            if name not in seen:
                seen.add(name)
                pool.append(name)
        return pool

    def _given(self, avoid=()):
        for _ in range(1000):
            g = self.givens[int(self.rng.integers(len(self.givens)))]
            if g not in avoid:
                return g
        raise ValueError("given-name pool too small")

    def _pick(self, weights: Mapping[str, float]):
        keys = list(weights)
        probs = np.array([weights[k] for k in keys], dtype=float)
        return keys[int(self.rng.choice(len(keys), p=probs / probs.sum()))]

    def _listing(self, birth_year, min_age, max_age=85, rate=0.7):
        eligible = [ed for ed, y in EDITION_YEARS.items() if min_age <= y - birth_year <= max_age]
        chosen = [ed for ed in eligible if self.rng.random() < rate]
        if eligible and not chosen:
            chosen = [eligible[int(self.rng.integers(len(eligible)))]]
        return chosen

    def _add(self, person: _Person) -> _Person:
        self.persons[person.uid] = person
        return person

    def _attrs(self, person: _Person, like: Optional[_Person] = None):
        rng = self.rng
        birth = like.attrs["birth_pref"] if like is not None else self._prefecture()
        if rng.random() < self.p.foreign_probability:
            birth = FOREIGN
        residence = birth if (birth != FOREIGN and rng.random() < 0.55) else self._prefecture()
        if rng.random() < self.p.foreign_probability:
            residence = FOREIGN
        social = like.attrs["social"] if like is not None else self._pick(SOCIAL_WEIGHTS)
        n_occ = int(rng.integers(0, 4))
        occ = [OCCUPATIONS[int(i)] for i in rng.integers(0, len(OCCUPATIONS), n_occ)]
        decoration = int(rng.integers(1, 9)) if rng.random() < 0.35 else None
        person.attrs = {
            "birth_pref": birth,
            "residence_pref": residence,
            "social": social,
            "social_text": SOCIAL_TEXT[social][int(rng.integers(len(SOCIAL_TEXT[social])))],
            "education": (edu := self._pick(EDUCATION_WEIGHTS)),
            "education_text": EDUCATION_TEXT[edu][int(rng.integers(len(EDUCATION_TEXT[edu])))],
            "occupations": occ,
            "decoration": decoration,
            "birth_text": self._place_text(birth),
            "residence_text": self._place_text(residence),
        }

    def _prefecture(self):
        # Tokyo and Osaka draw more elites
        weights = np.ones(len(DOMESTIC_PREFECTURES))
        weights[12] = 8.0
        weights[26] = 3.0
        return DOMESTIC_PREFECTURES[int(self.rng.choice(len(weights), p=weights / weights.sum()))]

    def _place_text(self, code):
        if code == FOREIGN:
            return FOREIGN_PLACES[int(self.rng.integers(len(FOREIGN_PLACES)))]
        if code in DOMAIN_ALIASES and self.rng.random() < 0.3:
            return DOMAIN_ALIASES[code]
        name = PREFECTURE_NAMES[int(code) - 1][1]
        suffix = "" if code == "01" else ("府" if code in ("13", "26", "27") else "県")
        return name + suffix

    def build(self):
        p, rng = self.p, self.rng
        n_children = np.arange(len(p.children_per_family))
        dist = np.array(p.children_per_family) / sum(p.children_per_family)
        for fam in range(p.families):
            founder = self._add(
                _Person(f"F{fam:05d}", self.surnames[int(rng.integers(len(self.surnames)))], self._given(),
                        int(rng.integers(1835, 1881)), "founder", fam)
            )
            founder.editions = self._listing(founder.birth_year, 30)
            if not any(ed in PARENT_EDITIONS for ed in founder.editions):
                parent_eds = [ed for ed in PARENT_EDITIONS if 30 <= EDITION_YEARS[ed] - founder.birth_year <= 85]
                founder.editions = sorted(set(founder.editions) | {min(parent_eds)})
            self._attrs(founder)
            founder.attrs["father_name"] = founder.surname + self._given()
            founder.attrs["mother_name"] = self._given()
            founder.attrs["wife"] = (self._given(), founder.birth_year + int(rng.integers(3, 13)))

            kids = []
            used = {founder.given}
            for _ in range(int(rng.choice(n_children, p=dist))):
                if rng.random() < p.daughter_probability:
                    kind, legit = ChildKind.BIOLOGICAL_DAUGHTER, True
                else:
                    kind, legit = ChildKind.BIOLOGICAL_SON, rng.random() >= p.illegitimate_probability
                kids.append((kind, legit, founder.birth_year + int(rng.integers(20, 46))))
            if rng.random() < p.adopted_son_probability:
                kids.append((ChildKind.ADOPTED_SON, True, founder.birth_year + int(rng.integers(18, 36))))
            kids.sort(key=lambda k: k[2])  # stable: source lists elder first, ties in draw order
            for i, (kind, legit, year) in enumerate(kids):
                given = self._given(used)
                used.add(given)
                child = self._add(
                    _Person(f"F{fam:05d}C{i:02d}", founder.surname, given, year,
                            "daughter" if kind is ChildKind.BIOLOGICAL_DAUGHTER else "son", fam, kind, legit)
                )
                founder.children.append(child.uid)

            relisted = []
            for uid in founder.children:
                child = self.persons[uid]
                if child.kind is ChildKind.BIOLOGICAL_DAUGHTER or rng.random() >= p.son_relisting_probability:
                    continue
                child.editions = self._listing(child.birth_year, 25, rate=0.8)
                if child.editions:
                    self._attrs(child, like=founder)
                    child.attrs["father_name"] = founder.full
                    child.attrs["mother_name"] = founder.attrs["wife"][0]
                    relisted.append(child)
            if relisted and rng.random() < p.succession_probability:
                # a brother born the same year would hit the same succession key
                son_years = Counter(self.persons[u].birth_year for u in founder.children if self.persons[u].kind.is_son)
                heir = [c for c in relisted if c.legitimate and son_years[c.birth_year] == 1][:1]
                for c in heir:
                    c.successor = True

        for k in range(p.extra_persons):
            extra = self._add(
                _Person(f"X{k:05d}", self.surnames[int(rng.integers(len(self.surnames)))], self._given(),
                        int(rng.integers(1840, 1915)), "extra")
            )
            extra.editions = self._listing(extra.birth_year, 25)
            self._attrs(extra)
        self._resolve_collisions()

    # -- collision-free guarantee ----------------------------------------

    def _listed_name(self, person: _Person) -> str:
        if person.successor:
            return self.persons[f"F{person.family:05d}"].full
        return person.full

    def _conflicts(self):
        owners = defaultdict(set)
        for person in self.persons.values():
            if person.editions:
                owners[self._listed_name(person), person.birth_year].add(person.uid)
        for key, uids in sorted(owners.items()):
            if len(uids) > 1:
                yield sorted(uids)[-1], None
        for founder in self.persons.values():
            if founder.role != "founder":
                continue
            full = founder.full
            for uid in founder.children:
                child = self.persons[uid]
                if not child.kind.is_son:
                    continue
                keys = [(full[:k] + child.given, child.birth_year) for k in (1, 2, 3) if len(full) > k]
                keys.append((full, child.birth_year))
                for key in keys:
                    for other in sorted(owners.get(key, ())):
                        if other != uid:
                            yield other, uid

    def _rename(self, uid: str):
        person = self.persons[uid]
        avoid = {person.given}
        if person.family is not None:
            founder = self.persons[f"F{person.family:05d}"]
            avoid |= {founder.given} | {self.persons[c].given for c in founder.children}
        person.given = self._given(avoid)

    def _resolve_collisions(self):
        for _ in range(10_000):
            conflict = next(iter(self._conflicts()), None)
            if conflict is None:
                return
            other, son = conflict
            victim = other
            if self.persons[other].successor:
                victim = son if son is not None else other
            if self.persons[victim].successor:
                victim = f"F{self.persons[victim].family:05d}"
            self._rename(victim)
        raise RuntimeError("could not make the world collision-free; enlarge the name pools")

    # -- rendering --------------------------------------------------------

    def _maybe_archaic(self, text: str) -> str:
        if not text or self.p.archaic_rate == 0:
            return text
        out = []
        for ch in text:
            variants = self.archaic.get(ch)
            if variants and self.rng.random() < self.p.archaic_rate:
                ch = variants[int(self.rng.integers(len(variants)))]
            out.append(ch)
        return "".join(out)

    def _noise(self, name: str) -> bool:
        prob = self.p.noise.get(name, 0.0)
        return prob > 0 and self.rng.random() < prob

    def render(self) -> SyntheticWorld:
        listings = defaultdict(list)
        for uid in sorted(self.persons):
            for ed in self.persons[uid].editions:
                listings[ed].append(uid)
        lines, records, facts = {}, {}, {}
        for ed in EDITION_YEARS:
            order = list(listings[ed])
            self.rng.shuffle(order)
            lines[ed] = []
            for seq, uid in enumerate(order, start=1):
                rid = RecordId(ed, seq)
                fact, record = self._record(rid, self.persons[uid])
                records[rid] = uid
                facts[rid] = fact
                lines[ed].append(serialize_record(record))
        persons = {uid: (p.surname, p.given, p.birth_year) for uid, p in self.persons.items()}
        edges = []
        for founder in self.persons.values():
            for uid in founder.children:
                child = self.persons[uid]
                kind = child.kind.value if child.legitimate else "illegitimate_son"
                edges.append((founder.uid, uid, kind))
        truth = GroundTruth(self.p.world_id, persons, records, edges, facts)
        world = SyntheticWorld(self.p, lines, truth)
        self._plant_collisions(world)
        return world

    def _record(self, rid: RecordId, person: _Person):
        ed = EditionId(rid.edition)
        a = person.attrs
        if person.successor:
            founder = self.persons[f"F{person.family:05d}"]
            surname, given = founder.surname, founder.given
        else:
            surname, given = person.surname, person.given
        occupations = a["occupations"]
        children = ()
        if ed.has_children:
            kids = [self.persons[uid] for uid in person.children if self.persons[uid].birth_year <= ed.year]
            children = tuple(
                ChildRecord(c.given, c.birth_year, c.kind, c.legitimate, i) for i, c in enumerate(kids, start=1)
            )
        tax = None
        if ed.has_tax:
            tax = bool(self.rng.random() < 0.3)
        fact = RecordFacts(
            person_uid=person.uid,
            surname=surname,
            given=given,
            birth_year=person.birth_year,
            birth_prefecture=a["birth_pref"],
            residence_prefecture=a["residence_pref"],
            social_group=a["social"],
            education=a["education"],
            industries=frozenset(o[1] for o in occupations if o[1]),
            titles=frozenset(o[2] for o in occupations if o[2]),
            medal=a["decoration"] is not None and a["decoration"] <= 5,
            top_income=tax,
            father_name=a.get("father_name") if ed.has_children else None,
            mother_name=a.get("mother_name") if ed.has_children else None,
            children=children,
        )
        noise = {f: self._noise(f) for f in sorted(NOISE_FIELDS)}
        wife = a.get("wife") if ed.has_children else None
        record = _render(rid, fact, noise, wife, occupations, self._maybe_archaic, a)
        if any(noise.values()):
            fact = replace(fact, noisy=True)
        return fact, record

    def _plant_collisions(self, world: SyntheticWorld):
        # Every son listing consumes the same draws whatever the rate, so the
        # planted set only grows as collision_rate rises.
        targets = sorted(
            rid for rid, uid in world.truth.records.items() if self.persons[uid].role == "son"
        )
        for rid in targets:
            hit = self.crng.random() < self.p.collision_rate
            if hit:
                world.plant_namesake(rid)


def _render(rid, fact: RecordFacts, noise: Mapping[str, bool], wife, occupations, archaic=lambda s: s, attrs=None):
    ed = EditionId(rid.edition)
    attrs = attrs or {}
    birth_year = fact.birth_year
    if noise.get("under_age"):
        birth_year = ed.year - 16
    if noise.get("birth_year"):
        birth_year = None
    name = None if noise.get("name") else PersonName(
        archaic(fact.surname) + archaic(fact.given), archaic(fact.surname), archaic(fact.given)
    )
    children = fact.children
    if noise.get("child_birth_year") and children:
        first = children[0]
        children = (ChildRecord(first.given_name, None, first.kind, first.legitimate, 1),) + children[1:]
    children = tuple(
        ChildRecord(archaic(c.given_name), c.birth_year, c.kind, c.legitimate, c.sequence_in_source) for c in children
    )
    decoration = attrs.get("decoration")
    if ed.has_tax:
        tax = TaxStatus.YES if fact.top_income else TaxStatus.NO
    else:
        tax = TaxStatus.UNAVAILABLE
    return PersonRecord(
        record_id=rid,
        name=name,
        birth_year=birth_year,
        birth_place_text="" if noise.get("birthplace") else attrs.get("birth_text", ""),
        residence_text="" if noise.get("residence") else attrs.get("residence_text", ""),
        social_text=attrs.get("social_text", ""),
        education_text=archaic(attrs.get("education_text", "")),
        decoration_text=f"勲{KANJI_DIGITS[decoration - 1]}等" if decoration else "",
        occupation_entries=tuple(archaic(o[0]) for o in occupations),
        top_income_flag=tax,
        father_name=archaic(fact.father_name) if fact.father_name else None,
        mother_name=fact.mother_name,
        wife=Wife(wife[0], wife[1]) if wife else None,
        children=children,
    )


def generate(params: SynthParams) -> SyntheticWorld:
    """Build and render a world; the same params always give byte-identical files."""
    gen = _Generator(params)
    gen.build()
    return gen.render()


# -- scoring ---------------------------------------------------------------

@dataclass(frozen=True)
class LinkageScore:
    precision: Optional[Fraction]  # None when no non-ambiguous link was emitted
    recall: Optional[Fraction]  # None when the world has no true reappearance
    ambiguous_count: int
    correct: int
    emitted: int
    true_total: int


def score_linkage(links: Iterable[InterEditionLink], truth: GroundTruth, world_id: Optional[str] = None) -> LinkageScore:
    """Compare non-ambiguous links with the true father-son reappearances."""
    if world_id is not None and world_id != truth.world_id:
        raise ValueError(f"links come from world {world_id!r}, truth is for {truth.world_id!r}")
    links = list(links)
    for link in links:
        for rid in link.pair:
            if rid not in truth.records:
                raise ValueError(f"link refers to record {rid} unknown to world {truth.world_id!r}")
    expected = truth.true_reappearances()
    firm = {l.pair for l in links if not l.ambiguous}
    ambiguous = sum(1 for l in links if l.ambiguous)
    correct = len(firm & expected)
    precision = Fraction(correct, len(firm)) if firm else None
    recall = Fraction(correct, len(expected)) if expected else None
    return LinkageScore(precision, recall, ambiguous, correct, len(firm), len(expected))


def score_csv(score: LinkageScore) -> str:
    def fmt(x):
        return "" if x is None else f"{float(x):.6f}"

    return to_csv(
        ["precision", "recall", "ambiguous_count", "correct", "emitted_non_ambiguous", "true_reappearances"],
        [(fmt(score.precision), fmt(score.recall), score.ambiguous_count, score.correct, score.emitted, score.true_total)],
    )
