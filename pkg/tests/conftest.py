import pytest

from pirlink.core import ChildKind, ChildRecord, PersonName, PersonRecord, RecordId, TaxStatus, EditionId
from pirlink.ingest import read_edition_text, clean
from pirlink.normalize import Classifier, classify_records
from pirlink.synth import SynthParams, generate

KIND = {"s": ChildKind.BIOLOGICAL_SON, "d": ChildKind.BIOLOGICAL_DAUGHTER, "a": ChildKind.ADOPTED_SON}


def rec(edition, seq, surname="山田", given="太郎", birth_year=1850, children=(), **kw):
    """Record builder. ``children`` items are (given, year, kind letter[, legitimate])."""
    kids = tuple(
        ChildRecord(c[0], c[1], KIND[c[2]], c[3] if len(c) > 3 else True, i)
        for i, c in enumerate(children, start=1)
    )
    if "top_income_flag" not in kw:
        kw["top_income_flag"] = TaxStatus.NO if EditionId(edition).has_tax else TaxStatus.UNAVAILABLE
    name = None if surname is None else PersonName(surname + (given or ""), surname, given or "")
    return PersonRecord(RecordId(edition, seq), name, birth_year, children=kids, **kw)


def world_records(world, classifier=None):
    classifier = classifier or Classifier.default()
    out = []
    for ed, text in world.editions.items():
        cleaned, _ = clean(read_edition_text(text, ed))
        out += classify_records(cleaned, classifier)
    return out


@pytest.fixture(scope="session")
def classifier():
    return Classifier.default()


@pytest.fixture(scope="session")
def small_world():
    return generate(SynthParams(seed=11, families=60, extra_persons=40))


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}")


def fake_population(seed=0):
    """Positive made-up counts for every (year, scope) the analytics may ask for."""
    import random

    rng = random.Random(seed)
    rows = []
    for year in (1903, 1915, 1928, 1934, 1939):
        total = rng.randint(40_000_000, 70_000_000)
        rows += [(year, "total", total), (year, "male", total // 2 + rng.randint(0, 1000))]
    for year in (1920, 1930):
        rows += [(year, f"{i:02d}", rng.randint(500_000, 5_000_000)) for i in range(1, 48)]
    return rows
