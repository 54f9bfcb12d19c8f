from fractions import Fraction

import numpy as np
import pytest

import oracles
from conftest import fake_population, rec, world_records
from pirlink.analytics import (
    SELECTORS,
    MissingPopulation,
    PopulationTable,
    age_distributions,
    age_summary_csv,
    covariate_shares,
    edition_totals,
    mobility_csv,
    mobility_matrices,
    mobility_matrix,
    overrepresentation,
    prefecture_csv,
    prefecture_distribution,
    representation_csv,
    representation_rate,
    shares_csv,
    summarize,
    transmission_csv,
    transmission_from_counts,
    transmission_table,
)
from pirlink.core import FOREIGN, RecordId, SocialGroup, TaxStatus
from pirlink.linker import InterEditionLink


def test_population_table():
    pop = PopulationTable([(1903, "total", 100)])
    assert pop.get(1903, "total") == 100
    with pytest.raises(MissingPopulation):
        pop.get(1903, "male")
    with pytest.raises(ValueError):
        PopulationTable([(1903, "total", 1), (1903, "total", 2)])
    with pytest.raises(ValueError):
        PopulationTable([(1903, "total", 0)])


def test_population_from_csv(tmp_path):
    path = tmp_path / "pop.csv"
    path.write_text("year,scope,population\n1903,total,45000000\n1903,male,22600000\n", encoding="utf-8")
    reps = representation_rate({1: 9000}, PopulationTable.from_csv(path))
    assert reps[1].share_total == Fraction(1, 5000)
    assert representation_csv(reps).splitlines()[1] == "1,1903,9000,0.020,0.040,1/5000,9/22600"


def test_representation_missing_year():
    with pytest.raises(MissingPopulation):
        representation_rate({4: 10}, PopulationTable([(1903, "total", 1), (1903, "male", 1)]))


def test_mobility_foreign_and_missing():
    rs = [rec(1, 1, birth_prefecture="13", residence_prefecture="13"),
          rec(1, 2, birth_prefecture="13", residence_prefecture="27"),
          rec(1, 3, birth_prefecture="13", residence_prefecture=FOREIGN),
          rec(1, 4, birth_prefecture=FOREIGN, residence_prefecture="13"),
          rec(1, 5, birth_prefecture="13")]
    m = mobility_matrix(rs, 1)
    assert m.counts.shape == (48, 48) and m.counts.sum() == 4
    assert m.share("13", "13") == Fraction(1, 2)
    assert m.share("13", FOREIGN) == 0
    row = m.row_shares[12]
    assert row.sum() == pytest.approx(1.0, abs=1e-12)
    assert not m.row_shares[47].any() and not m.row_shares[:, 47].any()
    assert mobility_csv({1: m}).splitlines() == [
        "edition,origin,destination,count,share", "1,13,13,1,1/2", "1,13,27,1,1/2"]


def test_prefecture_distribution_drops_foreign():
    rs = [rec(4, 1, residence_prefecture="01"), rec(4, 2, residence_prefecture=FOREIGN), rec(4, 3)]
    d = prefecture_distribution(rs)[4]
    assert sum(d.counts.values()) == 1 and d.shares is None and len(d.counts) == 47
    pop = PopulationTable([(1920, f"{i:02d}", 1000) for i in range(1, 48)])
    shared = prefecture_distribution(rs, pop)[4]
    assert shared.shares["01"] == Fraction(1, 1000)
    assert prefecture_csv({4: shared}).splitlines()[1] == "4,01,1,1/1000"


def test_covariate_shares_rules():
    rs = [rec(10, 1, social_group=SocialGroup.KAZOKU, industries=frozenset({"finance", "manufacturing"}),
              top_income_flag=TaxStatus.YES),
          rec(10, 2, social_group=SocialGroup.COMMONER, industries=frozenset({"finance"})),
          rec(10, 3, industries=frozenset())]
    assert covariate_shares(rs, "social_group")[10]["kazoku"] == Fraction(1, 2)
    ind = covariate_shares(rs, "industry")[10]
    assert ind["finance"] == 1 and ind["manufacturing"] == Fraction(1, 2)
    assert covariate_shares(rs, "top_income")[10] == {"yes": Fraction(1, 3), "no": Fraction(2, 3)}
    assert covariate_shares([rec(1, 1)], "top_income")[1] == {"yes": 0, "no": 0}
    text = shares_csv({"social_group": covariate_shares(rs, "social_group")})
    assert "10,social_group,kazoku,1/2,0.500" in text.splitlines()


def test_summarize():
    s = summarize({40: 1, 50: 1})
    assert s.n == 2 and s.mean == 45 and s.sd == pytest.approx(7.0710678, rel=1e-7)
    assert summarize({}).mean is None and summarize({30: 1}).sd is None


def test_age_distributions_first_listing_and_births():
    rs = [rec(1, 1, "山田", "太郎", 1850, children=[("養", 1870, "a"), ("一郎", 1878, "s"), ("花", 1876, "d")]),
          rec(4, 1, "山田", "太郎", 1850),
          rec(4, 2, "田中", "一", 1880), rec(4, 3, "田中", "一", 1880)]
    ages = age_distributions(rs)
    assert ages.first_listing == {1: {53: 1}, 4: {}}
    assert ages.ambiguous_identities == 1
    assert ages.first_birth == {1: {26: 1}, 4: {}}
    assert age_summary_csv(ages).splitlines()[1] == "first_listing,1,1,53.00,"


# Published sons-of-elites counts and cleaned totals per edition.
TABLE3_COUNTS = [[15, 155, 285, 313, 464], [0, 47, 798, 821, 1942], [0, 0, 104, 366, 1505]]
TOTALS = {1: 2892, 4: 13759, 8: 24931, 10: 25846, 12: 54497}
TABLE3_SHARES = [["0.005", "0.011", "0.011", "0.012", "0.009"],
                 ["0.000", "0.003", "0.032", "0.032", "0.036"],
                 ["0.000", "0.000", "0.004", "0.014", "0.028"]]


def test_transmission_rejects_backward_cells():
    bad = [row[:] for row in TABLE3_COUNTS]
    bad[2][0] = 1
    with pytest.raises(ValueError):
        transmission_from_counts(bad, TOTALS)
    with pytest.raises(ValueError):
        transmission_from_counts(np.zeros((2, 5)), TOTALS)


def test_transmission_from_mapping_and_csv():
    m = transmission_from_counts({(1, 4): 155, (4, 12): 1942}, TOTALS)
    assert m.count(1, 4) == 155 and m.proportion(4, 12) == Fraction(1942, 54497)
    lines = transmission_csv(m).splitlines()
    assert lines[0] == "parent_edition,child_edition,count,child_total,proportion"
    assert "1,4,155,13759,0.011" in lines


def test_transmission_table_counts_unique_pairs():
    a = InterEditionLink(RecordId(1, 1), RecordId(4, 2), ("succession_match",))
    b = InterEditionLink(RecordId(1, 1), RecordId(4, 3), ("candidate_name_match:2",), True)
    t = transmission_table([a, a, b], {4: 10})
    assert t.count(1, 4) == 1
    assert transmission_table([a, b], {4: 10}, include_ambiguous=True).count(1, 4) == 2
    assert t.proportion(1, 8) == 0


def test_overrepresentation():
    assert overrepresentation(0.03, 0.001) == pytest.approx(30.0)
    with pytest.raises(ValueError):
        overrepresentation(0.03, 0)


def test_against_oracles_on_one_world(small_world):
    records = world_records(small_world)
    pop_rows = fake_population(1)
    pop = {(y, s): n for y, s, n in pop_rows}
    reps = representation_rate(edition_totals(records), PopulationTable(pop_rows))
    assert {ed: (r.count, r.share_total, r.share_male) for ed, r in reps.items()} == oracles.representation(records, pop)
    assert {ed: d.counts for ed, d in prefecture_distribution(records).items()} == oracles.prefecture_counts(records)
    mob = mobility_matrices(records)
    expected = oracles.mobility(records)
    for ed, m in mob.items():
        got = {(o, d): (int(m.counts[i, j]), m.share(o, d))
               for i, o in enumerate(oracles.CODES) for j, d in enumerate(oracles.CODES) if m.counts[i, j]}
        assert got == expected[ed]
    for name in SELECTORS:
        got = covariate_shares(records, name)
        assert {ed: {c: v for c, v in cats.items() if v} for ed, cats in got.items()} == \
            oracles.nonzero_shares(records, name)
    ages = age_distributions(records)
    assert ages.first_listing == oracles.first_listing(records)
    assert ages.first_birth == oracles.first_birth(records)
