"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed at the end of the run."""
import functools
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np

import oracles
from conftest import ACCEPTANCE, fake_population, world_records
from pirlink.analytics import (
    SELECTORS,
    PopulationTable,
    age_distributions,
    covariate_shares,
    edition_totals,
    mobility_matrices,
    prefecture_distribution,
    representation_rate,
    transmission_from_counts,
    transmission_table,
)
from pirlink.cli import main
from pirlink.core import EditionId, RecordId
from pirlink.family import HISTOGRAM_PANELS, build_graph, family_composition_histograms
from pirlink.ingest import AttritionReport, attrition_csv, read_edition_text
from pirlink.linker import SUCCESSION, InterEditionLink, link_editions
from pirlink.synth import SynthParams, generate, score_linkage
from conftest import rec


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            ACCEPTANCE[number] = (False, title)
            fn(*args, **kwargs)
            ACCEPTANCE[number] = (True, title)

        return run

    return wrap


# Published counts of elites' sons (father's edition by son's edition), the
# cleaned totals per edition, and the published proportions.
SONS = [[15, 155, 285, 313, 464], [0, 47, 798, 821, 1942], [0, 0, 104, 366, 1505]]
CLEANED = {1: 2892, 4: 13759, 8: 24931, 10: 25846, 12: 54497}
PUBLISHED_SHARES = [
    ["0.005", "0.011", "0.011", "0.012", "0.009"],
    ["0.000", "0.003", "0.032", "0.032", "0.036"],
    ["0.000", "0.000", "0.004", "0.014", "0.028"],
]
# raw and cleaned entries per edition, and the published attrition rates
RAW = {1: 3353, 4: 14060, 8: 25221, 10: 26185, 12: 55781}
PUBLISHED_ATTRITION = {1: "0.137", 4: "0.021", 8: "0.011", 10: "0.013", 12: "0.023"}


@criterion(1, "transmission proportions reproduce the published table")
def test_transmission_arithmetic():
    start = time.perf_counter()
    assert transmission_from_counts(SONS, CLEANED).rounded(3) == PUBLISHED_SHARES
    # the same counts arriving as individual links
    links = []
    for i, parent in enumerate((1, 4, 8)):
        for j, child in enumerate((1, 4, 8, 10, 12)):
            for k in range(SONS[i][j]):
                links.append(InterEditionLink(RecordId(parent, k + 1), RecordId(child, 100_000 * i + k + 1),
                                              (SUCCESSION,)))
    table = transmission_table(links, CLEANED)
    assert table.rounded(3) == PUBLISHED_SHARES
    assert table.proportion(1, 4) == Fraction(155, 13759)
    assert time.perf_counter() - start < 1.0


@criterion(2, "attrition rates reproduce the published table")
def test_attrition_arithmetic():
    start = time.perf_counter()
    reports = [AttritionReport(EditionId(ed), RAW[ed], CLEANED[ed]) for ed in RAW]
    rows = attrition_csv(reports).splitlines()[1:]
    assert {int(r.split(",")[0]): r.split(",")[3] for r in rows} == PUBLISHED_ATTRITION
    assert time.perf_counter() - start < 1.0


@criterion(3, "linkage oracle: exact precision and recall, planted namesake flagged")
def test_linkage_oracle():
    start = time.perf_counter()
    params = SynthParams(seed=2024, families=600, collision_rate=0.0, son_relisting_probability=0.6)
    world = generate(params)
    links = link_editions(world_records(world))
    score = score_linkage(links, world.truth, world.world_id)
    assert score.true_total > 500
    assert score.precision == 1 and score.recall == 1 and score.ambiguous_count == 0

    planted = generate(params)
    father, son = sorted(planted.truth.true_reappearances())[0]
    planted.plant_namesake(son)
    links = link_editions(world_records(planted))
    score = score_linkage(links, planted.truth, planted.world_id)
    assert score.ambiguous_count >= 1
    assert score.precision == 1
    assert any(l.ambiguous and l.pair == (father, son) for l in links)
    assert time.perf_counter() - start < 10.0


def sweep_params(seed):
    return SynthParams(
        seed=seed, families=25, extra_persons=15, illegitimate_probability=0.1, collision_rate=0.05,
        succession_probability=0.2, foreign_probability=0.1,
        noise={"name": 0.02, "birth_year": 0.02, "child_birth_year": 0.05, "residence": 0.05},
    )


@lru_cache(maxsize=None)
def sweep_world(seed):
    return generate(sweep_params(seed))


SEEDS = range(200)


@criterion(4, "tripartite invariant holds for every graph over 200 seeds")
def test_tripartite_invariant():
    checked = 0
    for seed in SEEDS:
        for ed, text in sweep_world(seed).editions.items():
            graph = build_graph(read_edition_text(text, ed).records)
            assert graph.violations() == []
            assert oracles.tripartite_ok(graph)
            checked += 1
    assert checked == 5 * len(SEEDS)


@criterion(5, "analytics equal exhaustive-enumeration oracles on small worlds")
def test_brute_force_equivalence():
    start = time.perf_counter()
    for seed in range(6):
        world = generate(SynthParams(seed=100 + seed, families=80, extra_persons=60, foreign_probability=0.1,
                                     illegitimate_probability=0.1, collision_rate=0.05,
                                     noise={"child_birth_year": 0.05, "birthplace": 0.05}))
        assert len(world.truth.persons) <= 1000
        records = world_records(world)
        pop_rows = fake_population(seed)
        pop = {(y, s): n for y, s, n in pop_rows}

        reps = representation_rate(edition_totals(records), PopulationTable(pop_rows))
        assert {ed: (r.count, r.share_total, r.share_male) for ed, r in reps.items()} == \
            oracles.representation(records, pop)
        assert {ed: d.counts for ed, d in prefecture_distribution(records).items()} == \
            oracles.prefecture_counts(records)
        expected = oracles.mobility(records)
        for ed, m in mobility_matrices(records).items():
            got = {(o, d): (int(m.counts[i, j]), m.share(o, d))
                   for i, o in enumerate(oracles.CODES) for j, d in enumerate(oracles.CODES) if m.counts[i, j]}
            assert got == expected[ed]
        for name in SELECTORS:
            shares = covariate_shares(records, name)
            assert {ed: {c: v for c, v in cats.items() if v} for ed, cats in shares.items()} == \
                oracles.nonzero_shares(records, name)
        ages = age_distributions(records)
        assert ages.first_listing == oracles.first_listing(records)
        assert ages.first_birth == oracles.first_birth(records)
        hist = family_composition_histograms(records)
        panels = oracles.birth_order_panels(records)
        for panel in HISTOGRAM_PANELS:
            assert dict(hist.panel(panel)) == panels[panel]
    assert time.perf_counter() - start < 30.0


@criterion(6, "mobility rows with mass sum to one within 1e-9 over the seed sweep")
def test_mobility_normalization():
    rows = 0
    for seed in SEEDS:
        for m in mobility_matrices(world_records(sweep_world(seed))).values():
            shares = m.row_shares
            n = len(oracles.CODES)
            mass = m.counts[:n, :n].sum(axis=1) > 0
            assert np.all(np.abs(shares[:n][mass].sum(axis=1) - 1.0) <= 1e-9)
            assert np.all(shares[:n][~mass] == 0)
            rows += int(mass.sum())
    assert rows > 0


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@criterion(7, "two runs of `all` give byte-identical trees, --jobs 1 vs 8")
def test_determinism(tmp_path):
    world = tmp_path / "world"
    assert main(["synth", "--out", str(world), "--seed", "77", "--set", "families=300"]) == 0
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'editions = "{world / "editions"}"\ntruth = "{world / "truth"}"\n', encoding="utf-8")
    trees = []
    for name, jobs in (("a", "1"), ("b", "8"), ("c", "8")):
        assert main(["all", "--config", str(cfg), "--out", str(tmp_path / name), "--jobs", jobs]) == 0
        trees.append(_tree(tmp_path / name))
    assert trees[0] and trees[0] == trees[1] == trees[2]


@criterion(8, "a son bearing his father's full name gives one succession link")
def test_succession_matching():
    father = rec(4, 10, "三井", "八郎右衛門", 1848, children=[("高棟", 1857, "s"), ("高弘", 1860, "s")])
    heir = rec(10, 20, "三井", "八郎右衛門", 1857)
    unrelated = rec(10, 21, "三井", "太郎", 1857)
    links = link_editions([father, heir, unrelated])
    assert len(links) == 1
    (link,) = links
    assert link.pair == (RecordId(4, 10), RecordId(10, 20))
    assert link.basis == (SUCCESSION,) and not link.ambiguous
