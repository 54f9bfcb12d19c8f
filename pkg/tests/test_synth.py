from fractions import Fraction

import pytest

from conftest import world_records
from pirlink.core import RecordId
from pirlink.ingest import clean, read_edition_text
from pirlink.linker import SUCCESSION, InterEditionLink, link_editions
from pirlink.synth import GroundTruth, SynthParams, generate, score_csv, score_linkage


def test_same_params_same_world():
    a = generate(SynthParams(seed=4, families=50))
    b = generate(SynthParams(seed=4, families=50))
    assert a.editions == b.editions and a.truth.tables() == b.truth.tables()
    c = generate(SynthParams(seed=5, families=50))
    assert c.world_id != a.world_id and c.editions != a.editions


@pytest.mark.parametrize("bad", [dict(collision_rate=1.5), dict(noise={"bogus": 0.1}), dict(noise={"name": -1}),
                                 dict(families=-1), dict(children_per_family=()), dict(surname_pool_size=0)])
def test_param_validation(bad):
    with pytest.raises(ValueError):
        SynthParams(**bad)


def test_from_mapping_accepts_lists():
    p = SynthParams.from_mapping({"seed": 1, "children_per_family": [1, 1]})
    assert p.children_per_family == (1.0, 1.0)


def test_write_and_read_truth(tmp_path, small_world):
    paths = small_world.write(tmp_path)
    assert sorted(paths) == [1, 4, 8, 10, 12]
    truth = GroundTruth.read(tmp_path / "truth")
    assert truth.world_id == small_world.world_id
    assert truth.records == small_world.truth.records
    assert truth.true_reappearances() == small_world.truth.true_reappearances()


def test_headers_carry_world_id(small_world):
    parsed = read_edition_text(small_world.edition_text(4), 4)
    assert parsed.header.source == small_world.world_id and parsed.line_errors == []


def test_true_pairs_point_forward(small_world):
    pairs = small_world.truth.true_reappearances()
    assert pairs
    for father, son in pairs:
        assert father.edition in (1, 4, 8) and son.edition > father.edition


def test_noise_produces_attrition():
    world = generate(SynthParams(seed=3, families=100, noise={"birth_year": 0.2, "name": 0.1, "under_age": 0.1}))
    reports = [clean(read_edition_text(text, ed))[1] for ed, text in world.editions.items()]
    reasons = sum((r.reasons for r in reports), start=__import__("collections").Counter())
    assert reasons["missing_birth_year"] and reasons["missing_name"] and reasons["under_age"]


def test_collisions_are_detected():
    world = generate(SynthParams(seed=8, families=200, collision_rate=0.2, son_relisting_probability=1.0))
    score = score_linkage(link_editions(world_records(world)), world.truth)
    assert score.ambiguous_count > 0
    assert score.precision == 1


def test_succession_heirs_found():
    world = generate(SynthParams(seed=9, families=200, succession_probability=1.0, son_relisting_probability=1.0))
    links = link_editions(world_records(world))
    assert any(SUCCESSION in l.basis for l in links)
    score = score_linkage(links, world.truth)
    assert score.precision == 1 and score.recall == 1


def test_score_rejects_foreign_records(small_world):
    bogus = InterEditionLink(RecordId(1, 1), RecordId(12, 10**6), ("succession_match",))
    with pytest.raises(ValueError):
        score_linkage([bogus], small_world.truth)
    with pytest.raises(ValueError):
        score_linkage([], small_world.truth, world_id="synth-other")


def test_score_edge_cases(small_world):
    s = score_linkage([], small_world.truth)
    assert s.precision is None and s.recall == 0
    assert score_csv(s).splitlines()[1].startswith(",0.000000,0,0,0,")


def test_score_counts():
    world = generate(SynthParams(seed=2, families=30, son_relisting_probability=1.0))
    true = sorted(world.truth.true_reappearances())
    father = true[0][0]
    stranger = next(s for f, s in true if (father, s) not in set(true) and s.edition > father.edition)
    wrong = InterEditionLink(father, stranger, ("candidate_name_match:2",))
    links = [InterEditionLink(f, s, ("candidate_name_match:2",)) for f, s in true[:3]] + [wrong]
    s = score_linkage(links, world.truth)
    assert s.correct == 3 and s.emitted == 4 and s.precision == Fraction(3, 4)
    assert s.recall == Fraction(3, len(true))
