# Generate a directory world with known fathers and sons, run the linker,
# and score it against the truth.
from pirlink.analytics import edition_totals, transmission_table
from pirlink.ingest import clean, read_edition_text
from pirlink.linker import link_editions
from pirlink.normalize import Classifier, classify_records
from pirlink.synth import SynthParams, generate, score_linkage


def records_of(world):
    clf = Classifier.default()
    out = []
    for ed, text in world.editions.items():
        cleaned, report = clean(read_edition_text(text, ed))
        print(f"  edition {ed:>2}: {report.raw_count} entries, {report.cleaned_count} kept")
        out += classify_records(cleaned, clf)
    return out


params = SynthParams(seed=7, families=500, son_relisting_probability=0.5, succession_probability=0.2)
world = generate(params)
print("world", world.world_id)
records = records_of(world)

links = link_editions(records)
score = score_linkage(links, world.truth)
print(f"{score.emitted} links, precision {score.precision}, recall {score.recall}")

by_basis = {}
for link in links:
    for b in link.basis:
        by_basis[b] = by_basis.get(b, 0) + 1
print("links per basis:", dict(sorted(by_basis.items())))

# Plant an unrelated man with the same name and birth year as a known son.
# The linker can no longer tell them apart and flags both links instead of
# guessing.
father, son = sorted(world.truth.true_reappearances())[0]
world.plant_namesake(son)
records = records_of(world)
links = link_editions(records)
score = score_linkage(links, world.truth)
print(f"after planting: {score.ambiguous_count} ambiguous links, precision {score.precision}")

table = transmission_table(links, edition_totals(records))
for parent, row in zip((1, 4, 8), table.rounded(3)):
    print(f"  {parent:>2}: " + "  ".join(row))
