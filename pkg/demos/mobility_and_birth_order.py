# Where elites were born versus where they live, and how many sons,
# daughters and adopted heirs a listed father reports.
import numpy as np

from pirlink.analytics import covariate_shares, mobility_matrices
from pirlink.core import DOMESTIC_PREFECTURES, PREFECTURE_NAMES
from pirlink.family import family_composition_histograms
from pirlink.ingest import clean, read_edition_text
from pirlink.normalize import Classifier, classify_records
from pirlink.synth import SynthParams, generate

world = generate(SynthParams(seed=3, families=800, archaic_rate=0.3))
clf = Classifier.default()
records = []
for ed, text in world.editions.items():
    records += classify_records(clean(read_edition_text(text, ed))[0], clf)

matrices = mobility_matrices(records)
m = matrices[12]
n = len(DOMESTIC_PREFECTURES)
shares = m.row_shares[:n, :n]
stayers = np.diag(shares)
has_mass = m.counts[:n, :n].sum(axis=1) > 0
print("edition 12: share living in their birth prefecture")
print(f"  mean over {has_mass.sum()} origins: {stayers[has_mass].mean():.3f}")

inflow = m.counts[:n, :n].sum(axis=0) - np.diag(m.counts[:n, :n])
top = np.argsort(-inflow, kind="stable")[:3]
for i in top:
    code, kanji, romaji = PREFECTURE_NAMES[i]
    print(f"  {romaji:<10} takes in {inflow[i]} elites born elsewhere")

print()
for group, share in covariate_shares(records, "social_group")[12].items():
    print(f"  {group:<9} {float(share):.3f}")

# Birth order: the k-th son, the k-th daughter, the k-th adopted son.
hist = family_composition_histograms(records)
print()
print("edition 1, children by kind and order among their own kind")
for kind in ("biological_son", "biological_daughter", "adopted_son"):
    row = [hist.per_type[1, kind, k] for k in range(1, 6)]
    print(f"  {kind:<20}", row)
