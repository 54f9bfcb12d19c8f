# Rebuild a sons-of-elites proportion table from raw counts.
#
# Rows are the father's edition, columns the edition where the son shows
# up, and each cell is divided by the cleaned size of the son's edition.
import numpy as np

from pirlink.analytics import transmission_from_counts
from pirlink.core import EditionId
from pirlink.ingest import AttritionReport, attrition_csv

counts = np.array([
    [15, 155, 285, 313, 464],
    [0, 47, 798, 821, 1942],
    [0, 0, 104, 366, 1505],
])
cleaned = {1: 2892, 4: 13759, 8: 24931, 10: 25846, 12: 54497}

table = transmission_from_counts(counts, cleaned)
print("father edition -> share of each later edition that is an elite's son")
for parent, row in zip((1, 4, 8), table.rounded(3)):
    print(f"  {parent:>2}: " + "  ".join(row))

# Exact fractions sit underneath the rounded strings.
print("1 -> 4 exactly:", table.proportion(1, 4))

# Rounding is half-up on the exact value, so a float that lands just
# below .0005 does not flip the third decimal.
raw = {1: 3353, 4: 14060, 8: 25221, 10: 26185, 12: 55781}
reports = [AttritionReport(EditionId(ed), raw[ed], cleaned[ed]) for ed in raw]
print()
print(attrition_csv(reports))
