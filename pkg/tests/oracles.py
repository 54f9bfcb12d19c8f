"""Slow, exhaustive re-implementations used to check the library.

Each oracle walks every record (or every pair of records) and shares no
code with the module it checks beyond the record types.
"""
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction

YEARS = {1: 1903, 4: 1915, 8: 1928, 10: 1934, 12: 1939}
CENSUS = {1: 1920, 4: 1920, 8: 1930, 10: 1930, 12: 1930}
CODES = [f"{i:02d}" for i in range(1, 48)]


def round_decimal(fr: Fraction, places: int) -> str:
    with localcontext() as ctx:
        ctx.prec = 60
        value = Decimal(fr.numerator) / Decimal(fr.denominator)
        return str(value.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def full(r):
    return r.name.surname + r.name.given_name


# -- linker ----------------------------------------------------------------

def links(records, same_edition=False):
    """{(father, son): (bases, ambiguous)} by trying every record against every son."""
    slots = {}
    for f in records:
        if f.record_id.edition not in (1, 4, 8) or f.name is None:
            continue
        fname = full(f)
        for child in f.children:
            if child.kind.value == "biological_daughter" or not child.legitimate:
                continue
            if not child.given_name or child.birth_year is None:
                continue
            for s in records:
                if s.name is None or not s.name.surname or not s.name.given_name or s.birth_year != child.birth_year:
                    continue
                later = s.record_id.edition > f.record_id.edition
                same = same_edition and s.record_id.edition == f.record_id.edition and s.record_id != f.record_id
                if not (later or same):
                    continue
                bases = set()
                for k in (1, 2, 3):
                    if len(fname) > k and full(s) == fname[:k] + child.given_name:
                        bases.add(f"candidate_name_match:{k}")
                if full(s) == fname:
                    bases.add("succession_match")
                if bases:
                    slot = slots.setdefault((f.record_id, child.sequence_in_source, s.record_id.edition), {})
                    slot.setdefault(s.record_id, set()).update(bases)
    out = {}
    for (father, _, _), persons in slots.items():
        for son, bases in persons.items():
            old_bases, old_amb = out.get((father, son), (set(), False))
            out[father, son] = (old_bases | bases, old_amb or len(persons) > 1)
    return {k: (tuple(sorted(b)), a) for k, (b, a) in out.items()}


# -- analytics -------------------------------------------------------------

def editions_of(records):
    return sorted({r.record_id.edition for r in records})


def representation(records, pop):
    out = {}
    for ed in editions_of(records):
        n = sum(1 for r in records if r.record_id.edition == ed)
        out[ed] = (n, Fraction(n, pop[YEARS[ed], "total"]), Fraction(n, pop[YEARS[ed], "male"]))
    return out


def prefecture_counts(records):
    return {
        ed: {c: sum(1 for r in records if r.record_id.edition == ed and r.residence_prefecture == c) for c in CODES}
        for ed in editions_of(records)
    }


def mobility(records):
    """{ed: {(o, d): (count, share)}} for domestic pairs with positive count."""
    out = {}
    for ed in editions_of(records):
        cell = {}
        for o in CODES:
            row_total = sum(
                1 for r in records
                if r.record_id.edition == ed and r.birth_prefecture == o and r.residence_prefecture in CODES
            )
            for d in CODES:
                n = sum(
                    1 for r in records
                    if r.record_id.edition == ed and r.birth_prefecture == o and r.residence_prefecture == d
                )
                if n:
                    cell[o, d] = (n, Fraction(n, row_total))
        out[ed] = cell
    return out


def shares(records, getter, categories, multi):
    out = {}
    for ed, rs in ((ed, [r for r in records if r.record_id.edition == ed]) for ed in editions_of(records)):
        if multi:
            holders = [r for r in rs if getter(r)]
            out[ed] = {c: Fraction(sum(1 for r in holders if c in getter(r)), len(holders)) if holders else Fraction(0)
                       for c in categories}
        else:
            known = [r for r in rs if getter(r) is not None]
            out[ed] = {c: Fraction(sum(1 for r in known if getter(r) == c), len(known)) if known else Fraction(0)
                       for c in categories}
    return out


def first_listing(records):
    hist = {ed: {} for ed in editions_of(records)}
    for r in records:
        key = (full(r), r.birth_year)
        same_ed = [q for q in records if q.record_id.edition == r.record_id.edition and (full(q), q.birth_year) == key]
        if len(same_ed) > 1:
            continue
        all_eds = [q for q in records if (full(q), q.birth_year) == key]
        if any(len([q for q in all_eds if q.record_id.edition == e]) > 1 for e in YEARS):
            continue
        if any(q.record_id.edition < r.record_id.edition for q in all_eds):
            continue
        age = YEARS[r.record_id.edition] - r.birth_year
        hist[r.record_id.edition][age] = hist[r.record_id.edition].get(age, 0) + 1
    return hist


def first_birth(records):
    hist = {ed: {} for ed in editions_of(records) if ed in (1, 4, 8)}
    for r in records:
        if r.record_id.edition not in hist or r.birth_year is None:
            continue
        years = [c.birth_year for c in r.children if c.kind.value != "adopted_son" and c.birth_year is not None]
        if years:
            gap = min(years) - r.birth_year
            hist[r.record_id.edition][gap] = hist[r.record_id.edition].get(gap, 0) + 1
    return hist


def birth_order_panels(records, include_illegitimate=False):
    """Rank each child by counting the eligible siblings born before it."""
    panels = {"per_type": {}, "overall": {}, "biological_per_type": {}, "biological_overall": {}}

    def bump(panel, key):
        panels[panel][key] = panels[panel].get(key, 0) + 1

    for r in records:
        kids = [c for c in r.children if (include_illegitimate or c.legitimate) and c.birth_year is not None]
        for c in kids:
            def before(o):
                return (o.birth_year, o.sequence_in_source) < (c.birth_year, c.sequence_in_source)

            ed, kind = r.record_id.edition, c.kind.value
            same_kind = 1 + sum(1 for o in kids if o.kind == c.kind and before(o))
            overall = 1 + sum(1 for o in kids if before(o))
            bump("per_type", (ed, kind, same_kind))
            bump("overall", (ed, kind, overall))
            if kind != "adopted_son":
                bump("biological_per_type", (ed, kind, same_kind))
                bio = 1 + sum(1 for o in kids if o.kind.value != "adopted_son" and before(o))
                bump("biological_overall", (ed, kind, bio))
    return panels


# -- graph -----------------------------------------------------------------

def tripartite_ok(graph) -> bool:
    p, i, c = graph.parent_nodes, graph.individual_nodes, graph.child_nodes
    if p & i or p & c or i & c:
        return False
    for a, b in graph.edges:
        if not ((a in p and b in i) or (a in i and b in c)):
            return False
    return True



SELECTORS = {
    "social_group": (lambda r: r.social_group and r.social_group.value, False),
    "education": (lambda r: r.education and r.education.value, False),
    "industry": (lambda r: r.industries, True),
    "title": (lambda r: r.occupation_titles, True),
    "medal": (lambda r: None if r.medal_flag is None else ("yes" if r.medal_flag else "no"), False),
    "top_income": (lambda r: None if r.top_income_flag.value == "unavailable" else r.top_income_flag.value, False),
}


def nonzero_shares(records, selector):
    """Per-edition shares of every category somebody actually holds."""
    getter, multi = SELECTORS[selector]
    seen = set()
    for r in records:
        value = getter(r)
        if multi:
            seen |= set(value)
        elif value is not None:
            seen.add(value)
    full_table = shares(records, getter, sorted(seen), multi)
    return {ed: {c: v for c, v in cats.items() if v} for ed, cats in full_table.items()}
