"""Postcode and administrative-division imputation.

Postcode imputation extracts address nouns from the data source, address
and name fields, matches them against the gazetteer tree, and takes the
unique best match. When several postcodes tie at the maximum matching
degree, the tie is broken by the appearance probability of each candidate
postcode among corpus records that carry a postcode and contain the query
nouns: P(i) = N_i / sum(N). Probabilities are exact rationals. If no
corpus evidence exists the smallest tied postcode is chosen and flagged
low-confidence.

AD imputation looks the (possibly just imputed) postcode up in the tree
and combines the resulting province/city/county prefix with the record's
street-level address; the assembled full address is "<prefix> <street
part>" with a single space between the two parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .gazetteer import LEVEL_WEIGHTS, AddressTree, PostcodeEntry, match
from .parallel import map_partitions, split
from .records import EnterpriseRecord
from .segmenter import Lexicon, address_nouns, segment

SOURCE_ORIGINAL = "original"
SOURCE_POSTCODE_LOOKUP = "postcode-lookup"
SOURCE_VSM = "vsm-match"
SOURCE_TIEBREAK = "tiebreak"


@dataclass(frozen=True)
class ImputedLocation:
    province: str
    city: str
    county: str
    street: str
    full_address: str
    source: str


@dataclass(frozen=True)
class PostcodeImputation:
    postcode: str
    source: str
    low_confidence: bool = False


def extract_query_nouns(record: EnterpriseRecord, lexicon: Lexicon) -> list[str]:
    """Address nouns from data_source, address and name, de-duplicated."""
    seen: set[str] = set()
    nouns: list[str] = []
    for text in (record.data_source, record.address, record.name):
        if not text:
            continue
        for noun in address_nouns(segment(text, lexicon)):
            if noun not in seen:
                seen.add(noun)
                nouns.append(noun)
    return nouns


class PostcodeEvidence:
    """Noun sets of postcode-bearing records, indexed by postcode."""

    def __init__(self, noun_sets: Mapping[str, list[frozenset[str]]]):
        self._sets = dict(noun_sets)

    @classmethod
    def from_records(cls, records: Sequence[EnterpriseRecord], lexicon: Lexicon) -> "PostcodeEvidence":
        sets: dict[str, list[frozenset[str]]] = {}
        for rec in records:
            if rec.postcode:
                sets.setdefault(rec.postcode, []).append(frozenset(extract_query_nouns(rec, lexicon)))
        return cls(sets)

    def count_with(self, postcode: str, query: frozenset[str]) -> int:
        """Records carrying this postcode whose nouns include the query's."""
        return sum(1 for nouns in self._sets.get(postcode, ()) if query <= nouns)


def tie_break_probabilities(counts: Sequence[int]) -> list[Fraction]:
    """Appearance probability of each candidate: N_i over the total."""
    total = sum(counts)
    if total <= 0:
        raise ValueError("tie-break requires a positive total count")
    return [Fraction(c, total) for c in counts]


def select_tied_postcode(counts: Mapping[str, int]) -> str:
    """Maximum-probability postcode; ties by postcode value, not position."""
    return min(counts, key=lambda p: (-counts[p], p))


def impute_postcode(
    record: EnterpriseRecord,
    tree: AddressTree,
    corpus: Sequence[EnterpriseRecord] | PostcodeEvidence,
    lexicon: Lexicon,
) -> PostcodeImputation | None:
    """Infer a missing postcode; None when nothing matches."""
    if record.postcode:
        raise ValueError(f"record {record.id} already has a postcode")
    nouns = extract_query_nouns(record, lexicon)
    if not nouns:
        return None
    results = match(nouns, tree)
    if not results:
        return None
    best = results[0].degree_exact
    tied_postcodes: list[str] = []
    for r in results:
        if r.degree_exact != best:
            break
        if r.entry.postcode not in tied_postcodes:
            tied_postcodes.append(r.entry.postcode)
    if len(tied_postcodes) == 1:
        return PostcodeImputation(tied_postcodes[0], SOURCE_VSM)
    evidence = (
        corpus
        if isinstance(corpus, PostcodeEvidence)
        else PostcodeEvidence.from_records(corpus, lexicon)
    )
    query = frozenset(nouns)
    counts = {p: evidence.count_with(p, query) for p in tied_postcodes}
    if sum(counts.values()) == 0:
        return PostcodeImputation(min(tied_postcodes), SOURCE_TIEBREAK, low_confidence=True)
    return PostcodeImputation(select_tied_postcode(counts), SOURCE_TIEBREAK)


def _entry_overlap(entry: PostcodeEntry, nouns: Sequence[str]) -> Fraction:
    matched = 0
    present = 0
    for level, name in entry.levels():
        present += LEVEL_WEIGHTS[level]
        if any(q in name or name in q for q in nouns if q):
            matched += LEVEL_WEIGHTS[level]
    return Fraction(matched, present) if present else Fraction(0)


def _ad_for_postcode(
    postcode: str, record: EnterpriseRecord, tree: AddressTree, lexicon: Lexicon | None
) -> ImputedLocation | None:
    entries = tree.entries_for_postcode(postcode)
    if not entries:
        return None
    if len(entries) == 1:
        chosen = entries[0]
    else:
        nouns = extract_query_nouns(record, lexicon) if lexicon is not None else []
        # Best own-noun overlap wins; entries are path-sorted, so min() on
        # (-overlap, path) lands on the lexicographically first tie.
        chosen = min(entries, key=lambda e: (-_entry_overlap(e, nouns), e.path()))
    prefix = chosen.province + chosen.city + chosen.county
    ad_names = [n for n in (chosen.province, chosen.city, chosen.county) if n]
    if record.address and all(n in record.address for n in ad_names):
        return ImputedLocation(
            chosen.province, chosen.city, chosen.county, chosen.street,
            record.address, SOURCE_ORIGINAL,
        )
    street_part = record.address if record.address else chosen.street
    return ImputedLocation(
        chosen.province, chosen.city, chosen.county, chosen.street,
        f"{prefix} {street_part}", SOURCE_POSTCODE_LOOKUP,
    )


def impute_ad(
    record: EnterpriseRecord, tree: AddressTree, lexicon: Lexicon | None = None
) -> ImputedLocation | None:
    """AD levels for a record's postcode; None when the postcode is unknown
    to the tree (caller flags the record)."""
    if not record.postcode:
        raise ValueError(f"record {record.id} has no postcode")
    return _ad_for_postcode(record.postcode, record, tree, lexicon)


@dataclass(frozen=True)
class _Plan:
    postcode: PostcodeImputation | None
    postcode_failed: bool
    location: ImputedLocation | None
    ad_failed: bool


@dataclass
class LocationReport:
    total: int = 0
    postcode_missing: int = 0
    postcode_filled: int = 0
    postcode_failed: int = 0
    low_confidence: int = 0
    postcode_sources: dict[str, int] = field(default_factory=dict)
    ad_assigned: int = 0
    ad_original: int = 0
    ad_failed: int = 0
    address_filled: int = 0

    def rows(self) -> list[tuple[str, str]]:
        out = [
            ("total", str(self.total)),
            ("postcode_missing", str(self.postcode_missing)),
            ("postcode_filled", str(self.postcode_filled)),
            ("postcode_failed", str(self.postcode_failed)),
            ("postcode_low_confidence", str(self.low_confidence)),
            ("ad_assigned", str(self.ad_assigned)),
            ("ad_original", str(self.ad_original)),
            ("ad_failed", str(self.ad_failed)),
            ("address_filled", str(self.address_filled)),
        ]
        for source in sorted(self.postcode_sources):
            out.append((f"postcode_source_{source}", str(self.postcode_sources[source])))
        return out

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("metric\tvalue\n")
            for key, value in self.rows():
                fh.write(f"{key}\t{value}\n")


def _plan_record(
    rec: EnterpriseRecord, tree: AddressTree, evidence: PostcodeEvidence, lexicon: Lexicon
) -> _Plan:
    imputation = None
    postcode_failed = False
    effective = rec.postcode
    if not effective:
        imputation = impute_postcode(rec, tree, evidence, lexicon)
        if imputation is None:
            postcode_failed = True
        else:
            effective = imputation.postcode
    location = None
    ad_failed = False
    if effective:
        location = _ad_for_postcode(effective, rec, tree, lexicon)
        ad_failed = location is None
    return _Plan(imputation, postcode_failed, location, ad_failed)


def impute_locations(
    records: Sequence[EnterpriseRecord],
    tree: AddressTree,
    lexicon: Lexicon,
    workers: int = 1,
) -> LocationReport:
    """Fill postcodes then AD info for a whole batch, in place.

    Records are planned independently (data-parallel over partitions)
    against evidence frozen at batch start, then updates are applied in
    one pass; per-record failures are counted, never raised."""
    evidence = PostcodeEvidence.from_records(records, lexicon)
    partitions = split(records, workers)
    planned = map_partitions(
        partitions, lambda part: [_plan_record(r, tree, evidence, lexicon) for r in part], workers
    )
    plans = [plan for chunk in planned for plan in chunk]

    report = LocationReport(total=len(records))
    for rec, plan in zip(records, plans):
        if plan.postcode is not None or plan.postcode_failed:
            report.postcode_missing += 1
        if plan.postcode is not None:
            rec.postcode = plan.postcode.postcode
            rec.mark_imputed("postcode")
            report.postcode_filled += 1
            report.postcode_sources[plan.postcode.source] = (
                report.postcode_sources.get(plan.postcode.source, 0) + 1
            )
            if plan.postcode.low_confidence:
                report.low_confidence += 1
        elif plan.postcode_failed:
            report.postcode_failed += 1
        if plan.ad_failed:
            report.ad_failed += 1
        elif plan.location is not None:
            loc = plan.location
            if loc.source == SOURCE_ORIGINAL:
                report.ad_original += 1
            else:
                if rec.address is None:
                    report.address_filled += 1
                    rec.mark_imputed("address")
                else:
                    rec.mark_imputed("ad")
                rec.address = loc.full_address
                report.ad_assigned += 1
    return report
