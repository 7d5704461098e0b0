"""Postcode gazetteer: hierarchical address tree and weighted name matching.

Entries are (province, city, county, street, postcode) rows. Matching
scores a set of query address nouns against each candidate entry: a level
counts as matched when its name contains, or is contained by, any query
noun, and the matching degree is the weight sum of matched levels over the
weight sum of levels present in the entry. Level weights are 8/4/2/1 from
province down to street, so a match at any level outweighs all matches
below it combined. Degrees are kept as exact fractions internally so that
ties are detected exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .records import POSTCODE_RE, EnterpriseRecord, RowDiagnostic
from .segmenter import Lexicon, address_nouns, segment

LEVELS = ("province", "city", "county", "street")
LEVEL_WEIGHTS = {"province": 8, "city": 4, "county": 2, "street": 1}


@dataclass(frozen=True, slots=True)
class PostcodeEntry:
    province: str
    city: str
    county: str
    street: str
    postcode: str

    def levels(self) -> tuple[tuple[str, str], ...]:
        """(level, name) pairs for the non-empty levels."""
        return tuple(
            (level, name)
            for level, name in zip(LEVELS, (self.province, self.city, self.county, self.street))
            if name
        )

    def path(self) -> tuple[str, str, str, str]:
        return (self.province, self.city, self.county, self.street)

    def check(self) -> str | None:
        """Reason this entry is invalid, or None."""
        if not POSTCODE_RE.match(self.postcode):
            return f"invalid postcode {self.postcode!r}"
        if not self.province:
            return "empty province"
        return None


@dataclass(frozen=True)
class MatchResult:
    entry: PostcodeEntry
    matched_levels: tuple[str, ...]
    matched_weight: int
    present_weight: int

    @property
    def degree(self) -> float:
        return self.matched_weight / self.present_weight

    @property
    def degree_exact(self) -> Fraction:
        return Fraction(self.matched_weight, self.present_weight)


class AddressTree:
    """Immutable four-level index over validated, de-duplicated entries."""

    def __init__(self, entries: Sequence[PostcodeEntry]):
        self.entries: tuple[PostcodeEntry, ...] = tuple(
            sorted(set(entries), key=lambda e: (e.path(), e.postcode))
        )
        self.root: dict = {}
        self._by_postcode: dict[str, list[int]] = {}
        self._by_name: dict[str, set[int]] = {}
        for idx, entry in enumerate(self.entries):
            node = self.root
            for _, name in entry.levels():
                node = node.setdefault(name, {})
            node.setdefault("__postcodes__", set()).add(entry.postcode)
            self._by_postcode.setdefault(entry.postcode, []).append(idx)
            for _, name in entry.levels():
                self._by_name.setdefault(name, set()).add(idx)
        self._names = tuple(self._by_name)
        self._noun_cache: dict[str, frozenset[int]] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def postcodes(self) -> set[str]:
        return set(self._by_postcode)

    def entries_for_postcode(self, postcode: str) -> tuple[PostcodeEntry, ...]:
        return tuple(self.entries[i] for i in self._by_postcode.get(postcode, ()))

    def _candidates_for_noun(self, noun: str) -> frozenset[int]:
        cached = self._noun_cache.get(noun)
        if cached is not None:
            return cached
        hits: set[int] = set(self._by_name.get(noun, ()))
        for name in self._names:
            if name != noun and (noun in name or name in noun):
                hits |= self._by_name[name]
        result = frozenset(hits)
        self._noun_cache[noun] = result
        return result


def build(entries: Iterable[PostcodeEntry]) -> AddressTree:
    """Build the tree; invalid entries are rejected (fatal here, because
    callers are expected to have run read_gazetteer, which screens them)."""
    checked = []
    for entry in entries:
        reason = entry.check()
        if reason:
            raise ValueError(f"invalid gazetteer entry {entry}: {reason}")
        checked.append(entry)
    return AddressTree(checked)


def match(nouns: Sequence[str], tree: AddressTree) -> list[MatchResult]:
    """Candidates scored by weighted level overlap, best first.

    Ordering is degree descending, then postcode ascending, then path."""
    if not nouns:
        return []
    candidate_ids: set[int] = set()
    for noun in nouns:
        if noun:
            candidate_ids |= tree._candidates_for_noun(noun)
    results = []
    for idx in candidate_ids:
        entry = tree.entries[idx]
        matched = []
        matched_weight = 0
        present_weight = 0
        for level, name in entry.levels():
            present_weight += LEVEL_WEIGHTS[level]
            if any(q in name or name in q for q in nouns if q):
                matched.append(level)
                matched_weight += LEVEL_WEIGHTS[level]
        results.append(MatchResult(entry, tuple(matched), matched_weight, present_weight))
    results.sort(key=lambda r: (-r.degree_exact, r.entry.postcode, r.entry.path()))
    return results


@dataclass(frozen=True)
class CoverageReport:
    evaluated: int
    match_rate: float  # best match's postcode equals the record's
    presence_rate: float  # record postcode exists anywhere in the tree


def validate(
    tree: AddressTree, records: Sequence[EnterpriseRecord], lexicon: Lexicon
) -> CoverageReport:
    """Check the tree against records that carry both AD text and postcode."""
    evaluated = matched = present = 0
    known = tree.postcodes()
    for rec in records:
        if not rec.address or not rec.postcode:
            continue
        evaluated += 1
        if rec.postcode in known:
            present += 1
        results = match(address_nouns(segment(rec.address, lexicon)), tree)
        if results and results[0].entry.postcode == rec.postcode:
            matched += 1
    if evaluated == 0:
        return CoverageReport(0, 0.0, 0.0)
    return CoverageReport(evaluated, matched / evaluated, present / evaluated)


def read_gazetteer(path: str | Path) -> tuple[list[PostcodeEntry], list[RowDiagnostic]]:
    """Parse a gazetteer TSV; malformed rows become diagnostics."""
    entries: list[PostcodeEntry] = []
    diagnostics: list[RowDiagnostic] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").rstrip("\r").split("\t")
        if header != list(LEVELS) + ["postcode"]:
            raise ValueError(f"{path}: expected columns {LEVELS + ('postcode',)}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != 5:
                diagnostics.append(RowDiagnostic(line_no, f"expected 5 cells, got {len(cells)}"))
                continue
            entry = PostcodeEntry(*cells)
            reason = entry.check()
            if reason:
                diagnostics.append(RowDiagnostic(line_no, reason))
                continue
            entries.append(entry)
    return entries, diagnostics


def write_gazetteer(entries: Iterable[PostcodeEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(LEVELS + ("postcode",)) + "\n")
        for e in entries:
            fh.write(f"{e.province}\t{e.city}\t{e.county}\t{e.street}\t{e.postcode}\n")
