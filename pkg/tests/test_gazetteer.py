from __future__ import annotations

import random
from fractions import Fraction

import pytest

from regimpute.gazetteer import (
    AddressTree,
    PostcodeEntry,
    build,
    match,
    read_gazetteer,
    validate,
    write_gazetteer,
)
from regimpute.records import EnterpriseRecord
from regimpute.segmenter import Lexicon

WUHAN = PostcodeEntry("湖北省", "武汉市", "江岸区", "南京路", "430014")
WUCHANG = PostcodeEntry("湖北省", "武汉市", "武昌区", "中山路", "430060")
GUANGZHOU = PostcodeEntry("广东省", "广州市", "越秀区", "南京路", "510030")


@pytest.fixture()
def demo_tree(demo_gazetteer_path):
    entries, diagnostics = read_gazetteer(demo_gazetteer_path)
    assert not diagnostics
    return build(entries)


def test_build_single_leaf():
    tree = build([WUHAN])
    assert len(tree) == 1
    assert tree.postcodes() == {"430014"}
    node = tree.root["湖北省"]["武汉市"]["江岸区"]["南京路"]
    assert node["__postcodes__"] == {"430014"}


def test_build_shares_internal_nodes():
    tree = build([WUHAN, WUCHANG])
    assert len(tree.root) == 1  # one province
    assert len(tree.root["湖北省"]) == 1  # one city
    assert len(tree.root["湖北省"]["武汉市"]) == 2  # two counties
    assert len(tree) == 2


def test_build_collapses_duplicates():
    tree = build([WUHAN, WUHAN, WUHAN])
    assert len(tree) == 1


def test_build_idempotent_under_shuffle():
    entries = [WUHAN, WUCHANG, GUANGZHOU]
    shuffled = entries[:]
    random.Random(4).shuffle(shuffled)
    assert build(entries).entries == build(shuffled).entries


def test_build_rejects_invalid_entries():
    with pytest.raises(ValueError, match="postcode"):
        build([PostcodeEntry("a", "b", "c", "d", "12345")])
    with pytest.raises(ValueError, match="province"):
        build([PostcodeEntry("", "b", "c", "d", "123456")])


def test_empty_tree_matches_nothing():
    tree = build([])
    assert match(["武汉市"], tree) == []


def test_full_noun_set_scores_one(demo_tree):
    results = match(["湖北省", "武汉市", "江岸区", "南京路"], demo_tree)
    assert results[0].entry == WUHAN
    assert results[0].degree == 1.0
    assert set(results[0].matched_levels) == {"province", "city", "county", "street"}


def test_city_only_noun_scores_4_of_15(demo_tree):
    results = match(["武汉市"], demo_tree)
    tops = [r for r in results if r.entry.city == "武汉市"]
    assert len(tops) == 2
    for r in tops:
        assert r.degree_exact == Fraction(4, 15)
        assert r.matched_levels == ("city",)


def test_shared_street_name_ties_across_cities(demo_tree):
    results = match(["南京路"], demo_tree)
    street_hits = [r for r in results if "street" in r.matched_levels]
    assert {r.entry.postcode for r in street_hits} == {"430014", "510030"}
    degrees = {r.degree_exact for r in street_hits}
    assert degrees == {Fraction(1, 15)}
    # tie broken by postcode ascending in the sort order
    assert [r.entry.postcode for r in results[:2]] == ["430014", "510030"]


def test_containment_matching_both_directions(demo_tree):
    # noun "武汉" is contained in level name "武汉市"
    results = match(["武汉"], demo_tree)
    assert any(r.entry.city == "武汉市" and "city" in r.matched_levels for r in results)
    # noun longer than the name also matches
    results = match(["武汉市江岸"], demo_tree)
    assert any(r.entry.city == "武汉市" for r in results)


def test_empty_noun_list(demo_tree):
    assert match([], demo_tree) == []


def test_adding_a_correct_noun_never_lowers_top_degree(demo_tree):
    nouns = ["南京路"]
    best = match(nouns, demo_tree)[0].degree_exact
    for extra in ("江岸区", "武汉市", "湖北省"):
        nouns = nouns + [extra]
        new_best = match(nouns, demo_tree)[0].degree_exact
        assert new_best >= best
        best = new_best


def test_degree_bounds(small_world, small_tree):
    rng = random.Random(8)
    names = [e.street for e in small_world.gazetteer] + [e.city for e in small_world.gazetteer]
    for _ in range(50):
        nouns = rng.sample(names, rng.randint(1, 3))
        for r in match(nouns, small_tree):
            assert 0 < r.degree <= 1.0


def test_exact_entry_is_unique_maximum(small_world, small_tree):
    entry = small_world.gazetteer[17]
    results = match(list(entry.path()), small_tree)
    assert results[0].entry == entry
    assert results[0].degree == 1.0
    runner_up = [r for r in results if r.entry != entry]
    assert all(r.degree_exact < 1 for r in runner_up)


def test_partial_entry_weights():
    coarse = PostcodeEntry("湖北省", "武汉市", "", "", "430000")
    tree = build([coarse])
    results = match(["武汉市"], tree)
    assert results[0].degree_exact == Fraction(4, 12)  # city / (province+city)
    results = match(["湖北省", "武汉市"], tree)
    assert results[0].degree == 1.0


def test_validate_self_consistency(demo_tree, demo_lexicon):
    records = [
        EnterpriseRecord(id="1", address="湖北省武汉市江岸区南京路16号", postcode="430014"),
        EnterpriseRecord(id="2", address="湖北省武汉市武昌区中山路8号", postcode="430060"),
        EnterpriseRecord(id="3", address="广东省广州市越秀区南京路2号", postcode="510030"),
    ]
    report = validate(demo_tree, records, demo_lexicon)
    assert report.evaluated == 3
    assert report.match_rate == 1.0
    assert report.presence_rate == 1.0


def test_validate_presence_fraction(demo_tree, demo_lexicon):
    records = [
        EnterpriseRecord(id="1", address="湖北省武汉市江岸区南京路16号", postcode="430014"),
        EnterpriseRecord(id="2", address="湖北省武汉市武昌区中山路8号", postcode="999999"),
    ]
    report = validate(demo_tree, records, demo_lexicon)
    assert report.evaluated == 2
    assert report.presence_rate == pytest.approx(0.5)


def test_validate_skips_incomplete_records(demo_tree, demo_lexicon):
    records = [EnterpriseRecord(id="1", address="somewhere"), EnterpriseRecord(id="2", postcode="430014")]
    report = validate(demo_tree, records, demo_lexicon)
    assert report.evaluated == 0


def test_gazetteer_tsv_roundtrip_and_diagnostics(tmp_path):
    path = tmp_path / "gaz.tsv"
    write_gazetteer([WUHAN, WUCHANG], path)
    entries, diagnostics = read_gazetteer(path)
    assert entries == [WUHAN, WUCHANG]
    assert not diagnostics

    bad = tmp_path / "bad.tsv"
    bad.write_text(
        "province\tcity\tcounty\tstreet\tpostcode\n"
        "湖北省\t武汉市\t江岸区\t南京路\t430014\n"
        "湖北省\t武汉市\t江岸区\t南京路\tABC123\n"
        "短行\n",
        encoding="utf-8",
    )
    entries, diagnostics = read_gazetteer(bad)
    assert len(entries) == 1
    assert len(diagnostics) == 2


def test_read_gazetteer_header_check(tmp_path):
    path = tmp_path / "x.tsv"
    path.write_text("a\tb\n", encoding="utf-8")
    with pytest.raises(ValueError, match="columns"):
        read_gazetteer(path)
