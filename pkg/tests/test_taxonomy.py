"""Tag mapping schemes, built-in tables, and the published-table goldens."""

import numpy as np
import pytest

from moodbridge.errors import DataError
from moodbridge.features import (
    MUSIC,
    TEXT,
    VadLexicon,
    Vocabulary,
    WordEmbeddingTable,
)
from moodbridge.taxonomy import (
    ALM,
    AUDIOSET_MOOD_TAGS,
    ISEAR,
    MANUAL,
    VA,
    VA_GOLDEN,
    W2V,
    TaxonomyMap,
    manual_map,
    map_va,
    map_w2v,
    read_map_tsv,
    relevant_set,
    va_diff_report,
    w2v_golden_map,
    write_map_tsv,
)


class TestManualTables:
    def test_alm_rows(self):
        m = manual_map(ALM)
        assert m.map["happy"] == ("exciting", "funny", "happy")
        assert m.map["sad"] == ("sad",)
        assert m.map["anger"] == ("angry",)
        assert m.map["fearful"] == ("scary",)
        assert m.map["surprised"] == ("exciting",)

    def test_isear_rows(self):
        m = manual_map(ISEAR)
        assert m.map["guilt"] == ("angry", "sad")
        assert m.map["disgust"] == ("angry", "scary")
        assert m.map["fear"] == ("scary",)
        assert m.map["joy"] == ("exciting", "funny", "happy")
        assert m.map["shame"] == ("angry", "sad")

    def test_all_targets_in_music_vocab(self):
        for dataset in (ALM, ISEAR):
            for targets in manual_map(dataset).map.values():
                assert set(targets) <= set(AUDIOSET_MOOD_TAGS)

    def test_unknown_dataset(self):
        with pytest.raises(DataError):
            manual_map("SEMEVAL")

    def test_w2v_golden_rows(self):
        alm = w2v_golden_map(ALM)
        assert alm.map["fearful"] == ("scary",)
        isear = w2v_golden_map(ISEAR)
        assert isear.map["joy"] == ("tender",)
        assert isear.map["sadness"] == ("tender",)


class TestRelevantSet:
    def test_va_maps_are_singletons(self):
        lex = VadLexicon({"a": (0.1, 0.1), "b": (0.9, 0.9), "x": (0.2, 0.2)})
        m = map_va(Vocabulary(TEXT, ("x",)), Vocabulary(MUSIC, ("a", "b")), lex)
        assert relevant_set(m, "x") == {"a"}

    def test_isear_disgust(self):
        assert relevant_set(manual_map(ISEAR), "disgust") == {"angry", "scary"}

    def test_composition_with_map_va(self):
        lex = VadLexicon({"t": (0.5, 0.5), "m1": (0.4, 0.5), "m2": (0.9, 0.1)})
        m = map_va(Vocabulary(TEXT, ("t",)), Vocabulary(MUSIC, ("m1", "m2")), lex)
        assert relevant_set(m, "t") == set(m.map["t"])

    def test_alias_lookup(self):
        # a corpus tagged "angry" still resolves against the "anger" key
        assert relevant_set(manual_map(ALM), "angry") == {"angry"}

    def test_unknown_tag(self):
        with pytest.raises(DataError):
            relevant_set(manual_map(ALM), "bewildered")


class TestMapVa:
    def test_singleton_music_vocab(self):
        lex = VadLexicon({t: (0.1 * i, 0.2) for i, t in
                          enumerate(("happy", "x", "y", "z"))})
        m = map_va(Vocabulary(TEXT, ("x", "y", "z")),
                   Vocabulary(MUSIC, ("happy",)), lex)
        assert all(v == ("happy",) for v in m.map.values())

    def test_shared_tag_maps_to_itself(self):
        lex = VadLexicon({"happy": (0.9, 0.7), "sad": (0.1, 0.2)})
        m = map_va(Vocabulary(TEXT, ("happy",)),
                   Vocabulary(MUSIC, ("happy", "sad")), lex)
        assert m.map["happy"] == ("happy",)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(4)
        text_tags = tuple(f"t{i}" for i in range(6))
        music_tags = tuple(f"m{i}" for i in range(5))
        lex = VadLexicon()
        coords = {}
        for tag in text_tags + music_tags:
            v, a = rng.uniform(0, 1, size=2)
            coords[tag] = (v, a)
            lex.add(tag, v, a)
        m = map_va(Vocabulary(TEXT, text_tags), Vocabulary(MUSIC, music_tags), lex)
        for t in text_tags:
            brute = min(music_tags, key=lambda mt: (
                (coords[t][0] - coords[mt][0]) ** 2
                + (coords[t][1] - coords[mt][1]) ** 2))
            assert m.map[t] == (brute,)

    def test_tie_broken_by_music_vocab_order(self):
        lex = VadLexicon({"t": (0.5, 0.5), "left": (0.4, 0.5), "right": (0.6, 0.5)})
        first = map_va(Vocabulary(TEXT, ("t",)),
                       Vocabulary(MUSIC, ("left", "right")), lex)
        flipped = map_va(Vocabulary(TEXT, ("t",)),
                         Vocabulary(MUSIC, ("right", "left")), lex)
        assert first.map["t"] == ("left",)
        assert flipped.map["t"] == ("right",)

    def test_missing_tags_listed(self):
        lex = VadLexicon({"happy": (0.9, 0.7)})
        with pytest.raises(DataError, match="ghost"):
            map_va(Vocabulary(TEXT, ("ghost",)), Vocabulary(MUSIC, ("happy",)), lex)

    def test_totality(self):
        lex = VadLexicon({t: (0.05 * i, 0.5) for i, t in
                          enumerate(("a", "b", "c", "m"))})
        m = map_va(Vocabulary(TEXT, ("a", "b", "c")), Vocabulary(MUSIC, ("m",)), lex)
        assert set(m.map) == {"a", "b", "c"}


class TestMapW2v:
    def toy_table(self):
        table = WordEmbeddingTable(3)
        table.add("fear", [1.0, 0.1, 0.0])
        table.add("scary", [0.9, 0.2, 0.0])    # closest to fear by construction
        table.add("happy", [0.0, 1.0, 0.3])
        return table

    def test_fear_maps_to_scary(self):
        m = map_w2v(Vocabulary(TEXT, ("fear",)),
                    Vocabulary(MUSIC, ("scary", "happy")), self.toy_table())
        assert m.map["fear"] == ("scary",)

    def test_identical_vectors_map_together(self):
        table = WordEmbeddingTable(2)
        table.add("joy", [0.6, 0.8])
        table.add("happy", [0.6, 0.8])
        table.add("sad", [-1.0, 0.0])
        m = map_w2v(Vocabulary(TEXT, ("joy",)),
                    Vocabulary(MUSIC, ("sad", "happy")), table)
        assert m.map["joy"] == ("happy",)

    def test_scale_invariance(self):
        base = self.toy_table()
        scaled = WordEmbeddingTable(3)
        scaled.add("fear", np.asarray(base.vector("fear")) * 7.0)
        scaled.add("scary", np.asarray(base.vector("scary")) * 0.01)
        scaled.add("happy", np.asarray(base.vector("happy")) * 130.0)
        a = map_w2v(Vocabulary(TEXT, ("fear",)),
                    Vocabulary(MUSIC, ("scary", "happy")), base)
        b = map_w2v(Vocabulary(TEXT, ("fear",)),
                    Vocabulary(MUSIC, ("scary", "happy")), scaled)
        assert a.map == b.map

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(12)
        text_tags = tuple(f"t{i}" for i in range(5))
        music_tags = tuple(f"m{i}" for i in range(6))
        table = WordEmbeddingTable(4)
        vecs = {}
        for tag in text_tags + music_tags:
            v = rng.standard_normal(4)
            vecs[tag] = v
            table.add(tag, v)
        m = map_w2v(Vocabulary(TEXT, text_tags), Vocabulary(MUSIC, music_tags),
                    table)

        def cos_d(u, v):
            return 1 - np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))

        for t in text_tags:
            brute = min(music_tags, key=lambda mt: cos_d(vecs[t], vecs[mt]))
            assert m.map[t] == (brute,)

    def test_missing_token_listed(self):
        with pytest.raises(DataError, match="unknown_tag"):
            map_w2v(Vocabulary(TEXT, ("unknown_tag",)),
                    Vocabulary(MUSIC, ("scary",)), self.toy_table())


class TestSchemeInvariants:
    def test_va_multi_target_rejected(self):
        with pytest.raises(DataError):
            TaxonomyMap(VA, {"t": ("a", "b")}, provenance="test")

    def test_empty_target_rejected(self):
        with pytest.raises(DataError):
            TaxonomyMap(MANUAL, {"t": ()}, provenance="test")


class TestVaDiffReport:
    def test_agreeing_lexicon_reports_nothing(self):
        # place every tag exactly where the golden mapping wants it
        lex = VadLexicon()
        anchor = {
            "angry": (0.1, 0.9), "happy": (0.9, 0.7), "sad": (0.1, 0.2),
            "exciting": (0.85, 0.95), "funny": (0.8, 0.5), "tender": (0.6, 0.2),
            "scary": (0.15, 0.8),
        }
        for tag, (v, a) in anchor.items():
            lex.add(tag, v, a)
        for dataset, golden in VA_GOLDEN.items():
            for text_tag, target in golden.items():
                if text_tag not in lex.entries:
                    v, a = anchor[target]
                    lex.add(text_tag, v, a)
        assert va_diff_report(lex) == []

    def test_disagreeing_lexicon_reports_diffs(self):
        lex = VadLexicon()
        tags = set(AUDIOSET_MOOD_TAGS)
        for golden in VA_GOLDEN.values():
            tags |= set(golden)
        # everything piled on one point except "funny": all text tags then
        # resolve to the first music tag, which contradicts several goldens
        for i, tag in enumerate(sorted(tags)):
            lex.add(tag, 0.5, 0.5)
        diffs = va_diff_report(lex)
        assert diffs    # order-based resolution cannot reproduce the table


class TestMapTsv:
    def test_round_trip(self, tmp_path):
        m = manual_map(ISEAR)
        path = tmp_path / "map.tsv"
        write_map_tsv(m, path)
        back = read_map_tsv(path)
        assert back.scheme == MANUAL
        assert back.map == m.map

    def test_mixed_schemes_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("VA\ta\tx\nW2V\tb\ty\n")
        with pytest.raises(DataError, match="mixed"):
            read_map_tsv(path)
