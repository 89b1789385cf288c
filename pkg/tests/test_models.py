import numpy as np
import pytest

from conftest import make_corpus, make_dataset
from repgeom.embedstore import EmbeddingDataset, StaticLexicon
from repgeom.errors import ConfigurationError, IntegrityError
from repgeom.grammar import enumerate_corpus, load_grammar
from repgeom.models import (
    ModelRecipe,
    build_concat_hypothesis,
    build_model,
    build_null_hypothesis,
    build_reference,
    build_single_hypothesis,
    build_single_null_hypothesis,
    recipe_from_dict,
)

from importlib.resources import files

GRAMMAR_DIR = files("repgeom").joinpath("data/grammars")


def make_lexicon(words, dim=6, seed=0):
    rng = np.random.default_rng(seed)
    return StaticLexicon(dim=dim, source="synthetic",
                         table={w: rng.normal(size=dim).astype(np.float32)
                                for w in words})


def corpus_words(corpus):
    return sorted({w for s in corpus.sentences for w in s.tokens})


class TestBuildReference:
    def test_corpus_order_and_dim(self):
        corpus = make_corpus(5)
        rng = np.random.default_rng(0)
        vecs = [rng.normal(size=16) for _ in range(5)]
        ds = make_dataset(corpus, "verb", vecs)
        model = build_reference(corpus, ds, "verb")
        assert model.vectors.shape == (5, 16)
        assert model.sentence_ids == corpus.sentence_ids
        for i, v in enumerate(vecs):
            assert np.allclose(model.vectors[i], v.astype(np.float32))

    def test_sentence_role(self):
        corpus = make_corpus(4)
        rng = np.random.default_rng(1)
        ds = make_dataset(corpus, "sentence", [rng.normal(size=8) for _ in range(4)])
        model = build_reference(corpus, ds, "sentence")
        assert model.vectors.shape == (4, 8)

    def test_missing_record_cites_sentence(self):
        corpus = make_corpus(5)
        rng = np.random.default_rng(2)
        ds = EmbeddingDataset(corpus_fingerprint=corpus.fingerprint())
        for s in corpus.sentences:
            if s.id != 3:
                ds.add(s.id, "verb", rng.normal(size=4))
        with pytest.raises(ConfigurationError, match="sentence 3"):
            build_reference(corpus, ds, "verb")

    def test_fingerprint_mismatch_refused(self):
        corpus = make_corpus(3)
        ds = EmbeddingDataset(corpus_fingerprint="wrong")
        for s in corpus.sentences:
            ds.add(s.id, "verb", np.ones(4))
        with pytest.raises(IntegrityError):
            build_reference(corpus, ds, "verb")


class TestConcatHypothesis:
    def test_definitional_concatenation(self):
        corpus = make_corpus(3)
        lex = make_lexicon(corpus_words(corpus))
        model = build_concat_hypothesis(corpus, lex, "verb", "subject")
        assert model.dim == 12
        for i, s in enumerate(corpus.sentences):
            expected = np.concatenate([lex.vector(s.roles["verb"].word),
                                       lex.vector(s.roles["subject"].word)])
            assert np.array_equal(model.vectors[i],
                                  expected.astype(np.float64))

    def test_identical_word_pairs_give_identical_vectors(self):
        g = load_grammar(str(GRAMMAR_DIR / "intransitive.json"))
        corpus = enumerate_corpus(g)
        lex = make_lexicon(corpus_words(corpus))
        model = build_concat_hypothesis(corpus, lex, "verb", "subject")
        pairs = {}
        for i, s in enumerate(corpus.sentences):
            key = (s.roles["verb"].word, s.roles["subject"].word)
            if key in pairs:
                assert np.array_equal(model.vectors[i], model.vectors[pairs[key]])
            pairs[key] = i
        assert len(pairs) < len(corpus)  # determiner variants collide

    def test_missing_context_word(self):
        corpus = make_corpus(2)
        words = corpus_words(corpus)
        words.remove(corpus.sentences[1].roles["subject"].word)
        lex = make_lexicon(words)
        with pytest.raises(ConfigurationError, match="missing from the"):
            build_concat_hypothesis(corpus, lex, "verb", "subject")

    def test_anchor_control_property(self):
        # the three Exp-1-style hypothesis models share the anchor half
        corpus = make_corpus(6)
        pool = ["px", "py", "pz", "pw"]
        lex = make_lexicon(corpus_words(corpus) + pool)
        subject = build_concat_hypothesis(corpus, lex, "verb", "subject")
        non_arg = build_concat_hypothesis(corpus, lex, "verb", "non_argument")
        null = build_null_hypothesis(corpus, lex, "verb", pool, seed=3)
        half = lex.dim
        for i in range(len(corpus)):
            assert np.array_equal(subject.vectors[i, :half],
                                  non_arg.vectors[i, :half])
            assert np.array_equal(subject.vectors[i, :half],
                                  null.vectors[i, :half])
        assert not np.array_equal(subject.vectors[:, half:],
                                  non_arg.vectors[:, half:])


class TestNullHypothesis:
    def test_forced_choice(self):
        corpus = make_corpus(1)
        sentence_word = corpus.sentences[0].roles["subject"].word
        pool = [sentence_word, "other"]
        lex = make_lexicon(corpus_words(corpus) + ["other"])
        model = build_null_hypothesis(corpus, lex, "verb", pool, seed=0)
        expected = np.concatenate([
            lex.vector(corpus.sentences[0].roles["verb"].word),
            lex.vector("other")])
        assert np.array_equal(model.vectors[0], expected.astype(np.float64))

    def test_equal_seeds_equal_models(self):
        corpus = make_corpus(10)
        pool = [f"p{i}" for i in range(6)]
        lex = make_lexicon(corpus_words(corpus) + pool)
        m1 = build_null_hypothesis(corpus, lex, "verb", pool, seed=5)
        m2 = build_null_hypothesis(corpus, lex, "verb", pool, seed=5)
        m3 = build_null_hypothesis(corpus, lex, "verb", pool, seed=6)
        assert np.array_equal(m1.vectors, m2.vectors)
        assert not np.array_equal(m1.vectors, m3.vectors)

    def test_distractor_never_in_sentence(self):
        corpus = make_corpus(50)
        sentence_words = {s.id: set(s.tokens) for s in corpus.sentences}
        pool = [f"p{i}" for i in range(4)] + [corpus.sentences[0].tokens[1]]
        lex = make_lexicon(corpus_words(corpus) + pool)
        model = build_single_null_hypothesis(corpus, lex, pool, seed=2)
        for i, s in enumerate(corpus.sentences):
            row = model.vectors[i]
            match = [w for w in pool
                     if np.array_equal(row, lex.vector(w).astype(np.float64))]
            assert match and match[0] not in sentence_words[s.id]

    def test_uniform_over_eligible_pool(self):
        # 10,000 draws over 4 eligible distractors: each frequency ~0.25
        corpus = make_corpus(10_000)
        pool = ["pa", "pb", "pc", "pd"]
        lex = make_lexicon(corpus_words(corpus) + pool, dim=2)
        model = build_single_null_hypothesis(corpus, lex, pool, seed=11)
        rows = {w: lex.vector(w).astype(np.float64) for w in pool}
        counts = {w: 0 for w in pool}
        for row in model.vectors:
            for w, rv in rows.items():
                if np.array_equal(row, rv):
                    counts[w] += 1
                    break
        total = sum(counts.values())
        assert total == 10_000
        freqs = {w: c / total for w, c in counts.items()}
        for w, f in freqs.items():
            assert abs(f - 0.25) < 0.02, freqs
        expected = total / 4
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < 16.27  # 3 dof, alpha = .001

    def test_exhausted_pool_cites_sentence(self):
        corpus = make_corpus(2)
        pool = list(corpus.sentences[1].tokens)
        lex = make_lexicon(corpus_words(corpus))
        with pytest.raises(ConfigurationError, match="sentence 1"):
            build_null_hypothesis(corpus, lex, "verb", pool, seed=0)


class TestSingleHypothesis:
    def test_row_equals_lexicon(self):
        corpus = make_corpus(4)
        lex = make_lexicon(corpus_words(corpus))
        model = build_single_hypothesis(corpus, lex, "verb")
        assert model.dim == lex.dim
        for i, s in enumerate(corpus.sentences):
            assert np.array_equal(
                model.vectors[i],
                lex.vector(s.roles["verb"].word).astype(np.float64))

    def test_single_null_forced(self):
        corpus = make_corpus(1)
        lex = make_lexicon(corpus_words(corpus) + ["only"])
        model = build_single_null_hypothesis(corpus, lex, ["only"], seed=9)
        assert np.array_equal(model.vectors[0],
                              lex.vector("only").astype(np.float64))

    def test_role_absent_from_corpus_family(self):
        g = load_grammar(str(GRAMMAR_DIR / "intransitive.json"))
        corpus = enumerate_corpus(g)
        lex = make_lexicon(corpus_words(corpus))
        with pytest.raises(ConfigurationError, match="object"):
            build_single_hypothesis(corpus, lex, "object")

    def test_unknown_role_label(self):
        corpus = make_corpus(2)
        lex = make_lexicon(corpus_words(corpus))
        with pytest.raises(ConfigurationError, match="unknown role"):
            build_single_hypothesis(corpus, lex, "protagonist")


class TestRecipes:
    def test_dispatch_matches_direct_builders(self):
        corpus = make_corpus(5)
        pool = ["pa", "pb"]
        lex = make_lexicon(corpus_words(corpus) + pool)
        ds = make_dataset(corpus, "verb",
                          [np.random.default_rng(i).normal(size=7)
                           for i in range(5)])
        ref = build_model(recipe_from_dict(
            {"kind": "contextual_role", "role": "verb", "name": "ref"}),
            corpus, dataset=ds)
        assert np.array_equal(ref.vectors,
                              build_reference(corpus, ds, "verb").vectors)
        concat = build_model(recipe_from_dict(
            {"kind": "static_concat", "anchor_role": "verb",
             "context_role": "subject", "name": "subj"}),
            corpus, lexicon=lex)
        assert np.array_equal(
            concat.vectors,
            build_concat_hypothesis(corpus, lex, "verb", "subject").vectors)
        null = build_model(recipe_from_dict(
            {"kind": "null_concat", "anchor_role": "verb",
             "distractor_pool": pool, "seed": 4, "name": "null"}),
            corpus, lexicon=lex)
        assert np.array_equal(
            null.vectors,
            build_null_hypothesis(corpus, lex, "verb", pool, seed=4).vectors)

    def test_recipe_validation(self):
        with pytest.raises(ConfigurationError, match="unknown recipe kind"):
            ModelRecipe(kind="mystery", name="x")
        with pytest.raises(ConfigurationError, match="requires 'role'"):
            ModelRecipe(kind="contextual_role", name="x")
        with pytest.raises(ConfigurationError, match="requires 'seed'"):
            ModelRecipe(kind="null_concat", name="x", anchor_role="verb",
                        distractor_pool=("a",))

    def test_missing_inputs(self):
        corpus = make_corpus(2)
        with pytest.raises(ConfigurationError, match="dataset"):
            build_model(ModelRecipe(kind="contextual_role", name="r", role="verb"),
                        corpus)
        with pytest.raises(ConfigurationError, match="lexicon"):
            build_model(ModelRecipe(kind="static_single", name="s", role="verb"),
                        corpus)


class TestDumpModel:
    def test_debug_dump_roundtrips(self, tmp_path):
        from repgeom.embedstore import read_dataset
        from repgeom.models import dump_model

        corpus = make_corpus(4)
        lex = make_lexicon(corpus_words(corpus))
        model = build_single_hypothesis(corpus, lex, "verb", name="verbs")
        path = tmp_path / "model.emb1"
        dump_model(model, path, corpus_fingerprint=corpus.fingerprint())
        back = read_dataset(path)
        assert back.dims == {"verbs": lex.dim}
        for i, sid in enumerate(model.sentence_ids):
            assert np.allclose(back.records[(sid, "verbs")],
                               model.vectors[i].astype(np.float32))


class TestAlignment:
    def test_all_models_share_index_order(self):
        corpus = make_corpus(8)
        pool = ["pa", "pb", "pc"]
        lex = make_lexicon(corpus_words(corpus) + pool)
        ds = make_dataset(corpus, "verb",
                          [np.random.default_rng(i).normal(size=5)
                           for i in range(8)])
        built = [
            build_reference(corpus, ds, "verb"),
            build_concat_hypothesis(corpus, lex, "verb", "subject"),
            build_null_hypothesis(corpus, lex, "verb", pool, seed=1),
            build_single_hypothesis(corpus, lex, "subject"),
        ]
        for model in built:
            assert model.sentence_ids == corpus.sentence_ids

    def test_rows_for_unknown_id(self):
        corpus = make_corpus(3)
        lex = make_lexicon(corpus_words(corpus))
        model = build_single_hypothesis(corpus, lex, "verb")
        with pytest.raises(ConfigurationError, match="no vector for sentence"):
            model.rows_for([0, 42])
