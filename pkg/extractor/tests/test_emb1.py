import numpy as np
import pytest

from extract_embeddings.emb1 import Emb1Error, read_emb1, write_emb1


def sample_records(rng, n_sentences=4, roles=("verb", "sentence"), dim=6):
    return {(sid, role): rng.normal(size=dim).astype(np.float32)
            for sid in range(n_sentences) for role in roles}


class TestWriteEmb1:
    def test_self_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        records = sample_records(rng)
        path = tmp_path / "d.emb1"
        write_emb1(path, "fp-x", records)
        fingerprint, back = read_emb1(path)
        assert fingerprint == "fp-x"
        assert set(back) == set(records)
        for key, vec in records.items():
            assert back[key].tobytes() == vec.tobytes()

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        rng = np.random.default_rng(1)
        path = tmp_path / "d.emb1"
        write_emb1(path, "fp", sample_records(rng))
        assert [p.name for p in tmp_path.iterdir()] == ["d.emb1"]

    def test_dim_conflict_rejected(self, tmp_path):
        records = {(0, "verb"): np.ones(4, dtype=np.float32),
                   (1, "verb"): np.ones(5, dtype=np.float32)}
        with pytest.raises(Emb1Error, match="dim"):
            write_emb1(tmp_path / "d.emb1", "fp", records)

    def test_nonfinite_rejected(self, tmp_path):
        records = {(0, "verb"): np.array([1.0, np.inf], dtype=np.float32)}
        with pytest.raises(Emb1Error, match="non-finite"):
            write_emb1(tmp_path / "d.emb1", "fp", records)

    def test_primary_reader_accepts_file(self, tmp_path):
        repgeom_store = pytest.importorskip("repgeom.embedstore")
        rng = np.random.default_rng(2)
        records = sample_records(rng, n_sentences=7, dim=9)
        path = tmp_path / "d.emb1"
        write_emb1(path, "fp-chain", records)
        dataset = repgeom_store.read_dataset(path)
        assert dataset.corpus_fingerprint == "fp-chain"
        assert set(dataset.records) == set(records)
        for key, vec in records.items():
            assert dataset.records[key].tobytes() == vec.tobytes()

    def test_primary_writer_output_matches_ours(self, tmp_path):
        # same records, both writers: identical bytes, one format
        repgeom_store = pytest.importorskip("repgeom.embedstore")
        rng = np.random.default_rng(3)
        records = sample_records(rng, n_sentences=5, dim=4)
        ours = tmp_path / "ours.emb1"
        write_emb1(ours, "fp", records)
        ds = repgeom_store.EmbeddingDataset(corpus_fingerprint="fp")
        for (sid, role), vec in records.items():
            ds.add(sid, role, vec)
        theirs = tmp_path / "theirs.emb1"
        repgeom_store.write_dataset(ds, theirs)
        assert ours.read_bytes() == theirs.read_bytes()
