"""extract-embeddings: populate EMB1 datasets from role-annotated corpora."""

__version__ = "0.1.0"
