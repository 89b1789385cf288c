"""repgeom: compare the representational geometry of contextual embeddings
against constructed hypothesis models via repeated-sample RSA with sign tests.
"""

__version__ = "0.1.0"
