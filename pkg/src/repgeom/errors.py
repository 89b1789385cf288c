"""Exception hierarchy shared by all modules.

Each family maps to one CLI exit code: configuration/usage problems exit 1,
data-integrity problems exit 2, numeric failures exit 3.
"""

from __future__ import annotations


class RepgeomError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigurationError(RepgeomError):
    """Invalid grammar, recipe, config value, or missing input."""

    exit_code = 1


class IntegrityError(RepgeomError):
    """Corrupt or inconsistent data: bad files, fingerprint mismatches."""

    exit_code = 2


class NumericError(RepgeomError):
    """A computation is mathematically undefined for the given input."""

    exit_code = 3


class UndefinedCorrelationError(NumericError):
    """Spearman's rho is undefined because one input has zero rank variance."""


class PairingError(IntegrityError):
    """Two score series do not share the same per-sample audit trail."""


class LexiconMissError(ConfigurationError):
    """A requested word is absent from the static lexicon."""
