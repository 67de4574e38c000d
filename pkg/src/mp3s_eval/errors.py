"""Exception types shared across the toolkit.

Everything raised for bad input data derives from :class:`DataError`,
which the CLI maps to exit code 2.
"""


class DataError(Exception):
    """Invalid or inconsistent input data."""


class ArchiveError(DataError):
    """Malformed archive directory, manifest, or tensor file."""


class MiningError(DataError):
    """Triplet mining cannot proceed on the given material."""


class TrialError(DataError):
    """Malformed or degenerate verification trials."""


class ProbeError(DataError):
    """Probe training or evaluation failure."""


class SpecError(DataError):
    """Invalid architecture spec for cost accounting."""


class TableError(DataError):
    """Malformed benchmark table or impossible comparison."""
