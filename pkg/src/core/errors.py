class QcohomError(Exception):
    """Base class for every fault raised by the library."""


class InputError(QcohomError):
    """Malformed descriptors, unknown presets, bad command-line values."""
