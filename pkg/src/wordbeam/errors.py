"""Exception types shared across the package."""


class WordbeamError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(WordbeamError):
    """Invalid configuration: bad values, unknown keys, missing files."""


class ProtocolError(WordbeamError):
    """An external provider process violated the line protocol or died.

    Aborts the attack that triggered it; the evaluation harness records
    the affected example as errored.
    """


class SearchCapExceeded(WordbeamError):
    """The exhaustive oracle refused a search space above its cap."""
