"""Exception types shared across the package.

Grouped by the layer that raises them; everything derives from HintkitError
so callers can catch the whole family at a service boundary.
"""


class HintkitError(Exception):
    """Base class for all errors raised by this package."""


# --- session state machine ---------------------------------------------------

class QuotaExceeded(HintkitError):
    """Applying a hint delivery would push a session past its quota."""


class ConsentMissing(HintkitError):
    """A hint event was applied to a session without prior consent."""


class OutOfOrder(HintkitError):
    """Event sequence number is not strictly increasing."""


# --- sandboxed execution -----------------------------------------------------

class SandboxUnavailable(HintkitError):
    """The host could not spawn an isolated child process.

    Distinct from any failure of the student program itself.
    """


class NotCorrect(HintkitError):
    """Runtime measurement requested for a program that does not pass."""


# --- hint generation pipeline ------------------------------------------------

class ProviderError(HintkitError):
    """Transport or auth failure talking to the completion provider."""


class TemplateMissing(HintkitError):
    """A named prompt template asset is not present."""


class EmptyResponse(HintkitError):
    """Provider returned no usable hint text."""


class GenerationFailed(HintkitError):
    """End-to-end hint generation failed; no quota was consumed."""


# --- service -----------------------------------------------------------------

class StorageError(HintkitError):
    """The event log could not be written."""


class ConsentRequired(HintkitError):
    """A hint was requested before the student consented."""


class QuotaExhausted(HintkitError):
    """No hint deliveries remain for this session."""


class UnknownQuestion(HintkitError):
    """Referenced question id is not configured."""


class UnknownHint(HintkitError):
    """Referenced hint id does not exist."""


class ParseError(HintkitError):
    """An event-log line could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class ConfigError(HintkitError):
    """Service or analysis configuration is invalid."""


# --- statistics --------------------------------------------------------------

class DegenerateData(HintkitError):
    """Input data carries no information for the requested test."""


class ZeroExpectedCount(HintkitError):
    """A contingency table cell has zero expected count."""


class InsufficientData(HintkitError):
    """Not enough observations to compute the requested labels."""
