"""Exception types shared across the library."""


class SmlabError(Exception):
    """Base class for every error raised by smlab."""


class QuotaViolation(SmlabError):
    """A matching assigns an agent more partners than its quota."""


class UnknownAgent(SmlabError):
    """A pair or response references an agent outside the market."""


class NotFull(SmlabError):
    """Operation requires a market with complete lists and balanced quotas."""


class NotPerfect(SmlabError):
    """Operation requires a matching that fills every quota."""


class PhantomBlock(SmlabError):
    """A phantom-phantom blocking pair where none is permitted."""


class CycleDetected(SmlabError):
    """A relation that must be acyclic contains a cycle."""


class Infeasible(SmlabError):
    """No linear order is consistent with the given constraints."""


class TooLarge(SmlabError):
    """Instance exceeds the configured enumeration cap."""


class AlphaTooSmall(SmlabError):
    """Representativeness threshold below the regime where acyclicity holds."""


class NoConsistentOrder(SmlabError):
    """A fraction over consistent orders is undefined: none exist."""


class MalformedClause(SmlabError):
    """A CNF clause is empty, too wide, or references a bad variable."""


class RestartLimit(SmlabError):
    """Sampled ranking construction restarted more times than allowed."""


class SamplerStarvation(SmlabError):
    """Rejection sampling exhausted its retry budget with no exact fallback."""


class NotTerminated(SmlabError):
    """Deferred decisions are only fully drawn once the protocol ends."""


class ProtocolViolation(SmlabError):
    """One side of the protocol produced a response the other side proves impossible."""

    def __init__(self, message: str, round_index: int | None = None):
        self.round_index = round_index
        if round_index is not None:
            message = f"round {round_index}: {message}"
        super().__init__(message)


class DuplicateConstraint(ProtocolViolation):
    """An observed blocking pair yielded no new constraint for either agent."""


class ParseError(SmlabError):
    """Market file text does not conform to the grammar."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateEntry(ParseError):
    """An agent or preference entry appears twice in a market file."""


class IndexOutOfRange(ParseError):
    """A market file references an agent index outside the declared sides."""


class QuotaOutOfRange(ParseError):
    """A quota outside 1..(opposite side size)."""


class ConfigError(SmlabError):
    """Invalid experiment configuration."""
