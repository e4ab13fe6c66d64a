"""Exception hierarchy shared by all rosterga modules."""


class RosterError(Exception):
    """Base class for all errors raised by this package."""


class InstanceInvalid(RosterError):
    """Problem data violates an instance invariant (e.g. a nurse with no feasible pattern)."""


class ScheduleInvalid(RosterError):
    """A schedule assigns a nurse a pattern outside their feasible set."""


class ConfigInvalid(RosterError):
    """A configuration value is out of range or inconsistent."""


class ParseError(RosterError):
    """An instance or results file could not be parsed."""
