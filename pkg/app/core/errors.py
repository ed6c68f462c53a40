# app/core/errors.py

"""
Exceptions raised by the simulator.

Protocol-level faults inside a run (malformed routes, cursor errors) are
counted as metrics and never raised; these exceptions are for caller bugs
and unusable configuration.
"""


class SimulationError(Exception):
    """Base class for simulator errors."""


class ContractViolation(SimulationError):
    """An operation was called outside its precondition."""


class ConfigError(SimulationError):
    """A scenario or sweep description cannot be used."""

    def __init__(self, message: str, fields: list[str] | None = None):
        super().__init__(message)
        self.fields = fields or []

    @classmethod
    def from_validation(cls, exc, source: str = "config") -> "ConfigError":
        fields = []
        for error in exc.errors():
            loc = ".".join(str(part) for part in error.get("loc", ()))
            fields.append(loc or "<root>")
        details = "; ".join(
            f"{'.'.join(str(p) for p in e.get('loc', ())) or '<root>'}: {e.get('msg')}"
            for e in exc.errors()
        )
        return cls(f"invalid {source}: {details}", fields)
