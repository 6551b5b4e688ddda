class GResilienceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GResilienceError, ValueError):
    pass


class DegenerateInputError(DomainError):
    """Normalization over values that are all zero."""


class InvalidTransitionError(GResilienceError):
    def __init__(self, state, event):
        self.state = state
        self.event = event
        super().__init__(f"invalid transition: event {event} is not allowed in state {state}")


class ConfigError(GResilienceError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
