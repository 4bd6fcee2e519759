"""Exception hierarchy.  Every error is a ``ValueError`` so callers that only
care about bad input can catch that."""


class AtGraphError(ValueError):
    pass


class MalformedSequence(AtGraphError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BadSchedule(AtGraphError):
    pass


class BadParams(AtGraphError):
    pass


class ScheduleExhausted(AtGraphError):
    pass


class Inconsistent(AtGraphError):
    pass


class CapExceeded(AtGraphError):
    pass


class InsufficientData(AtGraphError):
    pass


class InsufficientTail(AtGraphError):
    pass


class ZeroSum(AtGraphError):
    pass


class EmptySample(AtGraphError):
    pass


class DegenerateSupport(AtGraphError):
    pass


class LengthMismatch(AtGraphError):
    pass
