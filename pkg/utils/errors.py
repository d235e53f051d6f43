"""
Error types shared by the planner, the CLI and the HTTP routes.

Every error carries the exit code the CLI returns for it and the HTTP status
the routes answer with, so both surfaces map failures the same way.
"""


class PlannerError(Exception):
    """Base class for every failure the toolkit reports."""

    exit_code = 1
    status_code = 400

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def with_context(self, context):
        """
        Return a copy of this error with ``context`` prefixed to the message.

        Args:
            context (str): e.g. "step 3 (pick)"

        Returns:
            PlannerError: same class, same details, longer message
        """
        err = type(self)(f"{context}: {self.message}", **self.details)
        err.__cause__ = self
        return err

    def to_dict(self) -> dict:
        return {'type': type(self).__name__, 'message': self.message, **self.details}


class InputError(PlannerError, ValueError):
    """Malformed input: bad files, schema violations, out-of-range parameters."""

    exit_code = 1
    status_code = 422


class TransferError(InputError):
    """A new task instance is missing an object the guiding poses need."""


class DuplicateSkillError(InputError):
    status_code = 409


class UnknownSkillError(InputError):
    status_code = 404


class PlanningError(PlannerError):
    """Segmentation, extraction or tracking could not produce a plan."""

    exit_code = 2
    status_code = 409


class ExtractionError(PlanningError):
    """No breakpoint fell inside any object's region of interest."""


class TrackingError(PlanningError):
    """The rate controller could not follow a constraint leg."""


class JointLimitError(TrackingError):
    pass


class GateTimeoutError(PlannerError):
    exit_code = 3
    status_code = 408
