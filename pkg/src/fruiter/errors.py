"""Exception hierarchy shared by every fruiter module."""

from __future__ import annotations


class FruiterError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class ValidationError(FruiterError):
    """A value or file violates a domain invariant or schema."""

    def __init__(self, message: str, path: str | None = None, field: str | None = None):
        self.path = path
        self.field = field
        where = ""
        if path:
            where += f"{path}: "
        if field:
            where += f"{field}: "
        super().__init__(where + message)


class CorpusIOError(FruiterError, OSError):
    """A corpus file could not be read or written."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")


class GroundTruthGapError(FruiterError):
    """An event has no entry in the canonical map that should contain it."""

    def __init__(self, app_id: str, locator: str):
        self.app_id = app_id
        self.locator = locator
        super().__init__(f"locator {locator!r} has no canonical event in app {app_id!r}")


class ModelGapError(FruiterError):
    """A source event is missing from the source app model."""

    def __init__(self, app_id: str, locator: str):
        self.app_id = app_id
        self.locator = locator
        super().__init__(f"locator {locator!r} not found in app model {app_id!r}")


class AlignmentError(FruiterError):
    """Source and transferred sequences do not pair up positionally."""


class ScriptSyntaxError(FruiterError):
    def __init__(self, message: str, line: int, column: int, token: str):
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"line {line}, column {column}: {message} (at {token!r})")


class UnresolvedDefinitionError(FruiterError):
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        super().__init__(f"line {line}: variable {name!r} used before any assignment")


class UnknownApiError(FruiterError):
    def __init__(self, api: str, line: int):
        self.api = api
        self.line = line
        super().__init__(f"line {line}: API {api!r} is not in the signature table")


class PlanError(FruiterError):
    """A benchmark plan references unknown apps or techniques, or is empty."""


class GenerationError(FruiterError):
    """A synthetic corpus spec cannot be realized."""


class InsufficientDataError(FruiterError):
    """Too few result entries for a statistic."""
