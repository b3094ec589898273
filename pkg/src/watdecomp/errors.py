"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class WatDecompError(Exception):
    """Base class for every error raised by this package."""


# --- wat parsing -----------------------------------------------------------


class ParseError(WatDecompError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at {line + 1}:{col + 1}" if line is not None and col is not None else ""
        super().__init__(f"{message}{where}")


class UnsupportedConstruct(ParseError):
    def __init__(self, construct: str, line: int | None = None, col: int | None = None):
        self.construct = construct
        super().__init__(f"unsupported wat construct {construct!r}", line, col)


class BadEscape(WatDecompError):
    pass


class ConverterError(WatDecompError):
    """The external wasm-to-wat converter failed or is missing."""


# --- slicing ---------------------------------------------------------------


class OverlapError(WatDecompError):
    pass


class UnresolvedMarker(WatDecompError):
    def __init__(self, block_id: str, referenced_from: str | None = None):
        self.block_id = block_id
        self.referenced_from = referenced_from
        src = f" (referenced from {referenced_from})" if referenced_from else ""
        super().__init__(f"no block for marker <<{block_id}>>{src}")


class CyclicMarker(WatDecompError):
    def __init__(self, block_id: str):
        self.block_id = block_id
        super().__init__(f"marker cycle through block {block_id}")


# --- context / renaming ----------------------------------------------------


class UnknownCallee(WatDecompError):
    pass


class FormatError(WatDecompError):
    pass


class DuplicateOffset(FormatError):
    def __init__(self, function: str, offset: int):
        self.function = function
        self.offset = offset
        super().__init__(f"function {function!r}: offset {offset} mapped twice")


class DuplicateName(FormatError):
    def __init__(self, function: str, name: str):
        self.function = function
        self.name = name
        super().__init__(f"function {function!r}: variable {name!r} mapped twice")


class UnmappedCollision(WatDecompError):
    pass


# --- pipeline --------------------------------------------------------------


class PromptTooLong(WatDecompError):
    def __init__(self, tokens: int, limit: int, block_id: str | None = None):
        self.tokens = tokens
        self.limit = limit
        self.block_id = block_id
        super().__init__(f"prompt for {block_id or '?'} has {tokens} tokens (limit {limit})")


class BackendError(WatDecompError):
    def __init__(self, message: str, block_id: str | None = None):
        self.block_id = block_id
        super().__init__(f"[{block_id}] {message}" if block_id else message)


class BackendUnavailable(BackendError):
    pass


class EmptyCompletion(BackendError):
    pass


class BudgetExhausted(BackendError):
    pass


# --- metrics / harness -----------------------------------------------------


class CParseError(ParseError):
    pass


class EmptyText(WatDecompError):
    pass


class ToolchainMissing(WatDecompError):
    pass


class RuntimeMissing(WatDecompError):
    pass


class ConfigError(WatDecompError):
    pass
