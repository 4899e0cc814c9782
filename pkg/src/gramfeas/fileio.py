"""Shared helpers for the line-based instance file formats."""

from __future__ import annotations

import os
import tempfile
from fractions import Fraction


class ParseError(ValueError):
    """Raised on malformed input files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def content_lines(text: str):
    """Yield (lineno, stripped line) skipping blanks and '#' comments."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_rational(token: str, lineno: int | None = None) -> Fraction:
    """Parse 'p/q', integer, or decimal notation into an exact rational."""
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational literal {token!r}", lineno) from None


def format_rational(value: Fraction) -> str:
    return str(value)


def parse_number(token: str, lineno: int | None = None):
    """Parse a value that may be exact (rational) or floating point.

    Tokens with a '/' or plain integers are kept exact; anything with a
    decimal point or exponent becomes a float.  This keeps rational witness
    files exact across a round trip while letting solver output stay binary64.
    """
    if "/" in token or token.lstrip("+-").isdigit():
        return parse_rational(token, lineno)
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad numeric literal {token!r}", lineno) from None


def format_number(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def atomic_write(path: str, text: str) -> None:
    """Write text to path via a temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-gramfeas-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
