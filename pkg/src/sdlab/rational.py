"""Exact rational plumbing shared across the package.

Probabilities, likelihoods, posteriors and privacy-loss bounds are all
`fractions.Fraction` values.  Floats appear only when a report is rendered
for humans; nothing downstream of a computation ever round-trips through
floating point.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["format_fraction", "parse_fraction", "fraction_to_float"]


def format_fraction(value: Fraction) -> str:
    """Render a Fraction as the canonical "p/q" string ("p" when q == 1)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str | int | Fraction) -> Fraction:
    """Parse "p/q" (or a bare integer / Fraction) into an exact Fraction.

    Decimal strings are rejected: serialized artifacts must stay exact.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"refusing inexact rational literal: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator: {text!r}") from None


def fraction_to_float(value: Fraction | None) -> float | None:
    """Display-only conversion; never feed the result back into computation."""
    if value is None:
        return None
    return value.numerator / value.denominator
