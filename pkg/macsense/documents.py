"""
Document helpers
JSON channel / scheme documents: parsing with located errors, exact
probability literals and flat row-major tensors.
"""

import json
import logging
from fractions import Fraction
from typing import Any, Dict, Iterable, Sequence, Tuple

import numpy as np

from .exceptions import DocumentError, UnknownVariableError
from .probability import Alphabet

logger = logging.getLogger(__name__)


def parse_document(text: str) -> Dict[str, Any]:
    """Parse a JSON document; the top level must be an object"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"parse error: {e.msg}", line=e.lineno, column=e.colno) from None
    if not isinstance(document, dict):
        raise DocumentError("document must be a JSON object")
    return document


def dump_document(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2) + "\n"


def require(document: Dict[str, Any], key: str):
    if key not in document:
        raise DocumentError("missing required key", key=key)
    return document[key]


def parse_probability(token, key: str) -> float:
    """Decimal string, exact rational 'p/q' or JSON number -> float"""
    if isinstance(token, bool):
        raise DocumentError(f"expected a probability, got {token!r}", key=key)
    try:
        if isinstance(token, str):
            return float(Fraction(token.strip()))
        if isinstance(token, (int, float)):
            return float(token)
    except (ValueError, ZeroDivisionError):
        pass
    raise DocumentError(f"expected a probability, got {token!r}", key=key)


def format_probability(value: float) -> str:
    """Shortest decimal string that reads back to the identical float"""
    return repr(float(value))


def parse_flat(document: Dict[str, Any], key: str, shape: Tuple[int, ...]) -> np.ndarray:
    entries = require(document, key)
    if not isinstance(entries, list):
        raise DocumentError("expected a flat list", key=key)
    expected = int(np.prod(shape, dtype=np.int64))
    if len(entries) != expected:
        raise DocumentError(f"expected {expected} entries for shape {shape}, got {len(entries)}", key=key)
    values = [parse_probability(token, key) for token in entries]
    return np.array(values, dtype=float).reshape(shape)


def flatten(array: np.ndarray) -> list:
    return [format_probability(value) for value in np.asarray(array).ravel()]


def parse_alphabets(document: Dict[str, Any], key: str, expected: Sequence[str]) -> Dict[str, Alphabet]:
    """Read name -> symbol list; every expected name must be present and nothing else"""
    raw = require(document, key)
    if not isinstance(raw, dict):
        raise DocumentError("expected an object mapping names to symbol lists", key=key)
    for name in raw:
        if name not in expected:
            raise UnknownVariableError(name, expected)
    alphabets = {}
    for name in expected:
        if name not in raw:
            raise DocumentError(f"alphabet '{name}' is missing", key=key)
        symbols = raw[name]
        if not isinstance(symbols, list) or not symbols:
            raise DocumentError(f"alphabet '{name}' must be a non-empty list", key=key)
        alphabets[name] = Alphabet(name, tuple(str(symbol) for symbol in symbols))
    return alphabets


def dump_alphabets(alphabets: Dict[str, Alphabet], names: Iterable[str]) -> Dict[str, list]:
    return {name: list(alphabets[name].symbols) for name in names}
