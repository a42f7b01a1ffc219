"""
Report module for writing analysis results to JSON.
Serializes result objects deterministically (sorted keys, 17 significant
digits) and reads the reports back.
"""
import dataclasses
import json
import math
import re
from fractions import Fraction
from pathlib import Path

import numpy as np
from mpmath import mp

from errors import InputValidationError
from precision import DEFAULT_EXTENDED_BITS, EXTENDED, parse_precision

FLOAT_FORMAT = '.17g'
INDENT = 2

_DECIMAL = re.compile(r'^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$')
_FRACTION = re.compile(r'^[+-]?\d+/\d+$')


def _digits(mode):
    """Decimal digits that represent a number of the mode without loss."""
    if mode.kind != EXTENDED:
        return 17
    return int(mode.bits * math.log10(2)) + 2


def to_jsonable(value, digits=17):
    """
    Convert a result object into plain JSON values.

    Objects with to_dict/to_json are asked for their own layout; other
    dataclasses are walked field by field. Extended-precision numbers become
    decimal strings and fractions become 'p/q' strings.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, mp.mpf):
        return mp.nstr(value, digits)
    if isinstance(value, (complex, np.complexfloating, mp.mpc)):
        return {'re': to_jsonable(value.real, digits), 'im': to_jsonable(value.imag, digits)}
    if hasattr(value, 'to_dict'):
        return to_jsonable(value.to_dict(), digits)
    if hasattr(value, 'to_json'):
        return to_jsonable(value.to_json(), digits)
    if dataclasses.is_dataclass(value):
        return {f.name: to_jsonable(getattr(value, f.name), digits) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v, digits) for v in value]
    raise TypeError(f"Cannot serialize {type(value).__name__} into a report")


def _encode(value, level):
    pad = ' ' * (INDENT * (level + 1))
    end = ' ' * (INDENT * level)
    if isinstance(value, dict):
        if not value:
            return '{}'
        items = [f"{pad}{json.dumps(k)}: {_encode(value[k], level + 1)}" for k in sorted(value)]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(value, list):
        if not value:
            return '[]'
        items = [pad + _encode(v, level + 1) for v in value]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    if isinstance(value, float):
        if not math.isfinite(value):
            return json.dumps(str(value))
        return format(value, FLOAT_FORMAT)
    return json.dumps(value)


def dumps_document(data, mode):
    """Deterministic JSON text for any serializable data, numbers written for the mode."""
    return _encode(to_jsonable(data, _digits(mode)), 0) + '\n'


def dumps_report(result, config, command):
    """
    Render the report envelope {"command", "precision", "report"} as text.

    Args:
        result (object): Result object, dict or None for an empty report
        config (RunConfig): Run configuration (precision tag)
        command (str): Subcommand that produced the result

    Returns:
        str: Deterministic JSON text ending in a newline
    """
    body = {} if result is None else result
    envelope = {'command': command, 'precision': config.precision.tag, 'report': body}
    return dumps_document(envelope, config.precision)


def report_emit(result, config, command=''):
    """
    Write a result as deterministic JSON.

    Saves to config.output_path when it is set (creating the parent directory),
    otherwise prints to stdout.

    Args:
        result (object): Result to serialize
        config (RunConfig): Run configuration
        command (str): Subcommand name recorded in the envelope

    Returns:
        str: Output path, or None when the report went to stdout
    """
    return write_text(dumps_report(result, config, command), config.output_path)


def write_text(text, output_path=None):
    """Save text to output_path (creating its directory) or print it when no path is given."""
    if output_path is None:
        print(text, end='')
        return None

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(text)
    return str(output_path)


def _restore(value, bits):
    if isinstance(value, dict):
        if set(value) == {'re', 'im'}:
            return mp.mpc(_restore(value['re'], bits), _restore(value['im'], bits))
        return {k: _restore(v, bits) for k, v in value.items()}
    if isinstance(value, list):
        return [_restore(v, bits) for v in value]
    if isinstance(value, str):
        if _FRACTION.match(value):
            return Fraction(value)
        if _DECIMAL.match(value):
            with mp.workprec(bits):
                return mp.mpf(value)
    return value


def load_report(source):
    """
    Read a report back from a path or from JSON text.

    Decimal strings are restored as mpmath numbers at the precision recorded in
    the envelope, 'p/q' strings as fractions.

    Args:
        source (str | Path): Report file or its text

    Returns:
        dict: The envelope with numbers restored
    """
    text = str(source)
    if not text.lstrip().startswith('{'):
        path = Path(source)
        try:
            text = path.read_text()
        except FileNotFoundError as exc:
            raise InputValidationError(f"Report not found: {path}") from exc
    try:
        envelope = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputValidationError(f"Report is not valid JSON: {exc}") from exc

    try:
        mode = parse_precision(envelope.get('precision', 'float64'))
    except ValueError as exc:
        raise InputValidationError(str(exc)) from exc
    bits = mode.bits if mode.kind == EXTENDED else DEFAULT_EXTENDED_BITS
    envelope['report'] = _restore(envelope.get('report', {}), bits)
    return envelope
