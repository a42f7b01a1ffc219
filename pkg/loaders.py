"""
Loader module for momentgate input files.
Reads moment, Hankel, quadrature and sampled-function JSON files into library types
and prints short summaries of what was loaded.
"""
import json
from pathlib import Path

import pandas as pd

from approx import SampledFunction, SampledSequence
from errors import InputValidationError
from functionals import MomentSequence, QuadFunctional
from gns import hankel, hankel_from_entries
from precision import auto_mode, to_float


def load_json(path):
    """
    Open a JSON file and return the parsed document.

    Args:
        path (str): File to read

    Returns:
        object: The parsed JSON document
    """
    fullname = Path(path)
    try:
        with fullname.open() as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise InputValidationError(f"Input file not found: {fullname}") from exc
    except json.JSONDecodeError as exc:
        raise InputValidationError(f"{fullname} is not valid JSON: {exc}") from exc


def _require(data, keys, path):
    if not isinstance(data, dict):
        raise InputValidationError(f"{path}: expected a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise InputValidationError(f"{path}: missing keys {missing}")


def load_moments(path, mode=None, auto_extend=True):
    """
    Read {"degree": d, "moments": [s_0, ..., s_2d]}.

    Moments may be numbers or decimal strings; strings keep all their digits in
    extended and rational mode.
    """
    data = load_json(path)
    _require(data, ['moments'], path)
    return MomentSequence.from_dict(data, mode, auto_extend)


def load_quadrature(path):
    """Read {"nodes": [...], "weights": [...]}."""
    data = load_json(path)
    _require(data, ['nodes', 'weights'], path)
    return QuadFunctional.from_dict(data)


def load_sampled_function(path):
    """Read {"grid": [...], "values": [...]}."""
    data = load_json(path)
    _require(data, ['grid', 'values'], path)
    return SampledFunction.from_dict(data)


def load_sampled_sequence(path):
    """Read {"grid": [...], "members": [[...], ...], "dominator": [...] (optional)}."""
    data = load_json(path)
    _require(data, ['grid', 'members'], path)
    return SampledSequence.from_dict(data)


def load_functional(path, mode=None, auto_extend=True):
    """
    Read a positive functional: a quadrature file when it carries "nodes",
    a moment file otherwise.

    Returns:
        MomentSequence | QuadFunctional: The functional
    """
    data = load_json(path)
    if isinstance(data, dict) and 'nodes' in data:
        return load_quadrature(path)
    return load_moments(path, mode, auto_extend)


def load_hankel(path, mode=None, auto_extend=True):
    """
    Read a Hankel matrix from a moment file or from {"hankel": [[...], ...]}.

    An explicit matrix (a perturbed Hankel matrix, say) is screened as given;
    its precision follows the same promotion rule as moments.

    Returns:
        tuple: (HankelMatrix, MomentSequence or None when the matrix was explicit)
    """
    data = load_json(path)
    if isinstance(data, dict) and 'hankel' in data:
        rows = data['hankel']
        if not rows or any(len(row) != len(rows) for row in rows):
            raise InputValidationError(f"{path}: hankel must be a nonempty square matrix")
        flat = [v for row in rows for v in row]
        return hankel_from_entries(rows, auto_mode(flat, mode, auto_extend)), None
    _require(data, ['moments'], path)
    ms = MomentSequence.from_dict(data, mode, auto_extend)
    return hankel(ms), ms


def load_generators(path):
    """
    Read generators for the lattice approximation.

    Accepts {"grid": [...], "generators": [[...], ...]} or a list of
    {"grid": [...], "values": [...]} objects.

    Returns:
        list: SampledFunction generators
    """
    data = load_json(path)
    if isinstance(data, list):
        return [SampledFunction.from_dict(item) for item in data]
    _require(data, ['grid', 'generators'], path)
    return [SampledFunction(data['grid'], values) for values in data['generators']]


def show_moment_summary(ms, rows=5):
    """
    Display the first and last moments with the sequence's degree and precision.

    Args:
        ms (MomentSequence): The moments to summarize
        rows (int): Number of head/tail rows
    """
    frame = pd.DataFrame({'k': range(len(ms)), 's_k': [to_float(s) for s in ms.moments]})
    print("\n" + "="*80)
    print("MOMENT SUMMARY")
    print("="*80)

    print(f"\nDegree d:       {ms.degree}")
    print(f"Moments loaded: {len(ms)}")
    print(f"Precision:      {ms.mode.tag}")

    print("\n" + "-"*80)
    print(f"HEAD (First {rows} moments):")
    print("-"*80)
    print(frame.head(rows).to_string(index=False))

    print("\n" + "-"*80)
    print(f"TAIL (Last {rows} moments):")
    print("-"*80)
    print(frame.tail(rows).to_string(index=False))


def show_sequence_summary(seq):
    """Display grid span, member count and per-member sup norms of a sampled sequence."""
    matrix = seq.matrix
    frame = pd.DataFrame({
        'n': range(1, len(seq) + 1),
        'sup|g_n|': abs(matrix).max(axis=1),
    })
    print("\n" + "="*80)
    print("SEQUENCE SUMMARY")
    print("="*80)
    print(f"Grid points: {len(seq.grid)} on [{seq.grid[0]:g}, {seq.grid[-1]:g}]")
    print(f"Members:     {len(seq)}")
    print(f"Dominator:   {'given' if seq.dominator is not None else 'envelope of |g_n|'}")
    print("\n" + frame.head().to_string(index=False))
    print("...")
    print(frame.tail().to_string(index=False))
