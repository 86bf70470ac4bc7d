"""
Deterministic writers for run results.

Machine documents are JSON with sorted keys and full float precision;
non-finite floats become null. Tables are CSV with 17 significant digits.
"""

import math
import os

import numpy as np

from quadie.compat import json

FLOAT_FORMAT = "%.17g"


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps(doc):
    """Serialize ``doc`` to a stable JSON string"""
    return json.dumps(_to_builtin(doc), sort_keys=True, indent=2) + "\n"


def write_json(doc, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))
    return path


def _target(directory, name):
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


def write_solution_csv(solution, directory, name="solution.csv"):
    """Columns x, u1 ... uN of the full solution u"""
    path = _target(directory, name)
    solution.u.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_trace_csv(trace, directory, name="trace.csv"):
    """Columns k, delta, ratio, norm"""
    path = _target(directory, name)
    trace.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
