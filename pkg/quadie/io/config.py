"""
Problem documents.

A problem is one JSON object::

    {
      "N": 1,
      "grid": {"L": 20, "n": 4096},
      "kernels": ["exp(-abs(x))"],
      "multipliers": ["0.02"],
      "initial": ["0.01*exp(-x^2)"],
      "g": ["u1^2"],
      "rho": 1,
      "options": {"c_a": 1.5811, "M_override": null,
                  "safety_factor": 1.05, "tail_tolerance": 1e-6}
    }

``options`` and each of its keys are optional. Other top level keys, such as
a second nonlinearity ``g2`` for sensitivity runs, are returned as extras.
"""

import os

from quadie.compat import is_list_like, is_number, json
from quadie.exceptions import ConfigError
from quadie.exprlang import parse
from quadie.grid import GridFunction, make_grid
from quadie.io.util import _read_content
from quadie.problem import ProblemSpec

_REQUIRED = ("N", "grid", "kernels", "multipliers", "initial", "g", "rho")
_OPTIONS = ("c_a", "M_override", "safety_factor", "tail_tolerance")


def _expressions(doc, key, N):
    items = doc[key]
    if not is_list_like(items) or isinstance(items, (str, dict)):
        raise ConfigError(f"'{key}' must be a list of expression strings")
    items = list(items)
    if len(items) != N:
        raise ConfigError(f"'{key}' has {len(items)} entries, expected N = {N}")
    out = []
    for m, item in enumerate(items):
        if is_number(item) and not isinstance(item, bool):
            item = repr(float(item))
        if not isinstance(item, str):
            raise ConfigError(f"'{key}[{m}]' must be a string, not {item!r}")
        out.append(parse(item))
    return tuple(out)


def _number(value, name):
    if isinstance(value, bool) or not is_number(value):
        raise ConfigError(f"'{name}' must be a number, not {value!r}")
    return value


def _decode(path_or_buf):
    if isinstance(path_or_buf, os.PathLike):
        path_or_buf = os.fspath(path_or_buf)
    if (
        isinstance(path_or_buf, str)
        and not path_or_buf.lstrip().startswith(("{", "["))
        and not os.path.exists(path_or_buf)
    ):
        raise ConfigError(f"no such problem file: {path_or_buf}")
    content = _read_content(path_or_buf)
    if isinstance(content, dict):
        return content
    try:
        doc = json.loads(content)
    except ValueError as err:
        raise ConfigError(f"invalid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError("a problem document must be a JSON object")
    return doc


def read_problem(path_or_buf):
    """
    Read a problem document

    Parameters
    ----------
    path_or_buf : path, JSON string, file-like or dict

    Returns
    -------
    problem : ProblemSpec
    extras : dict
        Top level keys not used by the problem itself; ``g2`` is parsed into
        a tuple of expressions.

    Raises
    ------
    ConfigError
        Missing or malformed entries.
    ParseError
        An expression string does not parse.
    """
    doc = _decode(path_or_buf)
    missing = [key for key in _REQUIRED if key not in doc]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")

    N = doc["N"]
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ConfigError(f"'N' must be a positive integer, not {N!r}")
    grid_doc = doc["grid"]
    if not isinstance(grid_doc, dict) or not {"L", "n"} <= set(grid_doc):
        raise ConfigError("'grid' must hold 'L' and 'n'")
    try:
        grid = make_grid(_number(grid_doc["L"], "grid.L"), grid_doc["n"])
    except (TypeError, ValueError) as err:
        raise ConfigError(f"grid: {err}") from err

    options = doc.get("options") or {}
    if not isinstance(options, dict):
        raise ConfigError("'options' must be an object")
    unknown = set(options) - set(_OPTIONS)
    if unknown:
        raise ConfigError(f"unknown options: {', '.join(sorted(unknown))}")
    kwargs = {
        key: _number(value, f"options.{key}")
        for key, value in options.items()
        if value is not None
    }

    try:
        problem = ProblemSpec(
            N=N,
            grid=grid,
            kernels=_expressions(doc, "kernels", N),
            multipliers=_expressions(doc, "multipliers", N),
            initial=_expressions(doc, "initial", N),
            nonlinearity=_expressions(doc, "g", N),
            rho=_number(doc["rho"], "rho"),
            **kwargs,
        )
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError) or type(err).__module__ != "builtins":
            raise
        raise ConfigError(str(err)) from err

    extras = {key: value for key, value in doc.items() if key not in _REQUIRED}
    extras.pop("options", None)
    if "g2" in extras:
        extras["g2"] = _expressions(doc, "g2", N)
    return problem, extras


def problem_to_dict(p, extras=None):
    """Inverse of :func:`read_problem` for problems defined by expressions"""
    fields = {}
    for key, items in (
        ("kernels", p.kernels),
        ("multipliers", p.multipliers),
        ("initial", p.initial),
        ("g", p.nonlinearity),
    ):
        if any(isinstance(item, GridFunction) for item in items):
            raise ConfigError(f"'{key}' holds sampled data")
        fields[key] = [str(item) for item in items]
    doc = {
        "N": p.N,
        "grid": {"L": p.grid.L, "n": p.grid.n},
        **fields,
        "rho": p.rho,
        "options": {
            "c_a": p.c_a,
            "M_override": p.M_override,
            "safety_factor": p.safety_factor,
            "tail_tolerance": p.tail_tolerance,
        },
    }
    for key, value in (extras or {}).items():
        if key == "g2":
            value = [str(e) for e in value]
        doc[key] = value
    return doc
