"""
Uniform truncated grids on the real line and functions sampled on them.

Two lattices share one GridSpec: the node lattice ``x_i = -L + i*h`` on which
solutions and data live, and the centered lag lattice ``(i - n/2)*h`` on which
convolution kernels are sampled. n is even, so only the lag lattice contains 0.
"""

from collections import namedtuple
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from pandas import DataFrame

from quadie._utils import _init_rng, _sanitize_positive
from quadie.compat import is_number, trapezoid
from quadie.exceptions import GridMismatchError
from quadie.exprlang import evaluate, variables

MIN_POINTS = 16
DEFAULT_TAIL_TOLERANCE = 1e-6
# share of nodes on each side counted as tail by truncation_diagnostic
TAIL_SHARE = 0.05

TruncationDiagnostic = namedtuple(
    "TruncationDiagnostic", ["boundary_max", "tail_fraction"]
)


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform grid on [-L, L]

    Parameters
    ----------
    L : float
        Half width, > 0.
    n : int
        Number of nodes, even and >= 16. Powers of two keep the padded FFT
        length minimal.
    """

    L: float
    n: int

    @property
    def half_width(self):
        return self.L

    @property
    def points(self):
        return self.n

    @property
    def h(self):
        return 2.0 * self.L / (self.n - 1)

    @property
    def mid(self):
        """Index of lag 0 on the centered lattice"""
        return self.n // 2

    @cached_property
    def nodes(self):
        out = np.linspace(-self.L, self.L, self.n)
        out.flags.writeable = False
        return out

    @cached_property
    def lags(self):
        out = (np.arange(self.n) - self.mid) * self.h
        out.flags.writeable = False
        return out

    def coordinates(self, centered=False):
        return self.lags if centered else self.nodes

    def refined(self, factor):
        """Points of the grid refined ``factor`` times, endpoints included"""
        return np.linspace(-self.L, self.L, factor * (self.n - 1) + 1)


def make_grid(L, n):
    """
    Build a GridSpec

    Parameters
    ----------
    L : float
        Half width of the truncated domain, > 0.
    n : int
        Even number of nodes, >= 16.

    Returns
    -------
    GridSpec
    """
    L = _sanitize_positive(L, "L")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"n must be an integer, not {n!r}")
    n = int(n)
    if n < MIN_POINTS:
        raise ValueError(f"n must be >= {MIN_POINTS}, not {n}")
    if n % 2:
        raise ValueError(f"n must be even, not {n}")
    return GridSpec(L, n)


class GridFunction:
    """
    Samples of a real function on a grid

    Parameters
    ----------
    grid : GridSpec
    values : array-like
        ``grid.n`` finite reals.
    centered : bool, default False
        True when the samples live on the lag lattice.
    """

    __array_priority__ = 100

    def __init__(self, grid, values, centered=False):
        if not isinstance(grid, GridSpec):
            raise TypeError(f"grid must be a GridSpec, not {type(grid).__name__}")
        values = np.array(values, dtype=float)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"values must be finite (element {bad})")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.centered = bool(centered)

    def __repr__(self):
        lattice = "lags" if self.centered else "nodes"
        return f"GridFunction(L={self.grid.L}, n={self.grid.n}, {lattice})"

    def __len__(self):
        return self.grid.n

    @property
    def x(self):
        return self.grid.coordinates(self.centered)

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")
        if other.centered != self.centered:
            raise GridMismatchError("cannot combine node and lag lattice samples")

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            self._check(other)
            other = other.values
        elif not is_number(other):
            return NotImplemented
        return GridFunction(self.grid, op(self.values, other), self.centered)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not is_number(other):
            return NotImplemented
        return GridFunction(self.grid, self.values / other, self.centered)

    def __neg__(self):
        return GridFunction(self.grid, -self.values, self.centered)

    def to_frame(self):
        return DataFrame({"x": self.x, "value": self.values})

    def to_csv(self, path_or_buf=None):
        """Write columns x,value; returns the text when no target is given"""
        return self.to_frame().to_csv(path_or_buf, index=False, float_format="%.17g")


class VectorGridFunction:
    """
    N-component bundle of GridFunctions on one grid

    Parameters
    ----------
    components : sequence of GridFunction
        At least one, all on the same grid and node lattice.
    """

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("a VectorGridFunction needs at least one component")
        first = components[0]
        for comp in components:
            if not isinstance(comp, GridFunction):
                raise TypeError(f"components must be GridFunctions, not {comp!r}")
            first._check(comp)
        self.components = components

    @classmethod
    def from_array(cls, grid, values, centered=False):
        """Build from an (N, n) array, one row per component"""
        values = np.atleast_2d(np.asarray(values, dtype=float))
        return cls(GridFunction(grid, row, centered) for row in values)

    @classmethod
    def zeros(cls, grid, N):
        return cls.from_array(grid, np.zeros((N, grid.n)))

    def __repr__(self):
        return f"VectorGridFunction(N={self.N}, L={self.grid.L}, n={self.grid.n})"

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, item):
        return self.components[item]

    @property
    def N(self):
        return len(self.components)

    @property
    def grid(self):
        return self.components[0].grid

    @property
    def x(self):
        return self.components[0].x

    @property
    def values(self):
        """(N, n) array of samples"""
        return np.vstack([comp.values for comp in self.components])

    def _binary(self, other, op):
        if isinstance(other, VectorGridFunction):
            if other.N != self.N:
                raise GridMismatchError(f"component counts differ: {self.N}, {other.N}")
            return VectorGridFunction(op(a, b) for a, b in zip(self, other))
        if not is_number(other):
            return NotImplemented
        return VectorGridFunction(op(a, other) for a in self)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorGridFunction(-comp for comp in self)

    def to_frame(self):
        data = {"x": self.x}
        for k, comp in enumerate(self.components, start=1):
            data[f"u{k}"] = comp.values
        return DataFrame(data)

    def to_csv(self, path_or_buf=None):
        return self.to_frame().to_csv(path_or_buf, index=False, float_format="%.17g")


def sample(e, grid, centered=False):
    """
    Sample an expression in ``x`` on the grid

    Parameters
    ----------
    e : Expr
    grid : GridSpec
    centered : bool, default False
        Sample on the lag lattice instead of the nodes (used for kernels).

    Returns
    -------
    GridFunction

    Raises
    ------
    ExprDomainError
        With ``index`` set to the first offending node.
    """
    extra = variables(e) - {"x"}
    if extra:
        raise ValueError(f"expression may only use x, found {sorted(extra)}")
    x = grid.coordinates(centered)
    values = evaluate(e, {"x": x})
    return GridFunction(grid, np.broadcast_to(values, x.shape), centered)


def derivative(f):
    """
    Second-order finite difference derivative

    Central differences at interior nodes and second-order one-sided stencils
    at both ends.
    """
    return GridFunction(f.grid, _gradient(f.values, f.grid.h), f.centered)


def _gradient(values, h):
    """Row-wise derivative samples of a (..., n) array"""
    return np.gradient(values, h, axis=-1, edge_order=2)


def truncation_diagnostic(f):
    """
    Measure how much of ``f`` sits near the ends of the truncated domain

    Returns
    -------
    TruncationDiagnostic
        ``boundary_max`` is the larger end value in absolute terms,
        ``tail_fraction`` the trapezoid L2 mass of the outer 5% of nodes on
        each side over the total mass (0 for the zero function).
    """
    values = f.values
    h = f.grid.h
    sq = values * values
    k = max(2, math.ceil(TAIL_SHARE * len(values)))
    total = trapezoid(sq, dx=h)
    if total == 0:
        tail = 0.0
    else:
        tail = (trapezoid(sq[:k], dx=h) + trapezoid(sq[-k:], dx=h)) / total
    boundary = max(abs(values[0]), abs(values[-1]))
    return TruncationDiagnostic(float(boundary), float(tail))


def random_mixture(grid, seed=None, terms=3, centered=False):
    """
    Random Gaussian mixture that decays well inside the grid

    Centers are drawn from [-L/4, L/4] and widths from [L/40, L/10], so the
    samples at the ends stay below about 1e-12 of the peak.

    Parameters
    ----------
    grid : GridSpec
    seed : None, int or numpy.random.Generator
    terms : int, default 3
    centered : bool, default False
    """
    rng = _init_rng(seed)
    L = grid.L
    x = grid.coordinates(centered)
    amplitudes = rng.uniform(-1.0, 1.0, terms)
    centers = rng.uniform(-L / 4, L / 4, terms)
    widths = rng.uniform(L / 40, L / 10, terms)
    values = np.zeros(grid.n)
    for a, c, s in zip(amplitudes, centers, widths):
        values += a * np.exp(-0.5 * ((x - c) / s) ** 2)
    return GridFunction(grid, values, centered)
