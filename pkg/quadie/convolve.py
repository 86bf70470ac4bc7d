"""
Discrete convolution ``(K * f)(x) = int K(x - y) f(y) dy`` on the grid.

Each input lives on the node lattice or the centered lag lattice. The sum of
two lattice offsets is again a lattice: a lag-lattice kernel against node
samples gives node samples, two inputs on the same lattice give lag samples.
Index ``i`` of the output then picks entry ``i + shift`` of the full discrete
linear convolution, with ``shift = n/2`` except for two node-lattice inputs
where it is ``n/2 - 1``.
"""

from collections import namedtuple
import logging

import numpy as np
from scipy import fft

from quadie.exceptions import GridMismatchError
from quadie.grid import GridFunction, derivative
from quadie.norms import norm_l1, norm_l2

logger = logging.getLogger(__name__)

YoungDefect = namedtuple(
    "YoungDefect", ["l2_defect", "deriv_defect", "l2_bound", "deriv_bound"]
)
Spectrum = namedtuple("Spectrum", ["hat", "centered"])


def _padded_length(n):
    """Smallest power of two >= 2n - 1"""
    return 1 << (2 * n - 2).bit_length()


def _shift(grid, kernel_centered, f_centered):
    if not kernel_centered and not f_centered:
        return grid.mid - 1
    return grid.mid


def _layout(K, f):
    if K.grid != f.grid:
        raise GridMismatchError(f"grids differ: {K.grid} vs {f.grid}")
    return _shift(K.grid, K.centered, f.centered), K.centered == f.centered


class ConvolutionPlan:
    """
    Reusable FFT set-up for one grid

    Parameters
    ----------
    grid : GridSpec
    circular : bool, default False
        Use transforms of length n without zero padding. The result wraps
        around; only meant for fault injection in the verification suite.
    workers : int, default 1
        Threads used by ``scipy.fft``.
    """

    def __init__(self, grid, circular=False, workers=1):
        self.grid = grid
        self.circular = bool(circular)
        self.workers = int(workers)
        self.size = grid.n if circular else _padded_length(grid.n)
        logger.debug("convolution plan n=%d size=%d", grid.n, self.size)

    def __repr__(self):
        return f"ConvolutionPlan(n={self.grid.n}, size={self.size})"

    def transform(self, K):
        """Spectrum of a kernel, computed once and reused by ``apply``"""
        if K.grid != self.grid:
            raise GridMismatchError(f"grids differ: {K.grid} vs {self.grid}")
        hat = fft.rfft(K.values, n=self.size, workers=self.workers)
        return Spectrum(hat, K.centered)

    def _apply(self, hat, values, shift):
        n = self.grid.n
        full = fft.irfft(
            hat * fft.rfft(values, n=self.size, axis=-1, workers=self.workers),
            n=self.size,
            axis=-1,
            workers=self.workers,
        )
        if self.circular:
            out = np.roll(full, -shift, axis=-1)[..., :n]
        else:
            out = full[..., shift : shift + n]
        return self.grid.h * out

    def apply(self, spectrum, f):
        """
        Convolve a transformed kernel with ``f``

        ``f`` may be a GridFunction or a raw (..., n) array of node samples;
        arrays come back as arrays.
        """
        if isinstance(f, GridFunction):
            if f.grid != self.grid:
                raise GridMismatchError(f"grids differ: {f.grid} vs {self.grid}")
            shift = _shift(self.grid, spectrum.centered, f.centered)
            out = self._apply(spectrum.hat, f.values, shift)
            return GridFunction(self.grid, out, spectrum.centered == f.centered)
        shift = _shift(self.grid, spectrum.centered, False)
        return self._apply(spectrum.hat, np.asarray(f, dtype=float), shift)


def convolve_fft(K, f, circular=False):
    """
    Zero-padded FFT convolution scaled by the grid spacing

    Parameters
    ----------
    K, f : GridFunction
        On the same grid. Kernels are normally sampled on the lag lattice.
    circular : bool, default False
        Fault injection: skip the zero padding.

    Returns
    -------
    GridFunction
    """
    _layout(K, f)
    plan = ConvolutionPlan(K.grid, circular=circular)
    return plan.apply(plan.transform(K), f)


def convolve_direct(K, f):
    """
    Direct O(n^2) summation with trapezoid weights on ``f``

    Serves as the oracle for :func:`convolve_fft`.
    """
    shift, centered = _layout(K, f)
    grid = K.grid
    n = grid.n
    weights = np.ones(n)
    weights[[0, -1]] = 0.5
    fw = f.values * weights
    kv = K.values
    out = np.empty(n)
    for i in range(n):
        top = i + shift
        lo = max(0, top - n + 1)
        hi = min(n, top + 1)
        # kv[top - j] for j = lo .. hi - 1
        out[i] = np.dot(kv[top - hi + 1 : top - lo + 1][::-1], fw[lo:hi])
    return GridFunction(grid, grid.h * out, centered)


def young_defect(K, f, circular=False):
    """
    Defects of the Young bounds for the convolution and its derivative

    Returns
    -------
    YoungDefect
        ``l2_defect = |K*f|_2 - |K|_1 |f|_2`` and
        ``deriv_defect = |(K*f)'|_2 - |K'|_1 |f|_2``, both non-positive when
        the bounds hold, together with the two bounds.
    """
    conv = convolve_fft(K, f, circular=circular)
    f2 = norm_l2(f)
    l2_bound = norm_l1(K) * f2
    deriv_bound = norm_l1(derivative(K)) * f2
    return YoungDefect(
        norm_l2(conv) - l2_bound,
        norm_l2(derivative(conv)) - deriv_bound,
        l2_bound,
        deriv_bound,
    )
