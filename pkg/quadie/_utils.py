import logging
import time

import numpy as np
import wrapt

from quadie.compat import is_number

logger = logging.getLogger(__name__)


def _init_rng(seed):
    """
    Return a numpy Generator for ``seed``

    Parameters
    ----------
    seed : {None, int, numpy.random.Generator}
        Generators are passed through untouched so callers can share a stream.
    """
    if seed is None or isinstance(seed, (int, np.integer)):
        return np.random.default_rng(seed)
    if not isinstance(seed, np.random.Generator):
        raise TypeError("seed must be None, an int or a numpy.random.Generator")
    return seed


def _sanitize_positive(value, name, allow_zero=False):
    """Return ``value`` as float after checking it is finite and positive"""
    if not is_number(value) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, not {value!r}")
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, not {value!r}")
    return value


def timed(wrapped=None, *, label=None):
    """
    Record the wall time of a call on the returned object

    a signature-preserving decorator; the result gains a ``seconds`` attribute
    when it accepts one, and the duration is logged at DEBUG level.
    """
    if wrapped is None:
        return lambda fn: timed(fn, label=label)

    @wrapt.decorator
    def wrapper(wrapped, instance, args, kwargs):
        start = time.perf_counter()
        out = wrapped(*args, **kwargs)
        elapsed = time.perf_counter() - start
        logger.debug("%s took %.3fs", label or wrapped.__name__, elapsed)
        try:
            out.seconds = elapsed
        except AttributeError:
            pass
        return out

    return wrapper(wrapped)
