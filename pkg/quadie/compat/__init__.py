from pandas.api.types import is_list_like, is_number

try:
    import simplejson as json
except ImportError:
    import json

try:
    from numpy import trapezoid
except ImportError:  # numpy < 2.0
    from numpy import trapz as trapezoid

__all__ = [
    "is_list_like",
    "is_number",
    "json",
    "trapezoid",
]
