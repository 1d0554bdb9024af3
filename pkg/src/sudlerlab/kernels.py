"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SUDLERLAB_PURE`` is set to a non-empty value other
than ``0``, the pure-Python fallback is used.  ``BACKEND`` names the choice.
"""

import os

from . import _pykernels

_force_pure = os.environ.get("SUDLERLAB_PURE", "") not in ("", "0")

try:
    if _force_pure:
        raise ImportError("pure backend forced")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

fill_orbit = _impl.fill_orbit
eval_terms = _impl.eval_terms
compensated_prefix = _impl.compensated_prefix

SUMMAND_CODES = {"log_sudler": 0, "log_diophantine": 1, "sawtooth": 2, "indicator": 3}


def backends():
    """Mapping of available backend names to kernel modules."""
    found = {"python": _pykernels}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
