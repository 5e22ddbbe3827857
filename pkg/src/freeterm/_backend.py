"""Kernel backend selection.

The compiled extension is preferred; set ``FREETERM_BACKEND=python`` to
force the pure-Python kernels (the test suite runs both).
"""

import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)

_requested = os.environ.get("FREETERM_BACKEND", "auto").lower()

if _requested == "python":
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        logger.debug("compiled kernels unavailable, using pure-Python fallback")
        kernels = _pykernels
        BACKEND = "python"


def compiled_kernels():
    """The compiled kernel module, or ``None`` when it was not built."""
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels
