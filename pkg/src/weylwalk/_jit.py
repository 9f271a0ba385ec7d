"""numba availability and the WEYLWALK_JIT switch.

Set ``WEYLWALK_JIT=0`` to force the pure-numpy kernels (useful for
debugging and for machines without numba).
"""

import os

_flag = os.environ.get("WEYLWALK_JIT", "1").strip().lower()
JIT_REQUESTED = _flag not in ("0", "false", "no", "off")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAVE_NUMBA = False

    def njit(func=None, **kwargs):
        if func is not None:
            return func
        return lambda f: f


JIT_ENABLED = JIT_REQUESTED and HAVE_NUMBA
