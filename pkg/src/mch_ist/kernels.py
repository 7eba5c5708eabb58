"""Hot-loop selection: the compiled extension when it was built, numpy otherwise.

Set MCH_IST_PURE=1 to force the numpy path.
"""
import os

from . import _fallback

BACKEND = "numpy"
_compiled = None
if os.environ.get("MCH_IST_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled

        BACKEND = "cython"
    except ImportError:
        _compiled = None


THREADS = int(os.environ.get("MCH_IST_THREADS", "1"))


def set_threads(n):
    global THREADS
    THREADS = max(1, int(n))


def jost_rk4(z, m, mx, q, step, record_every=0, backend=None):
    import numpy as np

    use = backend or BACKEND
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled.jost_rk4(
            np.ascontiguousarray(z, dtype=np.complex128),
            np.ascontiguousarray(m, dtype=float),
            np.ascontiguousarray(mx, dtype=float),
            np.ascontiguousarray(q, dtype=float),
            float(step),
            int(record_every),
            THREADS,
        )
    return _fallback.jost_rk4(z, m, mx, q, step, record_every)
