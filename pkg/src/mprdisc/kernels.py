"""Backend selection for the subset-enumeration kernel.

The compiled Cython extension is used when it was built; otherwise the numpy
implementation is used. Set ``MPRDISC_PURE_PYTHON=1`` to force the fallback.
"""
import math
import os

import numpy as np

from mprdisc import _enumerate_py

_compiled = None
if os.environ.get("MPRDISC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from mprdisc import _enumerate as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

_BACKENDS = {"python": _enumerate_py.subset_log_marginals}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled.subset_log_marginals


def available_backends():
    return tuple(_BACKENDS)


def subset_log_marginals(y, signatures, amplitudes, noise, backend=None):
    """Log marginal likelihood of ``y`` for every subset of signature rows.

    For each bitmask the Gaussian likelihood (noise variance ``noise`` per chip)
    is averaged over all assignments of ``amplitudes`` to the subset's members,
    each assignment equally weighted.
    """
    if noise <= 0:
        raise ValueError("noise power must be positive")
    fn = _BACKENDS.get(backend or BACKEND)
    if fn is None:
        raise ValueError(f"unknown backend {backend!r}; available: {available_backends()}")
    y = np.asarray(y)
    if np.iscomplexobj(y):
        raise ValueError("set-valued detection requires a real received vector")
    S = np.ascontiguousarray(signatures, dtype=float)
    scale = 1.0 / math.sqrt(noise)
    yw = y.astype(float) * scale
    aw = np.ascontiguousarray(amplitudes, dtype=float) * scale
    corr = np.ascontiguousarray(S @ yw)
    gram = np.ascontiguousarray(S @ S.T)
    L = S.shape[1]
    return fn(corr, gram, float(yw @ yw), aw) - 0.5 * L * math.log(2 * math.pi * noise)
