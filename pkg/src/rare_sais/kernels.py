"""Backend selection for the hot kernels.

The compiled core is used when it imports; set ``RARE_SAIS_PURE=1`` to
force the numpy fallback. Both backends agree to floating-point rounding,
not bit-for-bit, so determinism guarantees hold per backend.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("RARE_SAIS_PURE"):
        raise ImportError("pure backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "numpy"


def _as_batch(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def s1(x, c):
    return _impl.s1(_as_batch(x), float(c))


def s2(x, a, b):
    return _impl.s2(_as_batch(x), float(a), float(b))


def s3(x):
    return _impl.s3(_as_batch(x))


def s4(x, gamma):
    return _impl.s4(_as_batch(x), float(gamma))


# above this dimension the BLAS triangular solve beats the compiled loop
COMPILED_LOGPDF_MAX_DIM = 32


def component_logpdf(x, means, chols):
    impl = _impl if means.shape[-1] <= COMPILED_LOGPDF_MAX_DIM else _pykernels
    return impl.component_logpdf(_as_batch(x), _as_batch(means), _as_batch(chols))
