"""Hot-loop kernels with a compiled fast path and a numpy fallback.

The compiled extension (Cython) is selected at import when available; set
TABMARK_PURE_PYTHON=1 to force the numpy fallback. Both backends are
bit-identical, see tests/test_kernels.py.
"""

import os

from . import numpy_backend

if os.environ.get("TABMARK_PURE_PYTHON"):
    _impl = numpy_backend
else:
    try:
        from . import _fastpath as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = numpy_backend

BACKEND = _impl.BACKEND
embed_feature = _impl.embed_feature
decode_feature = _impl.decode_feature

__all__ = ["BACKEND", "embed_feature", "decode_feature", "numpy_backend"]
