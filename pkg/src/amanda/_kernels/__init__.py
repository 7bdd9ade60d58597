"""Hot-kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise the
numpy fallback takes over.  Set AMANDA_KERNEL_BACKEND=numpy (or =cython)
to force a choice; forcing cython when the extension is missing raises,
so CI can assert the compiled path is actually exercised.
"""

import os

from . import numpy_backend

_forced = os.environ.get("AMANDA_KERNEL_BACKEND", "").strip().lower()

if _forced == "numpy":
    _backend = numpy_backend
elif _forced == "cython":
    from . import _cykernels as _backend  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _cykernels as _backend
    except ImportError:
        _backend = numpy_backend

BACKEND = _backend.NAME

gru_gates_forward = _backend.gru_gates_forward
gru_gates_backward = _backend.gru_gates_backward
overlap_add = _backend.overlap_add
