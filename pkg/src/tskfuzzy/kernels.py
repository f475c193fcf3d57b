"""Backend selection for the batched forward/backward kernels.

The compiled extension is used when it imports; otherwise the NumPy version.
Set ``TSKFUZZY_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
forward = _kernels_py.forward
value_and_grad = _kernels_py.value_and_grad

if os.environ.get("TSKFUZZY_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        forward = _compiled.forward
        value_and_grad = _compiled.value_and_grad
