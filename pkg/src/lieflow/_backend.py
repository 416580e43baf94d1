"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise
the pure-Python kernels take over with identical semantics.  Set
``LIEFLOW_PURE_PYTHON=1`` to force the fallback (the benchmark uses this
to compare the two).
"""

import os

if os.environ.get("LIEFLOW_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"
