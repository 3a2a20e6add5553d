"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python mirror when the
build is absent or SIZEDIST_PURE_PYTHON=1 is set in the environment.
"""

from __future__ import annotations

import os

if os.environ.get("SIZEDIST_PURE_PYTHON", "") == "1":
    from . import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels

        COMPILED = False


def backend_name() -> str:
    return "compiled" if COMPILED else "pure-python"
