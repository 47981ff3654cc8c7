"""Select the march implementation at import time.

The compiled extension is preferred; set BCWAVE_BACKEND=python to force
the numpy fallback (used by the benchmark and as a safety net where the
extension was not built).
"""

import os

_forced = os.environ.get("BCWAVE_BACKEND", "").lower()

if _forced == "python":
    from ._march_py import march

    BACKEND = "python"
elif _forced in ("", "cython"):
    try:
        from ._march import march

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        from ._march_py import march

        BACKEND = "python"
else:
    raise ValueError("BCWAVE_BACKEND must be 'cython' or 'python'")

__all__ = ["march", "BACKEND"]
