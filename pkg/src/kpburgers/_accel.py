"""Select the compiled trig-sum kernel, falling back to NumPy.

Set ``KPB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _trigsum_py

BACKEND = "python"
trig_sum = _trigsum_py.trig_sum

if os.environ.get("KPB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._trigsum import trig_sum  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass
