"""Select the compiled kernel when available, else the NumPy fallback.

Set ``SURVWAVE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
dl_values = _pykernels.dl_values

if os.environ.get("SURVWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        dl_values = _ckernels.dl_values


def available_backends():
    names = {"python": _pykernels.dl_values}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        names["cython"] = _ckernels.dl_values
    return names
