"""Selects the coordinate-descent backend at import.

The compiled extension is used when it was built; setting the environment
variable ``LASSO_TRADEOFF_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

from . import _cd_py

BACKEND = "python"
cd_sweeps = _cd_py.cd_sweeps

if not os.environ.get("LASSO_TRADEOFF_PURE_PYTHON"):
    try:
        from ._cd_kernel import cd_sweeps  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

python_cd_sweeps = _cd_py.cd_sweeps
