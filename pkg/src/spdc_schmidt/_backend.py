"""Select the compiled Jacobi kernel when available, else the numpy fallback.

Set ``SPDC_SCHMIDT_BACKEND=python`` to force the fallback.
"""
import os

from . import _jacobi_py

BACKEND = "python"
one_sided_jacobi = _jacobi_py.one_sided_jacobi

if os.environ.get("SPDC_SCHMIDT_BACKEND", "").lower() != "python":
    try:
        from . import _jacobi
    except ImportError:  # extension not built
        pass
    else:
        one_sided_jacobi = _jacobi.one_sided_jacobi
        BACKEND = "cython"

__all__ = ["BACKEND", "one_sided_jacobi"]
