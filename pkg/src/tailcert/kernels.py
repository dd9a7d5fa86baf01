"""Select the compiled kernels when available, else the numpy versions.

Set ``TAILCERT_KERNELS=python`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
refine_pass = _pykernels.refine_pass
box_sum = _pykernels.box_sum
monotone_closure = _pykernels.monotone_closure

if os.environ.get("TAILCERT_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        refine_pass = _ckernels.refine_pass
        box_sum = _ckernels.box_sum
