"""Kernel backend selection.

The compiled extension is used when it imports; set
``FREDHOLM_LATTICE_PURE=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

kahan_matvec_python = _pykernels.kahan_matvec
kahan_matvec_compiled = None

if os.environ.get("FREDHOLM_LATTICE_PURE", "").lower() not in ("1", "true", "yes"):
    try:
        from ._ckernels import kahan_matvec as kahan_matvec_compiled
    except ImportError:
        kahan_matvec_compiled = None

if kahan_matvec_compiled is not None:
    BACKEND = "compiled"
    kahan_matvec = kahan_matvec_compiled
else:
    BACKEND = "python"
    kahan_matvec = kahan_matvec_python


def default_threads() -> int:
    return os.cpu_count() or 1
