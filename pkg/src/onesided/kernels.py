"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure Python
module is used. Set ONESIDED_PURE_PYTHON=1 to force the fallback.
"""
import os

from . import _pykernels

FREE = -1

_compiled = None
if not os.environ.get("ONESIDED_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"

matching_cover = _impl.matching_cover
assign_combos = _impl.assign_combos
uncolor_fixpoint = _impl.uncolor_fixpoint
safe_recolor_fixpoint = _impl.safe_recolor_fixpoint


def backends():
    """Map of available backend name -> module (used by tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _kernels  # type: ignore[attr-defined]
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
