"""Pick the compiled kernels when they built, else the numpy ones.

Set ``HAARLAB_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
module in use; ``backends()`` returns every importable one (tests and the
benchmark compare them).
"""

import os

from . import _pykernels

_compiled = None
if os.environ.get("HAARLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"

convolve_mod_1d = _impl.convolve_mod_1d
convolve_mod_2d = _impl.convolve_mod_2d
lca_step_1d = _impl.lca_step_1d
transfer_forward = _impl.transfer_forward


def backends():
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
