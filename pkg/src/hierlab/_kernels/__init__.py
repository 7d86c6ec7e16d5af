"""Hot-kernel backend selection.

The compiled Cython extension is used when it imports; otherwise the
pure-Python module is used. Setting ``HIERLAB_PURE=1`` forces the fallback.
"""

import logging
import os

from hierlab._kernels import _pure

log = logging.getLogger(__name__)

try:
    from hierlab._kernels import _fast
except ImportError:  # extension not built
    _fast = None

AVAILABLE = {"python": _pure}
if _fast is not None:
    AVAILABLE["cython"] = _fast

if os.environ.get("HIERLAB_PURE", "") not in ("", "0") or _fast is None:
    backend = _pure
else:
    backend = _fast

if _fast is None:
    log.debug("compiled kernels unavailable; using pure-Python fallback")


def use_backend(name):
    """Switch the active backend by name ("cython" or "python"); returns the previous one."""
    global backend
    prev = backend
    try:
        backend = AVAILABLE[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(AVAILABLE)}") from None
    return prev
