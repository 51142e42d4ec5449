"""Select the CART growth kernel at import: compiled if available, else pure Python.

Set ``SYNUTIL_PURE=1`` to force the pure-Python kernel.
"""
import os

from . import _cart_py

try:
    from . import _cart_ext
except ImportError:  # extension not built
    _cart_ext = None

_BACKENDS = {"python": _cart_py.grow_tree}
if _cart_ext is not None:
    _BACKENDS["cython"] = _cart_ext.grow_tree

if os.environ.get("SYNUTIL_PURE", "") not in ("", "0") or _cart_ext is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


def available_backends():
    return sorted(_BACKENDS)


def grow_tree(*args, backend=None):
    return _BACKENDS[backend or BACKEND](*args)
