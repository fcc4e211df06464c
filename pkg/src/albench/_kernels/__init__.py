"""Tree-growing kernels.

The compiled extension ``_tree_ext`` is used when it has been built; otherwise
the numpy implementation in ``_tree_py`` is selected at import. Setting
``ALBENCH_PURE_PYTHON=1`` forces the fallback. Both grow identical trees.
"""

import importlib
import os

from . import _tree_py


def load_backend(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _tree_py
    if name == "compiled":
        return importlib.import_module("albench._kernels._tree_ext")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("ALBENCH_PURE_PYTHON", "") not in ("", "0"):
        return "python", _tree_py
    try:
        return "compiled", load_backend("compiled")
    except ImportError:
        return "python", _tree_py


BACKEND, _impl = _select()
build_tree = _impl.build_tree
apply_tree = _impl.apply_tree

__all__ = ["BACKEND", "build_tree", "apply_tree", "load_backend"]
