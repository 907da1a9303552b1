"""Select the compiled assembly kernel, falling back to pure Python.

Set ``DWELL_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _assemble_py

BACKEND = "python"
assemble = _assemble_py.assemble

if os.environ.get("DWELL_PURE_PYTHON") != "1":
    try:
        from ._assemble import assemble  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass
