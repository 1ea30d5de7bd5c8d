"""Hot-loop kernels with two interchangeable backends.

The compiled extension is preferred when present; otherwise the numpy
fallback is used. Both backends implement the same two functions and must
return identical values on identical inputs (the test suite checks this).
Set ``HASHTRICK_BACKEND=python`` or ``=compiled`` to force a choice.
"""

import os

from . import pure

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None


def available_backends() -> tuple[str, ...]:
    if _compiled is not None:
        return ("compiled", "python")
    return ("python",)


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: env var, then best)."""
    if name is None:
        name = os.environ.get("HASHTRICK_BACKEND")
    if name is None:
        return _compiled if _compiled is not None else pure
    if name == "python":
        return pure
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


_active = get_backend()
BACKEND = "python" if _active is pure else "compiled"

dtab_hash_batch = _active.dtab_hash_batch
run_cell = _active.run_cell
