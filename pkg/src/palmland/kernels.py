"""Backend selection for the physics hot loop.

Prefers the compiled extension when it was built, otherwise falls back to the
pure-Python twin. Set PALMLAND_PURE_PY=1 to force the fallback (used by the
parity tests and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("PALMLAND_PURE_PY"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

physics_run = _impl.physics_run
BACKEND: str = _impl.BACKEND
GRAVITY: float = 9.81


def load_backends() -> dict:
    """All importable kernel backends, keyed by name (for benchmarks/tests)."""
    from . import _kernels_py

    backends = {_kernels_py.BACKEND: _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        backends[_kernels.BACKEND] = _kernels
    except ImportError:
        pass
    return backends
