"""Alignment kernels: compiled fast path with a pure-Python fallback.

At import time the compiled extension is preferred; if it is unavailable
(e.g. no C compiler at install time) the pure-Python twin is used instead.
Both produce bit-identical results; the compiled kernel is simply faster
and releases the GIL, enabling thread parallelism over alignments.

``BACKEND`` names the selected default ("compiled" or "pure");
``get_backend`` fetches a specific implementation, which the benchmark
script uses to compare the two.
"""

from __future__ import annotations

from types import ModuleType

from . import _dtw_py

try:  # pragma: no cover - depends on build environment
    from . import _dtw_cy  # type: ignore[attr-defined]

    BACKEND = "compiled"
    _default = _dtw_cy
except ImportError:  # pragma: no cover
    _dtw_cy = None  # type: ignore[assignment]
    BACKEND = "pure"
    _default = _dtw_py

align = _default.align


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name``.

    Args:
        name: "compiled", "pure", or None/"auto" for the import-time default.

    Raises:
        ValueError: unknown backend name.
        RuntimeError: "compiled" requested but the extension is not built.
    """
    if name is None or name == "auto":
        return _default
    if name == "pure":
        return _dtw_py
    if name == "compiled":
        if _dtw_cy is None:
            raise RuntimeError("compiled kernel is not available in this installation")
        return _dtw_cy
    raise ValueError(f"unknown kernel backend '{name}' (choose compiled, pure, or auto)")
