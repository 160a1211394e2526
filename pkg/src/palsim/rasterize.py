"""Raster kernel selection: compiled extension when built, pure Python otherwise.

``palsim bench render`` compares the two backends; tests assert they agree
byte-for-byte whenever the compiled one is available.
"""

from . import _rasterize_py

try:
    from . import _rasterize as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def fill_raster(cells: bytes, grid_w: int, grid_d: int,
                out_w: int, out_h: int, backend: str | None = None) -> bytearray:
    """Nearest-neighbor scale of a (grid_d x grid_w) RGB cell grid.

    Returns a row-major RGB buffer of out_h * out_w * 3 bytes. *backend*
    forces "python" or "compiled" (benchmarks); default picks the best
    available.
    """
    out = bytearray(out_h * out_w * 3)
    use = BACKEND if backend is None else backend
    if use == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled raster kernel is not built")
        _compiled.fill_raster(cells, grid_w, grid_d, out, out_w, out_h)
    elif use == "python":
        _rasterize_py.fill_raster(cells, grid_w, grid_d, out, out_w, out_h)
    else:
        raise ValueError(f"unknown raster backend: {use}")
    return out


def available_backends() -> list[str]:
    backends = ["python"]
    if _compiled is not None:
        backends.insert(0, "compiled")
    return backends
