# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled raster kernel: nearest-neighbor scale of a cell-color grid.

Byte-for-byte equivalent to the pure-Python kernel in ``_rasterize_py``.
"""


def fill_raster(const unsigned char[::1] cells, int grid_w, int grid_d,
                unsigned char[::1] out, int out_w, int out_h):
    """Scale a (grid_d x grid_w) RGB cell grid into an (out_h x out_w) buffer."""
    cdef int px, py, cz, cx, src, dst
    for py in range(out_h):
        cz = (py * grid_d) / out_h
        for px in range(out_w):
            cx = (px * grid_w) / out_w
            src = (cz * grid_w + cx) * 3
            dst = (py * out_w + px) * 3
            out[dst] = cells[src]
            out[dst + 1] = cells[src + 1]
            out[dst + 2] = cells[src + 2]
