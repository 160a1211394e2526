"""Pure-Python raster kernel: nearest-neighbor scale of a cell-color grid.

Fallback for the compiled kernel in ``_rasterize.pyx``; both must produce
identical bytes for identical inputs.
"""


def fill_raster(cells: bytes, grid_w: int, grid_d: int,
                out: bytearray, out_w: int, out_h: int) -> None:
    """Scale a (grid_d x grid_w) RGB cell grid into an (out_h x out_w) buffer.

    *cells* is row-major by z then x, 3 bytes per cell; *out* is row-major
    RGB, len out_h * out_w * 3. Output pixel (px, py) samples cell
    (px * grid_w // out_w, py * grid_d // out_h).
    """
    row_cache: dict[int, bytes] = {}
    row_len = out_w * 3
    for py in range(out_h):
        cz = py * grid_d // out_h
        row = row_cache.get(cz)
        if row is None:
            buf = bytearray(row_len)
            base = cz * grid_w * 3
            for px in range(out_w):
                src = base + (px * grid_w // out_w) * 3
                dst = px * 3
                buf[dst:dst + 3] = cells[src:src + 3]
            row = bytes(buf)
            row_cache[cz] = row
        start = py * row_len
        out[start:start + row_len] = row
