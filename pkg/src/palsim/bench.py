"""Benchmarks: raster kernel comparison and sustained wire throughput.

``render`` compares the compiled and pure-Python raster kernels on the same
frame stream. ``throughput`` drives a real TCP server with a command loop
and reports commands per second for a given screen format (or none).
"""

from __future__ import annotations

import time

from .client import PalClient
from .observe import encode_frame, render_screen
from .rasterize import available_backends, fill_raster
from .server import PalServer, ServerConfig
from .tasks import generate_pogo


def bench_render(frames: int = 200, width: int = 256, height: int = 256) -> dict:
    """Frames/s per raster backend, plus full render+PNG encode rate."""
    task = generate_pogo(0)
    state = task.build_world()
    grid = state.grid
    cells = bytearray(grid.width * grid.depth * 3)
    from .world import BlockPos
    for z in range(grid.depth):
        for x in range(grid.width):
            rgb = task.palette[grid.block_at(BlockPos(x, grid.y_level, z))]
            i = (z * grid.width + x) * 3
            cells[i:i + 3] = bytes(rgb)
    cells = bytes(cells)

    results: dict = {"frames": frames, "size": [width, height], "backends": {}}
    for backend in available_backends():
        start = time.perf_counter()
        for _ in range(frames):
            fill_raster(cells, grid.width, grid.depth, width, height,
                        backend=backend)
        elapsed = time.perf_counter() - start
        results["backends"][backend] = {
            "seconds": elapsed,
            "fps": frames / elapsed,
        }
    if "compiled" in results["backends"]:
        results["speedup"] = (results["backends"]["compiled"]["fps"]
                              / results["backends"]["python"]["fps"])

    start = time.perf_counter()
    for _ in range(frames):
        encode_frame(render_screen(state, task.palette, width, height), "PNG")
    elapsed = time.perf_counter() - start
    results["render_encode_png_fps"] = frames / elapsed
    return results


def bench_throughput(duration: float = 10.0, image_format: str = "NONE",
                     fps: float = 1000.0, seed: int = 0) -> dict:
    """Commands/s over TCP for one command loop; screen per command optional."""
    with_screen = image_format.upper() != "NONE"
    config = ServerConfig(
        agent_port=0, control_port=0, fps=fps,
        aigym_reporting=with_screen, report_screen=with_screen,
        screen_format=image_format if with_screen else "PNG",
    )
    server = PalServer(config, initial_task=generate_pogo(seed))
    server.start()
    try:
        with PalClient(port=server.agent_port) as client:
            client.send("START")
            client.send("SENSE_ALL")
            count = 0
            start = time.perf_counter()
            deadline = start + duration
            while time.perf_counter() < deadline:
                client.send("TURN 15")
                count += 1
            elapsed = time.perf_counter() - start
    finally:
        server.stop()
    return {
        "format": image_format.upper(),
        "fps_cap": fps,
        "duration": elapsed,
        "commands": count,
        "commands_per_second": count / elapsed,
    }
