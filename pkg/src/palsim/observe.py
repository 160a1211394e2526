"""World-state observations and the deterministic top-down screen render.

Every SENSE_* payload is produced here from an immutable view of the world;
sensing never mutates state. The screen is an orthographic top-down raster
of the arena (nearest-neighbor, agent drawn as a 3-pixel arrow), encodable
as PNG, BMP, JPEG/JPG, WBMP or GIF. PNG and BMP are lossless and
bit-deterministic across runs.
"""

from __future__ import annotations

import base64
import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .rasterize import fill_raster
from .world import BlockPos, WorldState, yaw_offset

SCREEN_FORMATS = ("PNG", "BMP", "JPEG", "JPG", "WBMP", "GIF")
DEFAULT_SCREEN_SIZE = 256

ARROW_TIP = (255, 255, 255)
ARROW_BODY = (0, 0, 0)


class RenderError(ValueError):
    """Raised when a frame cannot be rendered or encoded as requested."""


# -- symbolic observations ----------------------------------------------------

def _inventory_section(state: WorldState) -> dict:
    return {
        "items": {item: state.inventory.slots[item]
                  for item in sorted(state.inventory.slots)},
        "selectedItem": state.inventory.selected,
    }


def _player_section(state: WorldState) -> dict:
    a = state.agent
    return {"pos": [a.pos.x, a.pos.y, a.pos.z], "yaw": a.yaw, "pitch": a.pitch}


def _entities_section(state: WorldState) -> dict:
    return {
        str(eid): {"type": e.kind, "pos": [e.pos.x, e.pos.y, e.pos.z], "item": e.item}
        for eid, e in sorted(state.entities.items())
    }


def _recipes_section(state: WorldState) -> list:
    return [
        {"inputs": list(r.inputs),
         "output": {"item": r.output_item, "count": r.output_count}}
        for r in state.recipes
    ]


def _actor_actions_section(state: WorldState) -> list:
    return [{"entityId": eid, "action": action} for eid, action in state.actor_actions]


def _map_section(state: WorldState, nonav: bool) -> dict:
    grid = state.grid
    out = {}
    for z in range(grid.depth):
        for x in range(grid.width):
            pos = BlockPos(x, grid.y_level, z)
            name = grid.block_at(pos)
            if nonav:
                entry = {
                    "name": name,
                    "attributes": {
                        "solid": grid.is_solid(pos),
                        "breakable": grid.is_solid(pos) and not grid.is_unbreakable(name),
                    },
                }
            else:
                entry = {"name": name, "isAccessible": state.is_passable(pos)}
            out[f"{x},{grid.y_level},{z}"] = entry
    return out


_PART_SECTIONS = {
    "INVENTORY": ("inventory", _inventory_section),
    "LOCATIONS": ("player", _player_section),
    "RECIPES": ("recipes", _recipes_section),
    "ENTITIES": ("entities", _entities_section),
    "ACTOR_ACTIONS": ("actorActions", _actor_actions_section),
}


def sense_all(state: WorldState, nonav: bool = False) -> dict:
    """Everything observable: map, inventory, pose, entities, recipes.

    With *nonav* the map carries per-block attribute records and the
    navigation-oriented fields (accessibility flags, block-in-front) are
    omitted.
    """
    payload = {}
    if not nonav:
        payload["blockInFront"] = {"name": state.grid.block_at(state.facing_cell())}
    payload["inventory"] = _inventory_section(state)
    payload["player"] = _player_section(state)
    payload["entities"] = _entities_section(state)
    payload["map"] = _map_section(state, nonav)
    payload["recipes"] = _recipes_section(state)
    payload["actorActions"] = _actor_actions_section(state)
    return payload


def sense_part(state: WorldState, kind: str) -> dict:
    """One named sub-document of :func:`sense_all`, identical to its
    embedded form."""
    key, fn = _PART_SECTIONS[kind]
    return {key: fn(state)}


# -- screen rendering ----------------------------------------------------------

@dataclass(frozen=True)
class ScreenFrame:
    width: int
    height: int
    pixels: bytes  # row-major RGB

    def pixel(self, x: int, y: int) -> tuple[int, int, int]:
        i = (y * self.width + x) * 3
        return tuple(self.pixels[i:i + 3])


def render_screen(state: WorldState, palette: dict[str, tuple[int, int, int]],
                  width: int = DEFAULT_SCREEN_SIZE,
                  height: int = DEFAULT_SCREEN_SIZE) -> ScreenFrame:
    """Top-down orthographic raster of the arena; pure function of its inputs."""
    grid = state.grid
    cells = bytearray(grid.width * grid.depth * 3)
    for z in range(grid.depth):
        for x in range(grid.width):
            name = grid.block_at(BlockPos(x, grid.y_level, z))
            rgb = palette.get(name)
            if rgb is None:
                raise RenderError(f"palette has no entry for block {name!r}")
            i = (z * grid.width + x) * 3
            cells[i:i + 3] = bytes(rgb)
    for e in state.entities.values():
        if e.item and e.item in palette:
            i = (e.pos.z * grid.width + e.pos.x) * 3
            cells[i:i + 3] = bytes(palette[e.item])

    out = fill_raster(bytes(cells), grid.width, grid.depth, width, height)

    # 3-pixel arrow over the agent cell: dark tail and body, white tip
    # pointing along the yaw direction.
    a = state.agent.pos
    cx = (a.x * width // grid.width + (a.x + 1) * width // grid.width) // 2
    cy = (a.z * height // grid.depth + (a.z + 1) * height // grid.depth) // 2
    dx, dz = yaw_offset(state.agent.yaw)
    for px, py, rgb in ((cx - dx, cy - dz, ARROW_BODY), (cx, cy, ARROW_BODY),
                        (cx + dx, cy + dz, ARROW_TIP)):
        if 0 <= px < width and 0 <= py < height:
            i = (py * width + px) * 3
            out[i:i + 3] = bytes(rgb)
    return ScreenFrame(width, height, bytes(out))


def _encode_wbmp(frame: ScreenFrame) -> bytes:
    """WBMP type 0: 1 bit per pixel, white where luminance >= 128."""
    rgb = np.frombuffer(frame.pixels, dtype=np.uint8).reshape(-1, 3).astype(np.uint32)
    lum = (299 * rgb[:, 0] + 587 * rgb[:, 1] + 114 * rgb[:, 2]) // 1000
    bits = (lum >= 128).astype(np.uint8).reshape(frame.height, frame.width)
    rows = np.packbits(bits, axis=1)
    return b"\x00\x00" + _uintvar(frame.width) + _uintvar(frame.height) + rows.tobytes()


def _uintvar(value: int) -> bytes:
    """WAP multi-byte integer: 7 bits per byte, high bit marks continuation."""
    parts = [value & 0x7F]
    value >>= 7
    while value:
        parts.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(parts))


def _encode_gif(frame: ScreenFrame) -> bytes:
    """GIF through a direct palette: frames carry few distinct colors."""
    rgb = np.frombuffer(frame.pixels, dtype=np.uint8).reshape(-1, 3)
    colors, indices = np.unique(rgb, axis=0, return_inverse=True)
    if len(colors) > 256:
        raise RenderError("frame has more than 256 distinct colors; GIF needs a palette")
    img = Image.frombytes("P", (frame.width, frame.height),
                          indices.astype(np.uint8).tobytes())
    flat = colors.flatten().tolist()
    img.putpalette(flat + [0] * (768 - len(flat)))
    buf = io.BytesIO()
    img.save(buf, format="GIF")
    return buf.getvalue()


def encode_frame(frame: ScreenFrame, image_format: str) -> bytes:
    fmt = image_format.upper()
    if fmt not in SCREEN_FORMATS:
        raise RenderError(f"unsupported screen format: {image_format!r}")
    if fmt == "WBMP":
        return _encode_wbmp(frame)
    if fmt == "GIF":
        return _encode_gif(frame)
    img = Image.frombytes("RGB", (frame.width, frame.height), frame.pixels)
    buf = io.BytesIO()
    img.save(buf, format="JPEG" if fmt == "JPG" else fmt)
    return buf.getvalue()


def screen_payload(state: WorldState, palette: dict[str, tuple[int, int, int]],
                   image_format: str, width: int = DEFAULT_SCREEN_SIZE,
                   height: int = DEFAULT_SCREEN_SIZE) -> dict:
    """Envelope augmentation: the encoded frame as single-line base64 text."""
    frame = render_screen(state, palette, width, height)
    data = encode_frame(frame, image_format)
    return {
        "format": image_format.upper(),
        "width": width,
        "height": height,
        "data": base64.b64encode(data).decode("ascii"),
    }
