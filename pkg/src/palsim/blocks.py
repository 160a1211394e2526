"""Block and item identifiers shared across the simulator.

Identifiers follow the ``namespace:name`` convention of the wire protocol.
The world grid stores solid blocks only; an absent cell is air.
"""

import re

AIR = "minecraft:air"
BEDROCK = "minecraft:bedrock"
GRASS = "minecraft:grass"
LOG = "minecraft:log"
PLANKS = "minecraft:planks"
STICK = "minecraft:stick"
CRAFTING_TABLE = "minecraft:crafting_table"
IRON_PICKAXE = "minecraft:iron_pickaxe"
WOOL = "minecraft:wool"

TREE_TAP = "polycraft:tree_tap"
MACGUFFIN = "polycraft:macguffin"
SACK_PELLETS = "polycraft:sack_polyisoprene_pellets"
POGO_STICK = "polycraft:wooden_pogo_stick"
TARGET = "polycraft:target"

EMPTY_SLOT = "0"

_ID_RE = re.compile(r"^[a-z0-9_.]+:[a-z0-9_./]+$")

# Block -> item dropped when broken. Blocks absent here drop themselves.
BLOCK_DROPS = {
    LOG: LOG,
    CRAFTING_TABLE: CRAFTING_TABLE,
    TREE_TAP: TREE_TAP,
    MACGUFFIN: MACGUFFIN,
}

# Never breakable, regardless of task configuration. Wool is the inner-wall
# material of the four-room arena and is structural there.
ALWAYS_UNBREAKABLE = frozenset({BEDROCK, TARGET, WOOL})

# Blocks a COLLECT command may lift back into the inventory.
COLLECTIBLE_BLOCKS = frozenset({MACGUFFIN})


def is_valid_id(name: str) -> bool:
    """True when *name* matches the ``namespace:name`` lexical form."""
    return bool(_ID_RE.match(name))
