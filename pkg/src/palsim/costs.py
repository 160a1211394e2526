"""Per-command step-cost accounting.

Every command charges a scalar cost, accumulated per instance. Most verbs
carry a flat cost; MOVE and TP_TO scale with distance travelled and CRAFT
scales with the number of occupied recipe slots. The table is loadable from
JSON so evaluators can recalibrate, but a loaded table must still satisfy
the protocol's fixed ratios (checked by :func:`validate`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

SELECT_ITEM_COST = 120.0
COST_CEILING = 1_000_000.0

_DEFAULT_UNIT_COSTS = {
    "move": 12.0,
    "turn": 3.0,
    "smooth_tilt": 3.0,
    "break_block": 600.0,
    "place": 120.0,
    "craft_per_slot": 120.0,
    "extract_rubber": 120.0,
    "select_item": SELECT_ITEM_COST,
    "use": 120.0,
    "use_hand": 120.0,
    "collect": 120.0,
    "delete": 120.0,
    "interact": 120.0,
    "trade": 120.0,
    "nop": 0.0,
}


class CostTableError(ValueError):
    """A loaded cost table violates a fixed protocol constraint."""


@dataclass(frozen=True)
class CostTable:
    """Unit costs per command kind plus the distance/slot scaling rules."""

    units: dict[str, float] = field(default_factory=lambda: dict(_DEFAULT_UNIT_COSTS))

    def __post_init__(self):
        validate(self)

    def flat(self, kind: str) -> float:
        """Flat cost for a non-scaled command kind (0 for unknown kinds)."""
        return self.units.get(kind, 0.0)

    def move(self, dx: int, dz: int) -> float:
        """MOVE cost: cardinal unit, times sqrt(2) for a diagonal offset."""
        if dx != 0 and dz != 0:
            return self.units["move"] * math.sqrt(2.0)
        return self.units["move"]

    def teleport(self, distance: float) -> float:
        """TP_TO cost: Euclidean distance moved times the cardinal unit."""
        return self.units["move"] * distance

    def craft(self, occupied_slots: int) -> float:
        return self.units["craft_per_slot"] * occupied_slots

    def with_units(self, **overrides: float) -> "CostTable":
        units = dict(self.units)
        units.update(overrides)
        return replace(self, units=units)


def validate(table: CostTable) -> None:
    """Reject tables that break the protocol's fixed cost relations."""
    units = table.units
    for key in _DEFAULT_UNIT_COSTS:
        if key not in units:
            raise CostTableError(f"cost table missing entry: {key}")
        if units[key] < 0:
            raise CostTableError(f"cost for {key} must be non-negative")
    if units["select_item"] != SELECT_ITEM_COST:
        raise CostTableError("select_item cost is fixed at 120")
    if units["nop"] != 0.0:
        raise CostTableError("nop cost is fixed at 0")


def load_cost_table(path: str) -> CostTable:
    """Load a cost table from a JSON object of ``{kind: unit}``."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise CostTableError("cost table file must hold a JSON object")
    units = dict(_DEFAULT_UNIT_COSTS)
    for key, value in data.items():
        if not isinstance(value, (int, float)):
            raise CostTableError(f"cost for {key} must be a number")
        units[str(key)] = float(value)
    return CostTable(units=units)
