"""Category registry with deterministic per-category colors."""

from __future__ import annotations

import colorsys
import enum
import math
from dataclasses import dataclass, field

from .errors import DuplicateCategory, EmptyName

GOLDEN_RATIO_CONJUGATE = 0.6180339887
_SATURATION = 0.85
_VALUE = 0.95


class CategorySource(str, enum.Enum):
    FILE = "file"
    USER_ADDED = "user"


def category_color(category_id: int) -> tuple[int, int, int]:
    """Deterministic RGB color for a category id.

    Hue steps by the golden-ratio conjugate so consecutive ids land far
    apart on the color wheel; fixed saturation/value keep colors legible
    over food photos. Pure function of the id: registries agree on
    colors regardless of their contents.
    """
    if category_id < 0:
        raise ValueError("category id must be >= 0")
    hue = math.fmod(category_id * GOLDEN_RATIO_CONJUGATE, 1.0)
    r, g, b = colorsys.hsv_to_rgb(hue, _SATURATION, _VALUE)
    # round half-up to 8-bit
    return tuple(int(math.floor(c * 255.0 + 0.5)) for c in (r, g, b))


@dataclass(frozen=True)
class Category:
    id: int
    name: str
    color: tuple[int, int, int]
    source: CategorySource


@dataclass
class CategoryRegistry:
    """Ordered categories with dense ids and case-insensitive unique names."""

    entries: list[Category] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, category_id: int) -> bool:
        return 0 <= category_id < len(self.entries)

    def get(self, category_id: int) -> Category:
        return self.entries[category_id]

    def find(self, name: str) -> Category | None:
        folded = name.strip().casefold()
        for entry in self.entries:
            if entry.name.casefold() == folded:
                return entry
        return None

    def add(self, name: str, source: CategorySource = CategorySource.USER_ADDED) -> int:
        name = name.strip()
        if not name:
            raise EmptyName("category name must be non-empty")
        if self.find(name) is not None:
            raise DuplicateCategory(f"category {name!r} already exists")
        new_id = len(self.entries)
        self.entries.append(
            Category(id=new_id, name=name, color=category_color(new_id), source=source)
        )
        return new_id

    @classmethod
    def from_names(
        cls, names: list[str], source: CategorySource = CategorySource.FILE
    ) -> "CategoryRegistry":
        registry = cls()
        for name in names:
            registry.add(name, source=source)
        return registry


def add_category(registry: CategoryRegistry, name: str) -> tuple[CategoryRegistry, int]:
    """Functional wrapper around :meth:`CategoryRegistry.add`."""
    new_id = registry.add(name, source=CategorySource.USER_ADDED)
    return registry, new_id
