"""Head-grid geometry and prune-mask arithmetic.

A model exposes ``layers x heads_per_layer`` prunable attention heads.
Masks are canonical tuples of ``HeadIndex`` sorted by (layer, head), which
makes them hashable cache keys and keeps every serialization deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import BoundsError


class HeadIndex(NamedTuple):
    """Zero-based (layer, head) position of one attention head."""

    layer: int
    head: int


# A canonical mask: duplicate-free, sorted by (layer, head).
Mask = tuple[HeadIndex, ...]

EMPTY_MASK: Mask = ()


@dataclass(frozen=True)
class Geometry:
    """Shape of the prunable grid: `layers` attention layers of `heads_per_layer` heads."""

    layers: int
    heads_per_layer: int

    def __post_init__(self):
        if self.layers < 1 or self.heads_per_layer < 1:
            raise ValueError(
                f"geometry must be at least 1x1, got {self.layers}x{self.heads_per_layer}"
            )

    @property
    def total_heads(self) -> int:
        return self.layers * self.heads_per_layer

    def contains(self, head: HeadIndex) -> bool:
        return 0 <= head.layer < self.layers and 0 <= head.head < self.heads_per_layer


def canonicalize(entries: Iterable[HeadIndex | tuple[int, int]], geometry: Geometry) -> Mask:
    """Deduplicate, bounds-check and sort head indices into a canonical mask.

    Idempotent. Raises :class:`BoundsError` naming the first offending index.
    """
    heads = set()
    for entry in entries:
        head = entry if isinstance(entry, HeadIndex) else HeadIndex(int(entry[0]), int(entry[1]))
        if not geometry.contains(head):
            raise BoundsError(
                f"head (layer={head.layer}, head={head.head}) is outside the "
                f"{geometry.layers}x{geometry.heads_per_layer} grid"
            )
        heads.add(head)
    return tuple(sorted(heads))


def all_heads(geometry: Geometry) -> list[HeadIndex]:
    """Every head in the grid, in canonical (layer, head) order."""
    return [
        HeadIndex(layer, head)
        for layer in range(geometry.layers)
        for head in range(geometry.heads_per_layer)
    ]


def column(geometry: Geometry, head: int) -> list[HeadIndex]:
    """All heads at position `head` across every layer."""
    if not 0 <= head < geometry.heads_per_layer:
        raise BoundsError(f"column {head} is outside 0..{geometry.heads_per_layer - 1}")
    return [HeadIndex(layer, head) for layer in range(geometry.layers)]


def mask_to_pairs(mask: Mask) -> list[list[int]]:
    """Serialize a mask as [[layer, head], ...] in canonical order."""
    return [[h.layer, h.head] for h in mask]


def mask_from_pairs(pairs: Iterable[Iterable[int]], geometry: Geometry) -> Mask:
    heads = []
    for pair in pairs:
        pair = list(pair)
        if len(pair) != 2:
            raise BoundsError(f"mask entry {pair!r} is not a [layer, head] pair")
        heads.append((int(pair[0]), int(pair[1])))
    return canonicalize(heads, geometry)
