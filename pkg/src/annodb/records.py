"""Plain record types mirroring the five annotation tables."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class ImageRecord:
    imagefile: str
    width: int | None = None
    height: int | None = None
    maskfile: str | None = None
    name: str | None = None
    score: float | None = None


@dataclass
class ObjectRecord:
    objectid: int
    imagefile: str
    x: float | None = None
    y: float | None = None
    width: float | None = None
    height: float | None = None
    name: str | None = None
    score: float | None = None

    @property
    def has_box(self) -> bool:
        return None not in (self.x, self.y, self.width, self.height)


@dataclass
class PropertyRecord:
    id: int
    objectid: int
    key: str
    value: str | None


@dataclass
class PolygonPoint:
    id: int
    objectid: int
    x: float
    y: float
    name: str | None = None


@dataclass
class MatchRecord:
    id: int
    objectid: int
    match: int


@dataclass
class ObjectEntry:
    """One object joined with its image and attached rows.

    Polygon points are ordered by ascending row id, which is the point
    order within each closed polygon.
    """

    object: ObjectRecord
    image: ImageRecord
    properties: list[PropertyRecord] = field(default_factory=list)
    polygon_points: list[PolygonPoint] = field(default_factory=list)


@dataclass
class ImportReport:
    """Summary of a bulk import or merge."""

    images_added: int = 0
    objects_added: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def files_skipped(self) -> int:
        return len(self.skipped)
