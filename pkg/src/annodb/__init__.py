"""Manage computer-vision annotation datasets in a single-file relational database.

Annotations live in five tables (images, objects, properties, polygons,
matches) inside one SQLite file. All preparation work — import from public
dataset formats, filtering, geometric modification, splitting and merging,
statistics, evaluation, and inspection — runs through composable operations,
chainable on the command line and callable from Python.
"""
from .records import (
    ImageRecord,
    ImportReport,
    MatchRecord,
    ObjectEntry,
    ObjectRecord,
    PolygonPoint,
    PropertyRecord,
)
from .store import Session, commit, iterate_images, iterate_objects, open_session, validate_integrity

__version__ = "0.1.0"

__all__ = [
    "Session",
    "open_session",
    "commit",
    "iterate_images",
    "iterate_objects",
    "validate_integrity",
    "ImageRecord",
    "ObjectRecord",
    "PropertyRecord",
    "PolygonPoint",
    "MatchRecord",
    "ObjectEntry",
    "ImportReport",
]
