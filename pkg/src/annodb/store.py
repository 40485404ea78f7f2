"""Relational store: schema, session lifecycle, integrity, iteration.

A session always operates on an in-memory SQLite database. Opening a file
copies its pages into memory; committing copies them back out to the write
path. This makes read-only sessions trivially byte-preserving and lets every
operation mutate freely until the caller decides whether to commit.

Session modes follow the -i/-o rules:

    (no in, no out)  ephemeral      scratch db, discarded at close
    (in,    no out)  read-only      loaded from in, commit refused
    (no in, out)     create         fresh schema, commit writes out
    (in,    out)     copy-on-write  loaded from in, commit writes out

In create and copy-on-write modes, a pre-existing out file is renamed to
"<out>.backup" when the session opens (one level of undo).
"""
from __future__ import annotations

import logging
import os
import sqlite3
import urllib.parse
from pathlib import Path
from typing import Iterator

from .errors import AnnoDbError, PredicateError, ReadOnlySessionError, SchemaError
from .records import (
    ImageRecord,
    MatchRecord,
    ObjectEntry,
    ObjectRecord,
    PolygonPoint,
    PropertyRecord,
)

logger = logging.getLogger(__name__)

EPHEMERAL = "ephemeral"
READ_ONLY = "read-only"
CREATE = "create"
COPY_ON_WRITE = "copy-on-write"

BACKUP_SUFFIX = ".backup"

# Emitted verbatim by create_schema; docs/schema.sql carries the same text.
SCHEMA_SQL = """\
CREATE TABLE images (
    imagefile TEXT PRIMARY KEY NOT NULL,
    width INTEGER,
    height INTEGER,
    maskfile TEXT,
    name TEXT,
    score REAL
);
CREATE TABLE objects (
    objectid INTEGER PRIMARY KEY,
    imagefile TEXT NOT NULL,
    x REAL,
    y REAL,
    width REAL,
    height REAL,
    name TEXT,
    score REAL
);
CREATE TABLE properties (
    id INTEGER PRIMARY KEY,
    objectid INTEGER NOT NULL,
    key TEXT NOT NULL,
    value TEXT
);
CREATE TABLE polygons (
    id INTEGER PRIMARY KEY,
    objectid INTEGER NOT NULL,
    x REAL,
    y REAL,
    name TEXT
);
CREATE TABLE matches (
    id INTEGER PRIMARY KEY,
    objectid INTEGER NOT NULL,
    match INTEGER NOT NULL
);
CREATE INDEX idx_objects_imagefile ON objects(imagefile);
CREATE INDEX idx_properties_objectid ON properties(objectid);
CREATE INDEX idx_properties_key ON properties(key);
CREATE INDEX idx_polygons_objectid ON polygons(objectid);
CREATE INDEX idx_matches_objectid ON matches(objectid);
CREATE INDEX idx_matches_match ON matches(match);
"""

TABLES = ("images", "objects", "properties", "polygons", "matches")

_REQUIRED_COLUMNS = {
    "images": {"imagefile", "width", "height", "maskfile", "name", "score"},
    "objects": {"objectid", "imagefile", "x", "y", "width", "height", "name", "score"},
    "properties": {"id", "objectid", "key", "value"},
    "polygons": {"id", "objectid", "x", "y", "name"},
    "matches": {"id", "objectid", "match"},
}

_IMAGE_COLS = "imagefile, width, height, maskfile, name, score"
_OBJECT_COLS = "objectid, imagefile, x, y, width, height, name, score"


class Session:
    """Handle to one open annotation database plus its pending state."""

    def __init__(
        self,
        conn: sqlite3.Connection,
        mode: str,
        read_path: str | None,
        write_path: str | None,
        rootdir: str = ".",
    ):
        self.conn = conn
        self.mode = mode
        self.read_path = read_path
        self.write_path = write_path
        self.rootdir = rootdir
        self.dirty = False
        self.closed = False

    @property
    def writable(self) -> bool:
        return self.mode != READ_ONLY

    def mark_dirty(self) -> None:
        self.dirty = True

    def execute(self, sql: str, params=()) -> sqlite3.Cursor:
        return self.conn.execute(sql, params)

    def close(self) -> None:
        if not self.closed:
            self.conn.close()
            self.closed = True

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def create_schema(conn: sqlite3.Connection) -> None:
    conn.executescript(SCHEMA_SQL)


def _load_file_into(conn: sqlite3.Connection, path: str) -> None:
    quoted = urllib.parse.quote(str(Path(path).absolute()))
    try:
        src = sqlite3.connect(f"file:{quoted}?mode=ro", uri=True)
        try:
            src.backup(conn)
        finally:
            src.close()
    except sqlite3.Error as exc:
        raise SchemaError(f"{path} is not a readable SQLite database: {exc}") from exc


def _check_schema(conn: sqlite3.Connection, path: str) -> None:
    existing = {
        row[0]
        for row in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")
    }
    problems = []
    for table in TABLES:
        if table not in existing:
            problems.append(f"missing table {table}")
            continue
        cols = {row[1] for row in conn.execute(f"PRAGMA table_info({table})")}
        lacking = _REQUIRED_COLUMNS[table] - cols
        if lacking:
            problems.append(f"table {table} lacks columns {sorted(lacking)}")
    if problems:
        raise SchemaError(f"{path} is not an annotation database: " + "; ".join(problems))


def open_session(
    in_path: str | None = None,
    out_path: str | None = None,
    rootdir: str = ".",
) -> Session:
    """Open one session per the -i/-o mode table.

    A pre-existing out file is renamed to out + ".backup" right away, so the
    previous bytes stay recoverable whether or not the session ever commits.
    """
    if in_path is not None and not os.path.exists(in_path):
        raise FileNotFoundError(f"input database not found: {in_path}")

    if out_path is not None:
        parent = Path(out_path).absolute().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise AnnoDbError(f"output directory not writable: {parent}")
        if os.path.exists(out_path):
            backup = str(out_path) + BACKUP_SUFFIX
            os.replace(out_path, backup)
            logger.info("backed up existing %s to %s", out_path, backup)

    conn = sqlite3.connect(":memory:", check_same_thread=False)
    if in_path is not None:
        _load_file_into(conn, in_path)
        try:
            _check_schema(conn, in_path)
        except SchemaError:
            conn.close()
            raise
        mode = READ_ONLY if out_path is None else COPY_ON_WRITE
    else:
        create_schema(conn)
        mode = EPHEMERAL if out_path is None else CREATE

    session = Session(conn, mode, in_path, out_path, rootdir)
    logger.info("opened %s session (in=%s, out=%s)", mode, in_path, out_path)
    return session


def commit(session: Session) -> None:
    """Write pending changes to the write path; no-op file-wise when ephemeral."""
    if session.mode == READ_ONLY:
        raise ReadOnlySessionError("read-only session")
    session.conn.commit()
    if session.write_path is not None:
        dest = sqlite3.connect(session.write_path)
        try:
            session.conn.backup(dest)
        finally:
            dest.close()
        logger.info("committed to %s", session.write_path)
    session.dirty = False


def validate_integrity(session: Session) -> list[str]:
    """Return one message per relational or value violation; [] means consistent."""
    conn = session.conn
    violations = []
    for row in conn.execute(
        "SELECT objectid, imagefile FROM objects "
        "WHERE imagefile NOT IN (SELECT imagefile FROM images) ORDER BY objectid"
    ):
        violations.append(f"orphan object: objectid={row[0]} references missing imagefile '{row[1]}'")
    for table in ("properties", "polygons", "matches"):
        for row in conn.execute(
            f"SELECT id, objectid FROM {table} "
            "WHERE objectid NOT IN (SELECT objectid FROM objects) ORDER BY id"
        ):
            violations.append(f"orphan {table} row: id={row[0]} references missing objectid {row[1]}")
    for row in conn.execute(
        "SELECT objectid FROM objects WHERE width < 0 OR height < 0 ORDER BY objectid"
    ):
        violations.append(f"negative box dimensions: objectid={row[0]}")
    for row in conn.execute(
        "SELECT objectid FROM objects WHERE (x IS NULL) + (y IS NULL) "
        "+ (width IS NULL) + (height IS NULL) NOT IN (0, 4) ORDER BY objectid"
    ):
        violations.append(f"partial box: objectid={row[0]}")
    n_empty = conn.execute("SELECT COUNT(*) FROM images WHERE imagefile = ''").fetchone()[0]
    if n_empty:
        violations.append(f"empty imagefile values: {n_empty} image rows")
    for row in conn.execute("SELECT objectid FROM objects WHERE imagefile = '' ORDER BY objectid"):
        violations.append(f"empty imagefile: objectid={row[0]}")
    for row in conn.execute(
        "SELECT imagefile FROM images WHERE width <= 0 OR height <= 0 ORDER BY imagefile"
    ):
        violations.append(f"non-positive image dimensions: imagefile '{row[0]}'")
    return violations


def _image_from_row(row) -> ImageRecord:
    return ImageRecord(*row)


def _object_from_row(row) -> ObjectRecord:
    return ObjectRecord(*row)


def iterate_images(session: Session, where_images: str | None = None) -> Iterator[ImageRecord]:
    """Yield images satisfying the predicate, in imagefile-ascending order."""
    sql = f"SELECT {_IMAGE_COLS} FROM images"
    if where_images:
        sql += f" WHERE {where_images}"
    sql += " ORDER BY imagefile"
    try:
        cursor = session.execute(sql)
    except sqlite3.Error as exc:
        raise PredicateError(f"bad where_images predicate {where_images!r}: {exc}") from exc
    for row in cursor:
        yield _image_from_row(row)


def get_image(session: Session, imagefile: str) -> ImageRecord | None:
    row = session.execute(
        f"SELECT {_IMAGE_COLS} FROM images WHERE imagefile = ?", (imagefile,)
    ).fetchone()
    return _image_from_row(row) if row else None


def get_object(session: Session, objectid: int) -> ObjectRecord | None:
    row = session.execute(
        f"SELECT {_OBJECT_COLS} FROM objects WHERE objectid = ?", (objectid,)
    ).fetchone()
    return _object_from_row(row) if row else None


def object_properties(session: Session, objectid: int) -> list[PropertyRecord]:
    return [
        PropertyRecord(*row)
        for row in session.execute(
            "SELECT id, objectid, key, value FROM properties WHERE objectid = ? ORDER BY id",
            (objectid,),
        )
    ]


def object_polygon_points(session: Session, objectid: int) -> list[PolygonPoint]:
    return [
        PolygonPoint(*row)
        for row in session.execute(
            "SELECT id, objectid, x, y, name FROM polygons WHERE objectid = ? ORDER BY id",
            (objectid,),
        )
    ]


def object_matches(session: Session, objectid: int) -> list[MatchRecord]:
    return [
        MatchRecord(*row)
        for row in session.execute(
            "SELECT id, objectid, match FROM matches WHERE objectid = ? ORDER BY id",
            (objectid,),
        )
    ]


def select_objectids(session: Session, where_objects: str | None = None) -> list[int]:
    """Objectids satisfying a predicate over objects columns, ascending."""
    sql = "SELECT objectid FROM objects"
    if where_objects:
        sql += f" WHERE {where_objects}"
    sql += " ORDER BY objectid"
    try:
        return [row[0] for row in session.execute(sql)]
    except sqlite3.Error as exc:
        raise PredicateError(f"bad where_objects predicate {where_objects!r}: {exc}") from exc


def iterate_objects(session: Session, where_objects: str | None = None) -> Iterator[ObjectEntry]:
    """Yield matching objects joined with their image and attached rows.

    The predicate is evaluated against the objects table alone, so unqualified
    column names are never ambiguous with image columns.
    """
    for objectid in select_objectids(session, where_objects):
        obj = get_object(session, objectid)
        assert obj is not None
        image = get_image(session, obj.imagefile)
        if image is None:
            image = ImageRecord(imagefile=obj.imagefile)
        yield ObjectEntry(
            object=obj,
            image=image,
            properties=object_properties(session, objectid),
            polygon_points=object_polygon_points(session, objectid),
        )


def count_rows(session: Session, table: str) -> int:
    if table not in TABLES:
        raise ValueError(f"unknown table {table}")
    return session.execute(f"SELECT COUNT(*) FROM {table}").fetchone()[0]


# --- row insertion; the store allocates every id as max-existing + 1 ---

def add_image(
    session: Session,
    imagefile: str,
    width: int | None = None,
    height: int | None = None,
    maskfile: str | None = None,
    name: str | None = None,
    score: float | None = None,
) -> None:
    if not imagefile:
        raise ValueError("imagefile must be non-empty")
    if (width is not None and width <= 0) or (height is not None and height <= 0):
        raise ValueError(f"image dimensions must be positive: {imagefile}")
    session.execute(
        "INSERT INTO images(imagefile, width, height, maskfile, name, score) VALUES (?,?,?,?,?,?)",
        (imagefile, width, height, maskfile, name, score),
    )
    session.mark_dirty()


def add_object(
    session: Session,
    imagefile: str,
    x: float | None = None,
    y: float | None = None,
    width: float | None = None,
    height: float | None = None,
    name: str | None = None,
    score: float | None = None,
) -> int:
    box = (x, y, width, height)
    if any(v is None for v in box) and any(v is not None for v in box):
        raise ValueError("box fields must be all present or all absent")
    if (width is not None and width < 0) or (height is not None and height < 0):
        raise ValueError("box width and height must be >= 0")
    cursor = session.execute(
        "INSERT INTO objects(imagefile, x, y, width, height, name, score) VALUES (?,?,?,?,?,?,?)",
        (imagefile, x, y, width, height, name, score),
    )
    session.mark_dirty()
    return cursor.lastrowid


def add_property(session: Session, objectid: int, key: str, value: str | None) -> int:
    if not key:
        raise ValueError("property key must be non-empty")
    cursor = session.execute(
        "INSERT INTO properties(objectid, key, value) VALUES (?,?,?)", (objectid, key, value)
    )
    session.mark_dirty()
    return cursor.lastrowid


def add_polygon_point(
    session: Session, objectid: int, x: float, y: float, name: str | None = None
) -> int:
    cursor = session.execute(
        "INSERT INTO polygons(objectid, x, y, name) VALUES (?,?,?,?)", (objectid, x, y, name)
    )
    session.mark_dirty()
    return cursor.lastrowid


def add_match(session: Session, objectid: int, match: int) -> int:
    cursor = session.execute(
        "INSERT INTO matches(objectid, match) VALUES (?,?)", (objectid, match)
    )
    session.mark_dirty()
    return cursor.lastrowid


def new_match_value(session: Session) -> int:
    row = session.execute("SELECT COALESCE(MAX(match), 0) + 1 FROM matches").fetchone()
    return row[0]


def update_object_name(session: Session, objectid: int, name: str | None) -> None:
    cursor = session.execute(
        "UPDATE objects SET name = ? WHERE objectid = ?", (name, objectid)
    )
    if cursor.rowcount == 0:
        raise KeyError(f"no object with objectid {objectid}")
    session.mark_dirty()


# --- deletion with full cascade ---

def _chunks(values, size=500):
    values = list(values)
    for i in range(0, len(values), size):
        yield values[i : i + size]


def delete_objects(session: Session, objectids) -> int:
    """Delete objects and cascade to properties, polygons, and match rows."""
    deleted = 0
    for chunk in _chunks(objectids):
        marks = ",".join("?" * len(chunk))
        for table in ("properties", "polygons", "matches"):
            session.execute(f"DELETE FROM {table} WHERE objectid IN ({marks})", chunk)
        deleted += session.execute(
            f"DELETE FROM objects WHERE objectid IN ({marks})", chunk
        ).rowcount
    if deleted:
        session.mark_dirty()
    return deleted


def delete_images(session: Session, imagefiles) -> int:
    """Delete images together with all their objects."""
    deleted = 0
    for chunk in _chunks(imagefiles):
        marks = ",".join("?" * len(chunk))
        objectids = [
            row[0]
            for row in session.execute(
                f"SELECT objectid FROM objects WHERE imagefile IN ({marks})", chunk
            )
        ]
        delete_objects(session, objectids)
        deleted += session.execute(
            f"DELETE FROM images WHERE imagefile IN ({marks})", chunk
        ).rowcount
    if deleted:
        session.mark_dirty()
    return deleted


def dump_tables(session: Session) -> dict[str, list[tuple]]:
    """Full table contents in deterministic order, for equivalence checks."""
    out = {}
    order = {
        "images": "imagefile",
        "objects": "objectid",
        "properties": "id",
        "polygons": "id",
        "matches": "id",
    }
    for table in TABLES:
        out[table] = list(
            session.execute(f"SELECT * FROM {table} ORDER BY {order[table]}")
        )
    return out
