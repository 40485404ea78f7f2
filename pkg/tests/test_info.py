from __future__ import annotations

import pytest

from annodb import info, store
from annodb.errors import PredicateError
from annodb.formats import import_kitti

from conftest import add_boxed_object, make_kitti_corpus

KITTI_PROPERTY_KEYS = [
    "alpha",
    "dim_height",
    "dim_length",
    "dim_width",
    "loc_x",
    "loc_y",
    "loc_z",
    "occluded",
    "rotation_y",
    "truncated",
]


class TestPrintInfo:
    def test_empty_db(self, session, capsys):
        text = info.print_info(session)
        assert "'num objects': 0" in text
        assert "'num images': 0" in text
        assert capsys.readouterr().out.strip() == text

    def test_counts_match_raw_queries(self, session):
        for i in range(3):
            store.add_image(session, f"i{i}.jpg", width=10, height=20)
        add_boxed_object(session, "i0.jpg", (0, 0, 1, 1))
        data = info.get_info(session)
        assert data["num images"] == session.execute("SELECT COUNT(*) FROM images").fetchone()[0]
        assert data["num objects"] == session.execute("SELECT COUNT(*) FROM objects").fetchone()[0]

    def test_kitti_property_keys_sorted(self, tmp_path, session):
        session.rootdir = str(tmp_path)
        images_dir, labels_dir, _ = make_kitti_corpus(tmp_path, 3, 7, seed=8)
        import_kitti(session, str(images_dir), str(labels_dir))
        data = info.get_info(session)
        assert data["properties"] == KITTI_PROPERTY_KEYS
        assert data["num images"] == 3
        assert data["num objects"] == 7

    def test_distinct_dimension_summary(self, session):
        for i, height in enumerate([10, 20, 30, 40]):
            store.add_image(session, f"i{i}.jpg", width=100, height=height)
        data = info.get_info(session)
        assert data["image height"] == "4 different values"
        assert data["image width"] == 100

    def test_masks_and_matches_counted(self, session):
        store.add_image(session, "a.jpg", maskfile="masks/a.png")
        store.add_image(session, "b.jpg")
        a = store.add_object(session, "a.jpg")
        b = store.add_object(session, "b.jpg")
        store.add_match(session, a, 1)
        store.add_match(session, b, 1)
        data = info.get_info(session)
        assert data["num masks"] == 1
        assert data["matches"] == 1

    def test_images_by_dir(self, session):
        store.add_image(session, "train/a.jpg")
        store.add_image(session, "train/b.jpg")
        store.add_image(session, "val/c.jpg")
        store.add_image(session, "plain.jpg")
        data = info.get_info(session, images_by_dir=True)
        assert data["images by dir"] == {".": 1, "train/": 2, "val/": 1}

    def test_objects_by_image(self, session):
        store.add_image(session, "a.jpg")
        store.add_image(session, "b.jpg")
        add_boxed_object(session, "a.jpg", (0, 0, 1, 1))
        add_boxed_object(session, "a.jpg", (1, 1, 1, 1))
        data = info.get_info(session, objects_by_image=True)
        assert data["objects by image"] == {"a.jpg": 2, "b.jpg": 0}

    def test_format_is_deterministic_and_sorted(self, session):
        store.add_image(session, "a.jpg", width=5, height=5)
        first = info.format_info(info.get_info(session))
        second = info.format_info(info.get_info(session))
        assert first == second
        keys = [line.split(":")[0].strip(" {'") for line in first.splitlines()]
        assert keys == sorted(keys)

    def test_info_never_mutates(self, tmp_path):
        path = tmp_path / "ro.db"
        s = store.open_session(None, str(path))
        store.add_image(s, "a.jpg", width=5, height=5)
        store.commit(s)
        s.close()
        digest = open(path, "rb").read()
        ro = store.open_session(str(path))
        info.get_info(ro, images_by_dir=True, objects_by_image=True)
        info.plot_objects_histogram(ro, "SELECT width FROM images")
        ro.close()
        assert open(path, "rb").read() == digest


class TestHistogram:
    def fill_values(self, session, values):
        store.add_image(session, "a.jpg")
        oid = store.add_object(session, "a.jpg")
        for v in values:
            store.add_property(session, oid, "angle", str(v))

    def test_worked_binning(self, session):
        self.fill_values(session, [1, 1, 2])
        table = info.plot_objects_histogram(
            session, "SELECT value FROM properties WHERE key='angle'", bins=2
        )
        assert table == [(1.0, 1.5, 2), (1.5, 2.0, 1)]

    def test_counts_sum_to_parseable_values(self, session):
        self.fill_values(session, [0.5, 1.5, 2.5, 3.5, "banana"])
        table = info.plot_objects_histogram(
            session, "SELECT value FROM properties WHERE key='angle'"
        )
        assert sum(count for _, _, count in table) == 4

    def test_empty_query_writes_header_only_csv(self, session, tmp_path):
        out_csv = tmp_path / "h.csv"
        table = info.plot_objects_histogram(
            session, "SELECT value FROM properties WHERE key='nope'", out_csv=str(out_csv)
        )
        assert table == []
        assert out_csv.read_text().splitlines() == ["bin_low,bin_high,count"]

    def test_two_columns_rejected(self, session):
        with pytest.raises(PredicateError, match="1 column"):
            info.plot_objects_histogram(session, "SELECT imagefile, width FROM images")

    def test_non_select_rejected(self, session):
        with pytest.raises(PredicateError, match="SELECT"):
            info.plot_objects_histogram(session, "DELETE FROM objects")

    def test_malformed_query_carries_diagnostic(self, session):
        with pytest.raises(PredicateError, match="no such table"):
            info.plot_objects_histogram(session, "SELECT v FROM nonexistent")

    def test_sturges_default(self, session):
        self.fill_values(session, range(100))
        table = info.plot_objects_histogram(
            session, "SELECT value FROM properties WHERE key='angle'"
        )
        assert len(table) == info.sturges_bins(100) == 8

    def test_svg_and_csv_outputs(self, session, tmp_path):
        self.fill_values(session, [1, 2, 2, 3])
        svg, csv_path = tmp_path / "h.svg", tmp_path / "h.csv"
        table = info.plot_objects_histogram(
            session,
            "SELECT value FROM properties WHERE key='angle'",
            bins=2,
            out_svg=str(svg),
            out_csv=str(csv_path),
        )
        assert svg.read_text().lstrip().startswith("<?xml")
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "bin_low,bin_high,count"
        assert len(lines) == 1 + len(table)
