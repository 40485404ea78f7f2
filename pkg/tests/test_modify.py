from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annodb import media, modify, store
from annodb.errors import AnnoDbError

from conftest import add_boxed_object, gradient_png, make_png


def get_boxes(session):
    return [
        (e.object.x, e.object.y, e.object.width, e.object.height)
        for e in store.iterate_objects(session)
    ]


class TestExpandBoxes:
    def test_zero_is_identity(self, session):
        store.add_image(session, "a.jpg")
        add_boxed_object(session, "a.jpg", (3.5, 4.5, 10, 12))
        modify.expand_boxes(session, 0.0)
        assert get_boxes(session) == [(3.5, 4.5, 10, 12)]

    def test_worked_example(self, session):
        store.add_image(session, "a.jpg")
        add_boxed_object(session, "a.jpg", (10, 10, 20, 40))
        modify.expand_boxes(session, 0.2)
        assert get_boxes(session) == [(6, 2, 28, 56)]

    def test_below_negative_half_rejected(self, session):
        with pytest.raises(ValueError):
            modify.expand_boxes(session, -0.6)

    @settings(max_examples=60, deadline=None)
    @given(
        x=st.floats(-1000, 1000),
        y=st.floats(-1000, 1000),
        w=st.floats(0, 500),
        h=st.floats(0, 500),
        p=st.sampled_from([-0.2, 0.0, 0.2, 1.0]),
    )
    def test_center_invariant(self, x, y, w, h, p):
        s = store.open_session()
        store.add_image(s, "a.jpg")
        add_boxed_object(s, "a.jpg", (x, y, w, h))
        modify.expand_boxes(s, p)
        ((nx, ny, nw, nh),) = get_boxes(s)
        s.close()
        assert nx + nw / 2 == pytest.approx(x + w / 2, abs=1e-9)
        assert ny + nh / 2 == pytest.approx(y + h / 2, abs=1e-9)

    def test_composition(self, session):
        store.add_image(session, "a.jpg")
        add_boxed_object(session, "a.jpg", (10, 20, 30, 40))
        modify.expand_boxes(session, 0.2)
        modify.expand_boxes(session, 0.1)
        ((x, y, w, h),) = get_boxes(session)
        scale = 1.4 * 1.2
        assert w == pytest.approx(30 * scale, abs=1e-9)
        assert h == pytest.approx(40 * scale, abs=1e-9)
        assert x + w / 2 == pytest.approx(10 + 15, abs=1e-9)
        assert y + h / 2 == pytest.approx(20 + 20, abs=1e-9)

    def test_boxless_objects_untouched(self, session):
        store.add_image(session, "a.jpg")
        store.add_object(session, "a.jpg", name="poly")
        assert modify.expand_boxes(session, 0.2) == 0


class TestPolygonsToBoxes:
    def test_triangle(self, session):
        store.add_image(session, "a.jpg")
        oid = store.add_object(session, "a.jpg")
        for x, y in [(0, 0), (10, 0), (5, 5)]:
            store.add_polygon_point(session, oid, x, y)
        assert modify.polygons_to_boxes(session) == 1
        assert get_boxes(session) == [(0, 0, 10, 5)]

    def test_object_without_polygon_untouched(self, session):
        store.add_image(session, "a.jpg")
        add_boxed_object(session, "a.jpg", (1, 2, 3, 4))
        store.add_object(session, "a.jpg")
        modify.polygons_to_boxes(session)
        obj_rows = session.execute("SELECT x, y, width, height FROM objects ORDER BY objectid").fetchall()
        assert obj_rows == [(1, 2, 3, 4), (None, None, None, None)]

    def test_single_point_degenerate_box(self, session):
        store.add_image(session, "a.jpg")
        oid = store.add_object(session, "a.jpg")
        store.add_polygon_point(session, oid, 7.5, 3.25)
        modify.polygons_to_boxes(session)
        assert get_boxes(session) == [(7.5, 3.25, 0, 0)]

    def test_polygon_rows_retained(self, session):
        store.add_image(session, "a.jpg")
        oid = store.add_object(session, "a.jpg")
        store.add_polygon_point(session, oid, 0, 0)
        store.add_polygon_point(session, oid, 4, 4)
        modify.polygons_to_boxes(session)
        assert store.count_rows(session, "polygons") == 2

    def test_pools_all_polygons_of_object(self, session):
        store.add_image(session, "a.jpg")
        oid = store.add_object(session, "a.jpg")
        for x, y, name in [(0, 0, "p0"), (2, 2, "p0"), (10, 20, "p1")]:
            store.add_polygon_point(session, oid, x, y, name=name)
        modify.polygons_to_boxes(session)
        assert get_boxes(session) == [(0, 0, 10, 20)]

    # Coordinates on a 1/64 grid keep min + (max - min) bit-exact, so the
    # minimality assertions can use equality rather than a tolerance.
    dyadic = st.integers(-6400, 6400).map(lambda k: k / 64)

    @settings(max_examples=40, deadline=None)
    @given(points=st.lists(st.tuples(dyadic, dyadic), min_size=1, max_size=12))
    def test_minimal_covering_box(self, points):
        s = store.open_session()
        store.add_image(s, "a.jpg")
        oid = store.add_object(s, "a.jpg")
        for x, y in points:
            store.add_polygon_point(s, oid, x, y)
        modify.polygons_to_boxes(s)
        ((bx, by, bw, bh),) = get_boxes(s)
        s.close()
        for x, y in points:
            assert bx <= x <= bx + bw and by <= y <= by + bh
        xs = [x for x, _ in points]
        ys = [y for _, y in points]
        assert bx == min(xs) and bx + bw == max(xs)
        assert by == min(ys) and by + bh == max(ys)


class TestClampBoxes:
    def test_clamps_to_bounds(self, session):
        store.add_image(session, "a.jpg", width=100, height=50)
        add_boxed_object(session, "a.jpg", (-10, -5, 30, 20))
        add_boxed_object(session, "a.jpg", (90, 40, 30, 30))
        add_boxed_object(session, "a.jpg", (10, 10, 5, 5))
        assert modify.clamp_boxes_to_image(session) == 2
        assert get_boxes(session) == [(0, 0, 20, 15), (90, 40, 10, 10), (10, 10, 5, 5)]


class TestAddDatabase:
    def make_db(self, tmp_path, name, images, with_match=True):
        path = tmp_path / name
        s = store.open_session(None, str(path))
        ids = []
        for imagefile, boxes in images:
            store.add_image(s, imagefile, width=100, height=100)
            for box in boxes:
                oid = add_boxed_object(s, imagefile, box, name="car")
                store.add_property(s, oid, "color", "red")
                store.add_polygon_point(s, oid, box[0], box[1])
                ids.append(oid)
        if with_match and len(ids) >= 2:
            store.add_match(s, ids[0], 1)
            store.add_match(s, ids[1], 1)
        store.commit(s)
        s.close()
        return path

    def test_merge_empty_is_noop(self, tmp_path, session):
        empty = self.make_db(tmp_path, "empty.db", [], with_match=False)
        store.add_image(session, "a.jpg")
        before = store.dump_tables(session)
        report = modify.add_database(session, str(empty))
        assert (report.images_added, report.objects_added) == (0, 0)
        assert store.dump_tables(session) == before

    def test_self_merge_doubles_objects_with_disjoint_groups(self, tmp_path):
        images = [("a.jpg", [(0, 0, 5, 5), (10, 10, 5, 5)]), ("b.jpg", [(1, 1, 2, 2)])]
        path = self.make_db(tmp_path, "src.db", images)
        session = store.open_session(str(path), str(tmp_path / "merged.db"))
        report = modify.add_database(session, str(path))
        assert report.images_added == 0  # identical imagefiles unified
        assert report.objects_added == 3
        assert store.count_rows(session, "objects") == 6
        assert store.count_rows(session, "images") == 2
        assert store.validate_integrity(session) == []
        groups = {}
        for objectid, match in session.execute("SELECT objectid, match FROM matches"):
            groups.setdefault(match, set()).add(objectid)
        assert len(groups) == 2
        originals, merged = sorted(groups)
        assert not (groups[originals] & groups[merged])
        session.close()

    def test_object_counts_add_up(self, tmp_path, session):
        a = self.make_db(tmp_path, "a.db", [("a.jpg", [(0, 0, 1, 1)])], with_match=False)
        b = self.make_db(tmp_path, "b.db", [("b.jpg", [(0, 0, 1, 1), (2, 2, 1, 1)])], with_match=False)
        modify.add_database(session, str(a))
        modify.add_database(session, str(b))
        assert store.count_rows(session, "objects") == 3

    def test_conflicting_dimensions_abort_without_partial_merge(self, tmp_path, session):
        other = self.make_db(tmp_path, "other.db", [("shared.jpg", [(0, 0, 1, 1)])], with_match=False)
        store.add_image(session, "shared.jpg", width=999, height=999)
        before = store.dump_tables(session)
        with pytest.raises(AnnoDbError, match="shared.jpg"):
            modify.add_database(session, str(other))
        assert store.dump_tables(session) == before


class TestSplitDatabase:
    def populate(self, session, n):
        for i in range(n):
            store.add_image(session, f"i{i:03d}.jpg", width=10, height=10)
            add_boxed_object(session, f"i{i:03d}.jpg", (0, 0, 2, 2), name="car")

    def imagefiles_of(self, path):
        s = store.open_session(str(path))
        files = {im.imagefile for im in store.iterate_images(s)}
        s.close()
        return files

    def test_seventy_thirty(self, tmp_path, session):
        self.populate(session, 10)
        outs = [str(tmp_path / "train.db"), str(tmp_path / "test.db")]
        counts = modify.split_database(session, [0.7, 0.3], outs, seed=1)
        assert counts == [7, 3]
        train, test = self.imagefiles_of(outs[0]), self.imagefiles_of(outs[1])
        assert len(train) == 7 and len(test) == 3
        assert not (train & test)
        assert train | test == {im.imagefile for im in store.iterate_images(session)}

    def test_full_copy(self, tmp_path, session):
        self.populate(session, 5)
        out = tmp_path / "copy.db"
        counts = modify.split_database(session, [1.0], [str(out)], seed=0)
        assert counts == [5]
        copied = store.open_session(str(out))
        assert store.dump_tables(copied) == store.dump_tables(session)
        copied.close()

    def test_fractions_exceeding_one_rejected(self, tmp_path, session):
        self.populate(session, 4)
        with pytest.raises(ValueError, match="exceed"):
            modify.split_database(
                session, [0.7, 0.7], [str(tmp_path / "a.db"), str(tmp_path / "b.db")], seed=0
            )

    def test_name_count_mismatch_rejected(self, tmp_path, session):
        self.populate(session, 4)
        with pytest.raises(ValueError, match="length"):
            modify.split_database(session, [0.5, 0.5], [str(tmp_path / "a.db")], seed=0)

    def test_same_seed_reproduces(self, tmp_path, session):
        self.populate(session, 9)
        first = [str(tmp_path / "a1.db"), str(tmp_path / "b1.db")]
        second = [str(tmp_path / "a2.db"), str(tmp_path / "b2.db")]
        modify.split_database(session, [0.5, 0.5], first, seed=7)
        modify.split_database(session, [0.5, 0.5], second, seed=7)
        assert self.imagefiles_of(first[0]) == self.imagefiles_of(second[0])
        assert self.imagefiles_of(first[1]) == self.imagefiles_of(second[1])

    def test_dependents_follow_their_images(self, tmp_path, session):
        self.populate(session, 6)
        oid = next(store.iterate_objects(session)).object.objectid
        store.add_property(session, oid, "k", "v")
        outs = [str(tmp_path / "x.db"), str(tmp_path / "y.db")]
        modify.split_database(session, [0.5, 0.5], outs, seed=3)
        for out in outs:
            s = store.open_session(out)
            assert store.validate_integrity(s) == []
            assert store.count_rows(s, "objects") == 3
            s.close()


class TestCropObjects:
    def setup_image(self, tmp_path, session, width=100, height=80, gradient=False):
        session.rootdir = str(tmp_path)
        if gradient:
            gradient_png(tmp_path / "src.png", width, height)
        else:
            make_png(tmp_path / "src.png", width, height, seed=11)
        store.add_image(session, "src.png", width=width, height=height)

    def test_distort_same_size_pixel_identical(self, tmp_path, session):
        # gradient content so the only pixel error left is JPEG encoding noise
        self.setup_image(tmp_path, session, gradient=True)
        add_boxed_object(session, "src.png", (16, 8, 64, 64), name="car")
        source = media.read_image(str(tmp_path), "src.png")
        n = modify.crop_objects(session, 64, 64, media.DISTORT, str(tmp_path / "crops"))
        assert n == 1
        (entry,) = store.iterate_objects(session)
        crop = media.read_image(str(tmp_path), entry.object.imagefile)
        expected = source.data[8 : 8 + 64, 16 : 16 + 64]
        assert crop.data.shape == expected.shape
        assert np.max(np.abs(crop.data.astype(int) - expected.astype(int))) <= 3

    def test_rewritten_db_holds_one_object_per_crop(self, tmp_path, session):
        self.setup_image(tmp_path, session)
        a = add_boxed_object(session, "src.png", (0, 0, 32, 32), name="car", score=0.9)
        b = add_boxed_object(session, "src.png", (40, 40, 20, 20), name="bus")
        store.add_property(session, a, "color", "red")
        store.add_match(session, a, 1)
        store.add_match(session, b, 1)
        n = modify.crop_objects(session, 64, 64, media.DISTORT, str(tmp_path / "crops"))
        assert n == 2
        entries = list(store.iterate_objects(session))
        assert len(entries) == 2
        assert store.count_rows(session, "images") == 2
        for entry in entries:
            assert (entry.image.width, entry.image.height) == (64, 64)
            assert (entry.object.x, entry.object.y) == (0, 0)
            assert (entry.object.width, entry.object.height) == (64, 64)
            assert entry.object.imagefile.endswith(f"{entry.object.objectid}.jpg")
        by_name = {e.object.name: e for e in entries}
        assert {p.key: p.value for p in by_name["car"].properties} == {"color": "red"}
        assert by_name["car"].object.score == 0.9
        matches = session.execute("SELECT objectid, match FROM matches ORDER BY objectid").fetchall()
        assert matches == [(a, 1), (b, 1)]
        assert store.validate_integrity(session) == []

    def test_distort_stretch_scales_polygons(self, tmp_path, session):
        self.setup_image(tmp_path, session, gradient=True)
        oid = add_boxed_object(session, "src.png", (10, 10, 32, 64), name="car")
        store.add_polygon_point(session, oid, 10, 10)
        store.add_polygon_point(session, oid, 42, 74)
        store.add_polygon_point(session, oid, 26, 42)
        modify.crop_objects(session, 64, 64, media.DISTORT, str(tmp_path / "crops"))
        (entry,) = store.iterate_objects(session)
        # x scales by 64/32 = 2, y by 64/64 = 1
        assert [(p.x, p.y) for p in entry.polygon_points] == [(0, 0), (64, 64), (32, 32)]
        crop = media.read_image(str(tmp_path), entry.object.imagefile)
        assert (crop.width, crop.height) == (64, 64)

    def test_original_keeps_crop_size(self, tmp_path, session):
        self.setup_image(tmp_path, session)
        add_boxed_object(session, "src.png", (5, 5, 30, 20), name="car")
        modify.crop_objects(session, 64, 64, media.ORIGINAL, str(tmp_path / "crops"))
        (entry,) = store.iterate_objects(session)
        assert (entry.image.width, entry.image.height) == (30, 20)
        assert (entry.object.width, entry.object.height) == (30, 20)

    def test_constant_letterbox_content_region(self, tmp_path, session):
        self.setup_image(tmp_path, session)
        add_boxed_object(session, "src.png", (0, 0, 40, 20), name="car")
        modify.crop_objects(session, 64, 64, media.CONSTANT, str(tmp_path / "crops"))
        (entry,) = store.iterate_objects(session)
        assert (entry.image.width, entry.image.height) == (64, 64)
        assert (entry.object.x, entry.object.y) == (0, 16)
        assert (entry.object.width, entry.object.height) == (64, 32)

    def test_unreadable_image_skipped(self, tmp_path, session):
        self.setup_image(tmp_path, session)
        store.add_image(session, "missing.png", width=10, height=10)
        add_boxed_object(session, "src.png", (0, 0, 10, 10), name="ok")
        add_boxed_object(session, "missing.png", (0, 0, 5, 5), name="gone")
        n = modify.crop_objects(session, 16, 16, media.DISTORT, str(tmp_path / "crops"))
        assert n == 1
        names = [e.object.name for e in store.iterate_objects(session)]
        assert names == ["ok"]

    def test_zero_area_box_skipped(self, tmp_path, session):
        self.setup_image(tmp_path, session)
        add_boxed_object(session, "src.png", (0, 0, 0.2, 5), name="sliver")
        add_boxed_object(session, "src.png", (0, 0, 10, 10), name="ok")
        n = modify.crop_objects(session, 16, 16, media.DISTORT, str(tmp_path / "crops"))
        assert n == 1


def test_random_pipeline_keeps_integrity(tmp_path):
    rng = random.Random(5)
    session = store.open_session()
    for i in range(8):
        store.add_image(session, f"i{i}.jpg", width=100, height=100)
        for _ in range(rng.randint(0, 4)):
            x, y = rng.uniform(-5, 80), rng.uniform(-5, 80)
            add_boxed_object(session, f"i{i}.jpg", (x, y, rng.uniform(1, 30), rng.uniform(1, 30)))
    from annodb import filters

    modify.expand_boxes(session, 0.2)
    filters.filter_objects_by_intersection(session, 0.3)
    filters.filter_objects_at_border(session, 0.01)
    modify.clamp_boxes_to_image(session)
    filters.filter_empty_images(session)
    assert store.validate_integrity(session) == []
    session.close()
