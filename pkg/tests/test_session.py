import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mealseg import (
    BackendId,
    BackendKind,
    BrushMode,
    CategoryRegistry,
    MaskBitmap,
    Polarity,
    PromptPoint,
    Quantity,
    Unit,
    create_session,
)
from mealseg.backends import load_backend
from mealseg.errors import (
    EmptyMask,
    EmptyPrompt,
    InvalidQuantity,
    NoPendingMask,
    NothingToUndo,
    OutOfBounds,
    UnknownCategory,
    UnknownItem,
    UnsupportedExcludePoint,
)


def disc_oracle(cx, cy, radius, width, height):
    """Enumerate pixels with Euclidean distance <= radius of the center."""
    pixels = set()
    for y in range(height):
        for x in range(width):
            if (x - cx) ** 2 + (y - cy) ** 2 <= radius**2:
                pixels.add((x, y))
    return pixels


class TestCreateSession:
    def test_default_backend_is_mealsam(self, square_image):
        s = create_session(square_image)
        assert s.backend.kind is BackendKind.MEAL_SAM

    def test_explicit_backend(self, session):
        assert session.backend.kind is BackendKind.REGION_GROW

    def test_zero_size_image_rejected(self):
        with pytest.raises(ValueError):
            create_session(np.zeros((0, 0, 3), dtype=np.uint8))


class TestPoints:
    def test_add_point(self, session):
        session.add_point(PromptPoint(10, 10))
        assert session.pending_points == [PromptPoint(10, 10)]

    def test_out_of_bounds(self, session):
        with pytest.raises(OutOfBounds):
            session.add_point(PromptPoint(64, 10))

    def test_exclude_under_mealsam(self, square_image, registry):
        s = create_session(
            square_image, backend=BackendId(kind=BackendKind.MEAL_SAM), registry=registry
        )
        with pytest.raises(UnsupportedExcludePoint):
            s.add_point(PromptPoint(5, 5, Polarity.EXCLUDE))

    def test_add_point_invalidates_pending_mask(self, session):
        session.add_point(PromptPoint(15, 15))
        session.semi_segment()
        assert session.pending_mask is not None
        session.add_point(PromptPoint(16, 16))
        assert session.pending_mask is None


class TestUndoClear:
    def test_add_then_undo(self, session):
        session.add_point(PromptPoint(10, 10))
        session.undo_last()
        assert session.pending_points == []

    def test_undo_on_fresh_session(self, session):
        with pytest.raises(NothingToUndo):
            session.undo_last()

    def test_clear_then_undo_restores_order(self, session):
        points = [PromptPoint(1, 1), PromptPoint(2, 2), PromptPoint(3, 3)]
        for p in points:
            session.add_point(p)
        session.clear_points()
        assert session.pending_points == []
        session.undo_last()
        assert session.pending_points == points

    def test_clear_on_empty_is_noop(self, session):
        session.clear_points()
        assert session.undo_depth == 0

    def test_brush_undo_bit_identical(self, session):
        session.add_point(PromptPoint(15, 15))
        session.semi_segment()
        before = session.pending_mask.digest()
        session.brush_stroke([(5, 5), (40, 40)], radius=3, mode=BrushMode.ERASE)
        assert session.pending_mask.digest() != before
        session.undo_last()
        assert session.pending_mask.digest() == before


class TestSemiSegment:
    def test_region_grow_blob(self, session, square_mask):
        session.add_point(PromptPoint(15, 15))
        prediction = session.semi_segment()
        assert np.array_equal(prediction.mask.data, square_mask)
        assert np.array_equal(session.pending_mask.data, square_mask)

    def test_deterministic_repeat(self, session):
        session.add_point(PromptPoint(15, 15))
        a = session.semi_segment()
        b = session.semi_segment()
        assert a.mask == b.mask

    def test_no_include_points(self, session):
        with pytest.raises(EmptyPrompt):
            session.semi_segment()


class TestBrush:
    def _segmented(self, session):
        session.add_point(PromptPoint(15, 15))
        session.semi_segment()
        return session

    def test_requires_pending_mask(self, session):
        with pytest.raises(NoPendingMask):
            session.brush_stroke([(1, 1)], radius=2, mode=BrushMode.ADD)

    def test_erase_everything(self, session):
        self._segmented(session)
        for y in range(0, 64, 2):
            session.brush_stroke([(0, y), (63, y)], radius=2, mode=BrushMode.ERASE)
        assert session.pending_mask.foreground_count == 0

    def test_add_then_erase_inverse_on_empty_region(self, session):
        self._segmented(session)
        before = session.pending_mask.copy()
        path, radius = [(50, 50), (55, 55)], 3
        session.brush_stroke(path, radius=radius, mode=BrushMode.ADD)
        session.brush_stroke(path, radius=radius, mode=BrushMode.ERASE)
        assert session.pending_mask == before

    def test_single_point_radius_one_disc(self, session):
        self._segmented(session)
        session.pending_mask.data[:] = False
        session.brush_stroke([(50, 50)], radius=1, mode=BrushMode.ADD)
        stamped = {tuple(p) for p in np.argwhere(session.pending_mask.data)[:, ::-1]}
        assert stamped == disc_oracle(50, 50, 1, 64, 64)
        assert len(stamped) == 5

    def test_disc_matches_oracle_for_radii(self, session):
        self._segmented(session)
        for radius in (1, 2, 3, 5):
            session.pending_mask.data[:] = False
            session.brush_stroke([(30, 30)], radius=radius, mode=BrushMode.ADD)
            stamped = {tuple(p) for p in np.argwhere(session.pending_mask.data)[:, ::-1]}
            assert stamped == disc_oracle(30, 30, radius, 64, 64)


class TestValidateDelete:
    def _ready(self, session):
        session.add_point(PromptPoint(15, 15))
        session.semi_segment()
        return session

    def test_validate_with_quantity(self, session):
        self._ready(session)
        item = session.validate_item(0, Quantity(150.0, Unit.GRAM))
        assert item.quantity == Quantity(150.0, Unit.GRAM)
        assert session.items == [item]
        assert session.pending_points == []
        assert session.pending_mask is None
        assert session.undo_depth == 0

    def test_negative_quantity(self, session):
        self._ready(session)
        with pytest.raises(InvalidQuantity):
            session.validate_item(0, Quantity(-5.0, Unit.GRAM))

    def test_validate_after_erase_all(self, session):
        self._ready(session)
        session.pending_mask.data[:] = False
        with pytest.raises(EmptyMask):
            session.validate_item(0)

    def test_unknown_category(self, session):
        self._ready(session)
        with pytest.raises(UnknownCategory):
            session.validate_item(99)

    def test_validate_without_mask(self, session):
        with pytest.raises(NoPendingMask):
            session.validate_item(0)

    def test_item_ids_stable_after_delete(self, session):
        for _ in range(2):
            self._ready(session)
            session.validate_item(0)
        assert [i.item_id for i in session.items] == [0, 1]
        session.delete_item(0)
        assert [i.item_id for i in session.items] == [1]

    def test_delete_only_item(self, session):
        self._ready(session)
        session.validate_item(0)
        session.delete_item(0)
        assert session.items == []

    def test_delete_unknown(self, session):
        with pytest.raises(UnknownItem):
            session.delete_item(5)


class TestOverlay:
    def test_identity_with_no_items(self, session, square_image):
        assert np.array_equal(session.composite_overlay(), square_image)

    def test_full_mask_blend_formula(self, registry, region_grow_handle):
        image = np.full((4, 4, 3), 100, dtype=np.uint8)
        s = create_session(
            image,
            backend=BackendId(kind=BackendKind.REGION_GROW),
            registry=registry,
            handle=region_grow_handle,
        )
        s.add_point(PromptPoint(0, 0))
        s.semi_segment()  # uniform image: full mask
        s.validate_item(0)
        color = registry.get(0).color
        expected = np.array(
            [(100 + c + 1) // 2 for c in color], dtype=np.uint8
        )  # round-half-up of the 0.5 blend
        out = s.composite_overlay()
        assert np.array_equal(out, np.broadcast_to(expected, (4, 4, 3)))

    def test_overlap_later_item_wins(self, registry):
        image = np.full((4, 4, 3), 100, dtype=np.uint8)
        s = create_session(
            image, backend=BackendId(kind=BackendKind.REGION_GROW), registry=registry
        )
        mask_a = MaskBitmap.zeros(4, 4)
        mask_a.data[0:3, 0:3] = True
        mask_b = MaskBitmap.zeros(4, 4)
        mask_b.data[1:4, 1:4] = True
        s.pending_mask = mask_a
        s.validate_item(0)
        s.pending_mask = mask_b
        s.validate_item(1)
        c0, c1 = registry.get(0).color, registry.get(1).color
        out = s.composite_overlay()
        # overlap pixel (2,2) shows item 1's blend
        assert tuple(out[2, 2]) == tuple((100 + c + 1) // 2 for c in c1)
        # non-overlap pixel (0,0) keeps item 0's blend
        assert tuple(out[0, 0]) == tuple((100 + c + 1) // 2 for c in c0)

    def test_pending_highlight_white(self, session, square_image):
        session.add_point(PromptPoint(15, 15))
        session.semi_segment()
        out = session.composite_overlay(include_pending=True)
        expected = tuple((int(v) + 255 + 1) // 2 for v in square_image[15, 15])
        assert tuple(out[15, 15]) == expected
        assert np.array_equal(session.composite_overlay(include_pending=False), square_image)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), steps=st.integers(1, 25))
def test_full_undo_restores_initial_pending_state(seed, steps):
    rng = np.random.default_rng(seed)
    image = np.full((32, 32, 3), 255, dtype=np.uint8)
    image[8:20, 8:20] = (50, 50, 200)
    registry = CategoryRegistry.from_names(["food"])
    handle = load_backend(BackendId(kind=BackendKind.REGION_GROW))
    s = create_session(
        image,
        backend=BackendId(kind=BackendKind.REGION_GROW),
        registry=registry,
        handle=handle,
    )
    for _ in range(steps):
        op = rng.integers(0, 5)
        if op == 0:
            s.add_point(PromptPoint(int(rng.integers(0, 32)), int(rng.integers(0, 32))))
        elif op == 1:
            s.clear_points()
        elif op == 2 and s.pending_mask is not None:
            path = [
                (int(rng.integers(0, 32)), int(rng.integers(0, 32))) for _ in range(3)
            ]
            s.brush_stroke(path, radius=int(rng.integers(1, 5)),
                           mode=BrushMode.ADD if rng.integers(0, 2) else BrushMode.ERASE)
        elif op == 3 and any(p.polarity is Polarity.INCLUDE for p in s.pending_points):
            s.semi_segment()
        elif op == 4 and s.undo_depth > 0:
            s.undo_last()
    while s.undo_depth > 0:
        s.undo_last()
    assert s.pending_points == []
    assert s.pending_mask is None
    assert s.items == []
