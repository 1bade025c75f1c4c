import numpy as np
import pytest
from PIL import Image

from mealseg import (
    BackendId,
    BackendKind,
    CategoryRegistry,
    MaskBitmap,
    Quantity,
    Unit,
    create_session,
)
from mealseg.errors import (
    DigestMismatch,
    DuplicateCategory,
    MissingFile,
    MissingMaskForImage,
    SchemaVersionUnsupported,
)
from mealseg.persistence import (
    load_category_file,
    load_eval_dataset,
    load_project,
    save_project,
)
from mealseg.session import AnnotationItem

from conftest import make_blob_dataset


class TestCategoryFile:
    def test_line_order_ids(self, tmp_path):
        path = tmp_path / "cats.txt"
        path.write_text("\n".join(f"cat{i}" for i in range(103)) + "\n")
        registry = load_category_file(path)
        assert len(registry) == 103
        assert [c.id for c in registry.entries] == list(range(103))

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "cats.txt"
        path.write_text("rice\n\n  \nchicken\n")
        registry = load_category_file(path)
        assert [c.name for c in registry.entries] == ["rice", "chicken"]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "cats.txt"
        path.write_text("")
        assert len(load_category_file(path)) == 0

    def test_case_insensitive_duplicate(self, tmp_path):
        path = tmp_path / "cats.txt"
        path.write_text("rice\nRice\n")
        with pytest.raises(DuplicateCategory):
            load_category_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_category_file(tmp_path / "nope.txt")


def random_session(rng, registry=None):
    h, w = int(rng.integers(4, 24)), int(rng.integers(4, 24))
    image = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    if registry is None:
        registry = CategoryRegistry.from_names(["rice", "chicken", "salad"])
    session = create_session(
        image,
        backend=BackendId(kind=BackendKind.REGION_GROW),
        registry=registry,
        source_filename="meal.png",
    )
    for item_id in range(int(rng.integers(0, 4))):
        mask = MaskBitmap(rng.random((h, w)) < 0.4)
        if mask.foreground_count == 0:
            mask.data[0, 0] = True
        quantity = None
        if rng.integers(0, 2):
            quantity = Quantity(
                float(np.round(rng.random() * 500, 2)),
                Unit.GRAM if rng.integers(0, 2) else Unit.MILLILITER,
            )
        session.items.append(
            AnnotationItem(
                item_id=item_id,
                mask=mask,
                category_id=int(rng.integers(0, len(registry))),
                quantity=quantity,
            )
        )
    session._next_item_id = len(session.items)
    return session


class TestProjectRoundTrip:
    def test_round_trip_preserves_everything(self, tmp_path):
        rng = np.random.default_rng(23)
        for i in range(25):
            session = random_session(rng)
            project_dir = tmp_path / f"p{i}"
            save_project(session, project_dir)
            loaded = load_project(project_dir)
            assert np.array_equal(loaded.image, session.image)
            assert loaded.source_filename == session.source_filename
            assert loaded.backend.kind == session.backend.kind
            assert [
                (c.id, c.name, c.color, c.source) for c in loaded.registry.entries
            ] == [(c.id, c.name, c.color, c.source) for c in session.registry.entries]
            assert len(loaded.items) == len(session.items)
            for got, want in zip(loaded.items, session.items):
                assert got.item_id == want.item_id
                assert got.category_id == want.category_id
                assert got.quantity == want.quantity
                assert got.mask == want.mask
            assert loaded.pending_points == []
            assert loaded.pending_mask is None

    def test_written_files_exist(self, tmp_path, session):
        result = save_project(session, tmp_path / "proj")
        assert (tmp_path / "proj" / "project.json").is_file()
        assert (tmp_path / "proj" / "image.png").is_file()
        assert (tmp_path / "proj" / "overlay.png").is_file()
        assert result["total_annotation_seconds"] >= 0

    def test_digest_mismatch_on_edited_image(self, tmp_path, session):
        save_project(session, tmp_path / "proj")
        image_path = tmp_path / "proj" / "image.png"
        pixels = np.asarray(Image.open(image_path)).copy()
        pixels[0, 0, 0] ^= 255
        Image.fromarray(pixels).save(image_path)
        with pytest.raises(DigestMismatch):
            load_project(tmp_path / "proj")

    def test_unsupported_schema_version(self, tmp_path, session):
        save_project(session, tmp_path / "proj")
        doc_path = tmp_path / "proj" / "project.json"
        doc_path.write_text(doc_path.read_text().replace('"schema_version": 1', '"schema_version": 99'))
        with pytest.raises(SchemaVersionUnsupported):
            load_project(tmp_path / "proj")

    def test_missing_project_doc(self, tmp_path):
        with pytest.raises(MissingFile):
            load_project(tmp_path)

    def test_overlay_has_blended_regions(self, tmp_path, session, square_mask):
        from mealseg import Polarity, PromptPoint

        session.add_point(PromptPoint(15, 15))
        session.semi_segment()
        session.validate_item(0)
        save_project(session, tmp_path / "proj")
        overlay = np.asarray(Image.open(tmp_path / "proj" / "overlay.png"))
        assert not np.array_equal(overlay, session.image)
        # blended exactly on the committed mask
        assert np.array_equal(
            overlay[~square_mask], session.image[~square_mask]
        )


class TestEvalDataset:
    def test_per_class_split(self, tmp_path):
        images = tmp_path / "images"
        masks = tmp_path / "masks"
        images.mkdir()
        masks.mkdir()
        Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(images / "a.png")
        raster = np.zeros((8, 8), dtype=np.uint8)
        raster[0:2, 0:2] = 5
        raster[5:7, 5:7] = 17
        Image.fromarray(raster).save(masks / "a.png")
        dataset = load_eval_dataset(images, masks)
        assert len(dataset) == 1
        name, _pixels, class_masks = dataset[0]
        assert name == "a"
        assert [cid for cid, _ in class_masks] == [5, 17]
        assert class_masks[0][1].foreground_count == 4

    def test_background_only_raster(self, tmp_path):
        images = tmp_path / "images"
        masks = tmp_path / "masks"
        images.mkdir()
        masks.mkdir()
        Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(images / "a.png")
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(masks / "a.png")
        dataset = load_eval_dataset(images, masks)
        assert dataset[0][2] == []

    def test_missing_mask(self, tmp_path):
        images = tmp_path / "images"
        masks = tmp_path / "masks"
        images.mkdir()
        masks.mkdir()
        Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(images / "a.png")
        with pytest.raises(MissingMaskForImage):
            load_eval_dataset(images, masks)

    def test_mask_count_matches_pairs(self, tmp_path):
        images_dir, masks_dir, _ = make_blob_dataset(tmp_path, count=10)
        dataset = load_eval_dataset(images_dir, masks_dir)
        assert sum(len(cm) for _, _, cm in dataset) == 10
