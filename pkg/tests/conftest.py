import numpy as np
import pytest
from PIL import Image

from mealseg import BackendId, BackendKind, CategoryRegistry, create_session
from mealseg.backends import load_backend


@pytest.fixture
def square_image():
    """64x64 white image with a uniform 20x20 red square at (10, 10)."""
    img = np.full((64, 64, 3), 255, dtype=np.uint8)
    img[10:30, 10:30] = (200, 30, 30)
    return img


@pytest.fixture
def square_mask():
    mask = np.zeros((64, 64), dtype=bool)
    mask[10:30, 10:30] = True
    return mask


@pytest.fixture
def region_grow_handle():
    return load_backend(BackendId(kind=BackendKind.REGION_GROW))


@pytest.fixture
def registry():
    return CategoryRegistry.from_names(["rice", "chicken", "salad"])


@pytest.fixture
def session(square_image, registry, region_grow_handle):
    return create_session(
        square_image,
        backend=BackendId(kind=BackendKind.REGION_GROW),
        registry=registry,
        handle=region_grow_handle,
    )


def make_blob_dataset(root, count=20, size=48, rng_seed=0):
    """Synthetic dataset: one uniform color blob per image on a contrasting
    background, with the matching indexed mask raster."""
    rng = np.random.default_rng(rng_seed)
    images_dir = root / "images"
    masks_dir = root / "masks"
    images_dir.mkdir(parents=True)
    masks_dir.mkdir(parents=True)
    blobs = {}
    for i in range(count):
        img = np.full((size, size, 3), 240, dtype=np.uint8)
        w = int(rng.integers(8, size // 2))
        h = int(rng.integers(8, size // 2))
        x0 = int(rng.integers(1, size - w - 1))
        y0 = int(rng.integers(1, size - h - 1))
        color = tuple(int(c) for c in rng.integers(0, 160, size=3))
        img[y0 : y0 + h, x0 : x0 + w] = color
        raster = np.zeros((size, size), dtype=np.uint8)
        raster[y0 : y0 + h, x0 : x0 + w] = 1
        name = f"img{i:03d}"
        Image.fromarray(img).save(images_dir / f"{name}.png")
        Image.fromarray(raster).save(masks_dir / f"{name}.png")
        blobs[name] = (x0, y0, w, h)
    return images_dir, masks_dir, blobs
