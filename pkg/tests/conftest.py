from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import pytest
import yaml
from PIL import Image

from crowdpaste.imgio import save_image
from crowdpaste.object_bank import SpriteObject


def solid_sprite(width: int, height: int, color=(200, 60, 60), source_id="sprite") -> SpriteObject:
    pixels = np.zeros((height, width, 3), np.uint8)
    pixels[:] = color
    return SpriteObject(pixels, np.ones((height, width), bool), source_id)


def make_solid_bank(specs) -> list[SpriteObject]:
    """Bank of full-alpha rectangles, one per (width, height, color) spec."""
    return [solid_sprite(w, h, c, f"bank{i}") for i, (w, h, c) in enumerate(specs)]


def write_dataset(root: Path, n_images: int, width=128, height=96, seed=0) -> Path:
    """Synthetic dataset: noise images plus masks with two solid blobs each."""
    images = root / "data" / "images"
    masks = root / "data" / "masks"
    images.mkdir(parents=True, exist_ok=True)
    masks.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for i in range(n_images):
        img = rng.integers(0, 255, (height, width, 3), dtype=np.uint8)
        mask = np.zeros((height, width), np.uint8)
        bw, bh = int(rng.integers(12, 28)), int(rng.integers(10, 22))
        x0, y0 = int(rng.integers(0, width - bw)), int(rng.integers(0, height - bh))
        mask[y0:y0 + bh, x0:x0 + bw] = 255
        bw2, bh2 = int(rng.integers(10, 20)), int(rng.integers(8, 16))
        x2 = int(rng.integers(0, width - bw2))
        y2 = int(rng.integers(0, height - bh2))
        mask[y2:y2 + bh2, x2:x2 + bw2] = 255
        save_image(images / f"im{i:02d}.png", img)
        Image.fromarray(mask, mode="L").save(masks / f"im{i:02d}.png")
    return root / "data"


def write_config(path: Path, dataset_root: Path, output_root: Path, **overrides) -> Path:
    data = {
        "dataset_root": str(dataset_root),
        "output_root": str(output_root),
        "master_seed": 1234,
    }
    data.update(overrides)
    path.write_text(yaml.safe_dump(data))
    return path


def tree_digest(root: Path) -> dict[str, str]:
    """Relative path -> content hash for every file under ``root``."""
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


@pytest.fixture
def two_blob_mask() -> np.ndarray:
    mask = np.zeros((8, 8), bool)
    mask[1:3, 1:3] = True
    mask[5:7, 5:7] = True
    return mask
