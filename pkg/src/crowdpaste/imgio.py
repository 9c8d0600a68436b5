"""Image file helpers: RGB images, binary masks, RGBA sprites.

All arrays are uint8 (or bool for masks/alpha), shaped (height, width[, channels]).
Masks are thresholded at 127: any pixel value above is foreground.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

MASK_FOREGROUND_THRESHOLD = 127


def load_image(path: Path | str) -> np.ndarray:
    """Load an image as an (h, w, 3) uint8 RGB array."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def load_mask(path: Path | str) -> np.ndarray:
    """Load a single-channel mask as an (h, w) boolean array."""
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"))
    return gray > MASK_FOREGROUND_THRESHOLD


def save_image(path: Path | str, pixels: np.ndarray) -> None:
    """Save an (h, w, 3) uint8 RGB array as PNG (deterministic bytes)."""
    Image.fromarray(pixels, mode="RGB").save(path, format="PNG")


def save_rgba(path: Path | str, pixels: np.ndarray, alpha: np.ndarray) -> None:
    """Save RGB pixels plus a boolean alpha as an RGBA PNG."""
    rgba = np.dstack([pixels, alpha.astype(np.uint8) * 255])
    Image.fromarray(rgba, mode="RGBA").save(path, format="PNG")


def load_rgba(path: Path | str) -> tuple[np.ndarray, np.ndarray]:
    """Load an RGBA file back into (rgb pixels, boolean alpha)."""
    with Image.open(path) as img:
        rgba = np.asarray(img.convert("RGBA"))
    return rgba[:, :, :3].copy(), rgba[:, :, 3] > MASK_FOREGROUND_THRESHOLD


def find_image_for_stem(directory: Path, stem: str) -> Path | None:
    """Locate ``stem.<ext>`` in a directory for any supported extension."""
    for ext in IMAGE_EXTENSIONS:
        candidate = directory / f"{stem}{ext}"
        if candidate.exists():
            return candidate
    return None


def list_image_stems(directory: Path) -> list[str]:
    """Sorted stems of all image files directly inside a directory."""
    stems = {
        p.stem for p in directory.iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS and p.is_file()
    }
    return sorted(stems)
