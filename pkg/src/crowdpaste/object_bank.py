"""Cut object sprites out of (image, mask) pairs and persist them for reuse.

A bank directory holds one RGBA file per sprite under ``sprites/`` plus a
``manifest.json`` listing entries in load order, so banks stay inspectable
with any image viewer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotations import label_components
from .imgio import load_rgba, save_rgba

__all__ = [
    "SpriteObject",
    "BankEntry",
    "BankManifest",
    "BankError",
    "cut_sprites",
    "scale_sprite",
    "save_bank",
    "load_bank",
]

BANK_VERSION = 1
MANIFEST_NAME = "manifest.json"
SPRITES_SUBDIR = "sprites"


class BankError(RuntimeError):
    """Raised when a bank directory or one of its entries is unreadable."""


@dataclass
class SpriteObject:
    """A cut-out object: tight RGB patch plus a binary alpha of the same shape."""

    pixels: np.ndarray  # (h, w, 3) uint8
    alpha: np.ndarray   # (h, w) bool
    source_id: str

    def __post_init__(self) -> None:
        if self.pixels.shape[:2] != self.alpha.shape:
            raise ValueError(
                f"pixel/alpha shape mismatch: {self.pixels.shape} vs {self.alpha.shape}"
            )
        if not self.alpha.any():
            raise ValueError("sprite alpha has no foreground cells")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def base_size(self) -> int:
        """Max of width and height; the sprite's natural object size."""
        return max(self.width, self.height)


@dataclass(frozen=True)
class BankEntry:
    path: str  # relative to the bank directory
    source_id: str
    width: int
    height: int


@dataclass
class BankManifest:
    entries: list[BankEntry]
    bank_version: int = BANK_VERSION


def cut_sprites(
    image: np.ndarray,
    mask: np.ndarray,
    source_id: str,
    connectivity: int = 8,
    min_area: int = 1,
) -> list[SpriteObject]:
    """Cut one sprite per connected mask component, ordered by (y_min, x_min).

    Sprite pixels are copied from the image inside the component only;
    everything else in the tight crop is zeroed and alpha-false.
    """
    image = np.asarray(image)
    mask = np.asarray(mask).astype(bool)
    if image.shape[:2] != mask.shape:
        raise ValueError(
            f"image/mask dimensions differ: {image.shape[:2]} vs {mask.shape}"
        )
    labels, components = label_components(mask, connectivity)
    sprites = []
    for comp in components:
        if comp.area < min_area:
            continue
        box = comp.box
        patch_labels = labels[box.y_min:box.y_max, box.x_min:box.x_max]
        alpha = patch_labels == comp.label
        pixels = image[box.y_min:box.y_max, box.x_min:box.x_max].copy()
        pixels[~alpha] = 0
        sprites.append(SpriteObject(pixels, alpha, source_id))
    return sprites


def scale_sprite(sprite: SpriteObject, target_size: int) -> SpriteObject:
    """Nearest-neighbor rescale so the max dimension equals ``target_size``.

    Aspect ratio is preserved with the minor dimension rounded (at least 1);
    alpha is resampled the same way and stays binary.
    """
    if target_size < 1:
        raise ValueError(f"target_size must be >= 1, got {target_size}")
    if sprite.width >= sprite.height:
        new_w = target_size
        new_h = max(1, int(math.floor(sprite.height * target_size / sprite.width + 0.5)))
    else:
        new_h = target_size
        new_w = max(1, int(math.floor(sprite.width * target_size / sprite.height + 0.5)))

    rows = np.minimum(
        ((np.arange(new_h) + 0.5) * sprite.height / new_h).astype(np.int64),
        sprite.height - 1,
    )
    cols = np.minimum(
        ((np.arange(new_w) + 0.5) * sprite.width / new_w).astype(np.int64),
        sprite.width - 1,
    )
    pixels = sprite.pixels[rows][:, cols]
    alpha = sprite.alpha[rows][:, cols]
    if not alpha.any():
        # Sparse alphas can vanish under point sampling; fall back to block-any.
        edges_y = np.linspace(0, sprite.height, new_h + 1).astype(np.int64)
        edges_x = np.linspace(0, sprite.width, new_w + 1).astype(np.int64)
        alpha = np.array(
            [
                [
                    sprite.alpha[edges_y[i]:max(edges_y[i + 1], edges_y[i] + 1),
                                 edges_x[j]:max(edges_x[j + 1], edges_x[j] + 1)].any()
                    for j in range(new_w)
                ]
                for i in range(new_h)
            ],
            dtype=bool,
        )
    return SpriteObject(pixels.copy(), alpha.copy(), sprite.source_id)


def save_bank(sprites: list[SpriteObject], directory: Path | str) -> BankManifest:
    """Write sprites as RGBA files plus a manifest; returns the manifest.

    File names are deterministic: ``<source_id>_<k>.png`` with ``k`` counting
    sprites per source in list order, so repeated runs produce identical banks.
    """
    directory = Path(directory)
    sprites_dir = directory / SPRITES_SUBDIR
    sprites_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    per_source: dict[str, int] = {}
    for sprite in sprites:
        k = per_source.get(sprite.source_id, 0)
        per_source[sprite.source_id] = k + 1
        rel = f"{SPRITES_SUBDIR}/{sprite.source_id}_{k}.png"
        save_rgba(directory / rel, sprite.pixels, sprite.alpha)
        entries.append(BankEntry(rel, sprite.source_id, sprite.width, sprite.height))

    manifest = BankManifest(entries=entries)
    payload = {
        "bank_version": manifest.bank_version,
        "entries": [
            {"path": e.path, "source_id": e.source_id, "width": e.width, "height": e.height}
            for e in entries
        ],
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(payload, indent=2) + "\n")
    return manifest


def load_bank(directory: Path | str) -> list[SpriteObject]:
    """Load all sprites listed in a bank manifest, in manifest order."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise BankError(f"no bank manifest at {manifest_path}")
    payload = json.loads(manifest_path.read_text())

    sprites = []
    for entry in payload.get("entries", []):
        path = directory / entry["path"]
        try:
            pixels, alpha = load_rgba(path)
        except (OSError, ValueError) as exc:
            raise BankError(f"bank entry {entry['path']!r} unreadable: {exc}") from exc
        sprites.append(SpriteObject(pixels, alpha, entry["source_id"]))
    return sprites
