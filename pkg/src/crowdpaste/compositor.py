"""Turn a paste plan plus a base image into an augmented sample.

Sprites are rescaled (nearest-neighbor, so the binary alpha stays crisp),
optionally hue/saturation jittered over their foreground pixels, and pasted
in plan order — later objects occlude earlier ones and the base image. The
emitted labels are the original labels plus one label per visible pasted
object, tight around the pixels that were actually drawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from matplotlib.colors import hsv_to_rgb, rgb_to_hsv

from .annotations import NormalizedLabel, to_normalized
from .object_bank import SpriteObject, scale_sprite
from .placement import (
    DEFAULT_VISIBILITY_THRESHOLD,
    PastePlan,
    paste_origin,
    realize_objects,
)
from .sampling import RngStream

__all__ = ["ColorJitter", "AugmentedSample", "scale_sprite", "jitter_colors", "composite"]

PASTED_CLASS_ID = 0


@dataclass
class ColorJitter:
    """Hue/saturation shift applied to pasted sprites (foreground pixels only)."""

    hue_shift_deg: float = 60.0      # positive shifts red toward yellow-green
    saturation_scale: float = 1.0
    apply_probability: float = 1.0

    def validate(self) -> None:
        if self.saturation_scale <= 0:
            raise ValueError(f"saturation_scale must be positive, got {self.saturation_scale}")
        if not 0.0 <= self.apply_probability <= 1.0:
            raise ValueError(f"apply_probability must be in [0, 1], got {self.apply_probability}")


@dataclass
class AugmentedSample:
    image: np.ndarray                  # (h, w, 3) uint8
    labels: list[NormalizedLabel]      # surviving originals + pasted objects
    provenance: PastePlan


def jitter_colors(sprite: SpriteObject, jitter: ColorJitter, rng: RngStream) -> SpriteObject:
    """Rotate hue and scale saturation of a sprite's foreground pixels.

    Consumes exactly one rng draw for the apply decision regardless of the
    outcome, so downstream draws stay aligned.
    """
    applied = rng.random() < jitter.apply_probability
    if not applied or (jitter.hue_shift_deg % 360.0 == 0.0 and jitter.saturation_scale == 1.0):
        return sprite
    fg = sprite.pixels[sprite.alpha].astype(np.float64) / 255.0
    hsv = rgb_to_hsv(fg)
    hsv[:, 0] = (hsv[:, 0] + jitter.hue_shift_deg / 360.0) % 1.0
    hsv[:, 1] = np.clip(hsv[:, 1] * jitter.saturation_scale, 0.0, 1.0)
    rgb = np.clip(np.floor(hsv_to_rgb(hsv) * 255.0 + 0.5), 0, 255).astype(np.uint8)
    pixels = sprite.pixels.copy()
    pixels[sprite.alpha] = rgb
    return SpriteObject(pixels, sprite.alpha.copy(), sprite.source_id)


def composite(
    base: np.ndarray,
    base_labels: list[NormalizedLabel],
    plan: PastePlan,
    bank: list[SpriteObject],
    jitter: ColorJitter,
    rng: RngStream,
    visibility_threshold: float = DEFAULT_VISIBILITY_THRESHOLD,
) -> AugmentedSample:
    """Render a plan onto a base image and merge the labels.

    Original labels pass through untouched (occlusion by pasted objects does
    not revoke them); pasted objects get labels only when enough of them
    stays in frame after boundary clipping.
    """
    height, width = base.shape[:2]
    if (width, height) != (plan.image_w, plan.image_h):
        raise ValueError(
            f"plan was made for {plan.image_w}x{plan.image_h} "
            f"but the base image is {width}x{height}"
        )

    out = base.copy()
    realized = realize_objects(plan, bank, width, height, visibility_threshold)
    pasted_labels = []
    for record in realized:  # already in paste order
        obj = record.obj
        scaled = scale_sprite(bank[obj.sprite_ref], obj.size)
        tinted = jitter_colors(scaled, jitter, rng)
        ox, oy = paste_origin(obj.x, obj.y, tinted.width, tinted.height)
        sx0, sy0 = max(-ox, 0), max(-oy, 0)
        sx1 = min(tinted.width, width - ox)
        sy1 = min(tinted.height, height - oy)
        if sx1 > sx0 and sy1 > sy0:
            patch = tinted.pixels[sy0:sy1, sx0:sx1]
            patch_alpha = tinted.alpha[sy0:sy1, sx0:sx1]
            region = out[oy + sy0:oy + sy1, ox + sx0:ox + sx1]
            region[patch_alpha] = patch[patch_alpha]
        if record.visible and record.box is not None:
            pasted_labels.append(to_normalized(record.box, width, height, PASTED_CLASS_ID))

    return AugmentedSample(out, list(base_labels) + pasted_labels, plan)
