"""Placement engines producing geometric paste plans (no pixels).

Two engines share the same plan format:

* ``plan_psada`` — group centers appear anywhere in the frame (Poisson group
  count), and object positions are annealed: a candidate far from its center
  is accepted with probability exp(-d/T), and T decays geometrically with
  every pasted object, so early objects scatter while later ones pack tight.
* ``plan_deng`` — the baseline: group centers are drawn from objects already
  in the image, group and object counts are uniform, and every object is
  re-proposed until it overlaps its group center.

Plans are pure functions of (dimensions, existing boxes, bank size, params,
rng stream) and serialize to JSON so any composited output can be audited or
replayed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .annotations import BoundingBox
from .object_bank import SpriteObject, scale_sprite
from .sampling import (
    DengParams,
    PsadaParams,
    RngStream,
    acceptance_probability,
    next_temperature,
    sample_group_count,
    sample_size,
    sample_window,
)

__all__ = [
    "GroupCenter",
    "PlacedObject",
    "PlanGroup",
    "PastePlan",
    "plan_psada",
    "plan_deng",
    "RealizedObject",
    "realize_objects",
    "realized_boxes",
    "save_plan",
    "load_plan",
    "paste_origin",
    "group_center_box",
]

MAX_PROPOSALS = 20
MIN_PLAN_DIM = 64
DEFAULT_VISIBILITY_THRESHOLD = 0.25

BRANCH_OVERLAP = "overlap"
BRANCH_ANNEAL = "anneal"
BRANCH_CLAMPED = "clamped"


@dataclass(frozen=True)
class GroupCenter:
    """A cluster seed: position plus the object size anchoring the group."""

    x: int
    y: int
    size: int


@dataclass(frozen=True)
class PlacedObject:
    sprite_ref: int      # index into the bank
    x: int               # paste center
    y: int
    size: int            # target max-dimension after scaling
    group_index: int
    paste_order: int     # global order; cooling follows it
    accept_branch: str   # overlap | anneal | clamped
    temperature: float | None  # temperature in effect when placed (annealing only)


@dataclass
class PlanGroup:
    center: GroupCenter
    objects: list[PlacedObject]


@dataclass
class PastePlan:
    image_id: str
    image_w: int
    image_h: int
    engine: str
    groups: list[PlanGroup]
    params_used: PsadaParams | DengParams
    seed_info: tuple[int, int]  # (master_seed, stream_index)
    source_stem: str = ""
    sample_index: int = 0

    def objects(self) -> list[PlacedObject]:
        """All placed objects in global paste order."""
        out = [obj for group in self.groups for obj in group.objects]
        out.sort(key=lambda o: o.paste_order)
        return out

    def total_objects(self) -> int:
        return sum(len(g.objects) for g in self.groups)


def _iround(value: float) -> int:
    return int(math.floor(value + 0.5))


def paste_origin(center_x: int, center_y: int, width: int, height: int) -> tuple[int, int]:
    """Top-left corner of a width x height patch centered at a pixel.

    The covered pixel range always contains the center pixel itself, which is
    what makes center-in-box placement guarantees carry over to realized boxes.
    """
    return _iround(center_x - width / 2), _iround(center_y - height / 2)


def group_center_box(center: GroupCenter, image_w: int, image_h: int) -> BoundingBox:
    """The group center's own box: a size x size square clipped to the frame."""
    ox, oy = paste_origin(center.x, center.y, center.size, center.size)
    x0, y0 = max(ox, 0), max(oy, 0)
    x1 = min(ox + center.size, image_w)
    y1 = min(oy + center.size, image_h)
    if x1 <= x0 or y1 <= y0:
        raise ValueError(f"group center {center} lies outside the {image_w}x{image_h} frame")
    return BoundingBox(x0, y0, x1 - x0, y1 - y0)


def _empty_plan(
    image_id: str,
    image_w: int,
    image_h: int,
    engine: str,
    params: PsadaParams | DengParams,
    rng: RngStream,
) -> PastePlan:
    return PastePlan(
        image_id=image_id,
        image_w=image_w,
        image_h=image_h,
        engine=engine,
        groups=[],
        params_used=params,
        seed_info=(rng.master_seed, rng.stream_index),
    )


def _place_into_box(
    rng: RngStream,
    center: GroupCenter,
    target_box: BoundingBox,
    tau: float,
    epsilon: float,
    temperature: float | None,
) -> tuple[int, int, str]:
    """Propose positions in the crowdedness window until one lands in the box.

    Acceptance requires the candidate center pixel to fall inside
    ``target_box``; when a temperature is given, far candidates may also be
    accepted with probability exp(-d/T), d being the center distance
    normalized by the window half-width. After MAX_PROPOSALS rejections the
    last candidate is clamped into the box so placement always terminates.
    """
    px, py = center.x, center.y  # placeholder; loop always runs at least once
    for _ in range(MAX_PROPOSALS):
        fx, fy = sample_window(rng, center.x, center.y, center.size, center.size, tau, epsilon)
        px, py = _iround(fx), _iround(fy)
        if target_box.contains_point(px, py):
            return px, py, BRANCH_OVERLAP
        if temperature is not None:
            dist = math.hypot(fx - center.x, fy - center.y) / (tau * center.size)
            if rng.random() < acceptance_probability(dist, temperature):
                return px, py, BRANCH_ANNEAL
    px = min(max(px, target_box.x_min), target_box.x_max - 1)
    py = min(max(py, target_box.y_min), target_box.y_max - 1)
    return px, py, BRANCH_CLAMPED


def plan_psada(
    image_w: int,
    image_h: int,
    bank_size: int,
    params: PsadaParams,
    rng: RngStream,
    image_id: str = "",
) -> PastePlan:
    """Plan annealing-based crowded placements for one image.

    The group count is Poisson(lam); group centers are uniform over the frame
    interior with uniformly drawn sizes. Each group receives between 1 and
    ceil(max_objects / group_count) objects, Gaussian-sized around the center
    size, and the global object budget ``max_objects`` is never exceeded
    (groups beyond an exhausted budget are dropped). Placement cools by
    ``gamma`` per pasted object across the whole image.
    """
    params.validate()
    if image_w < MIN_PLAN_DIM or image_h < MIN_PLAN_DIM:
        raise ValueError(
            f"image must be at least {MIN_PLAN_DIM}x{MIN_PLAN_DIM}, got {image_w}x{image_h}"
        )
    if bank_size < 1:
        raise ValueError("bank is empty; build it before planning")

    plan = _empty_plan(image_id, image_w, image_h, "psada", params, rng)
    n_groups = sample_group_count(rng, params.lam)
    if n_groups == 0:
        return plan

    margin = params.min_size_px / 2
    size_cap = min(image_w, image_h) / 4
    centers = []
    for _ in range(n_groups):
        cx = _iround(rng.uniform(margin, image_w - margin))
        cy = _iround(rng.uniform(margin, image_h - margin))
        size = max(params.min_size_px, _iround(rng.uniform(params.min_size_px, size_cap)))
        centers.append(GroupCenter(cx, cy, size))

    per_group_max = math.ceil(params.max_objects / n_groups)
    budget = params.max_objects
    temperature = params.t0
    paste_order = 0

    for group_index, center in enumerate(centers):
        if budget == 0:
            break
        count = min(rng.integers(1, per_group_max + 1), budget)
        target_box = group_center_box(center, image_w, image_h)
        objects = []
        for _ in range(count):
            sprite_ref = rng.integers(0, bank_size)
            size = sample_size(rng, center.size, params.sigma_px, params.min_size_px)
            px, py, branch = _place_into_box(
                rng, center, target_box, params.tau, params.epsilon, temperature
            )
            objects.append(
                PlacedObject(
                    sprite_ref=sprite_ref,
                    x=px,
                    y=py,
                    size=size,
                    group_index=group_index,
                    paste_order=paste_order,
                    accept_branch=branch,
                    temperature=temperature,
                )
            )
            paste_order += 1
            temperature = next_temperature(temperature, params.gamma)
        budget -= count
        plan.groups.append(PlanGroup(center, objects))
    return plan


def plan_deng(
    image_w: int,
    image_h: int,
    existing: list[BoundingBox],
    bank_size: int,
    params: DengParams,
    rng: RngStream,
    image_id: str = "",
) -> PastePlan:
    """Plan baseline group copy-paste around objects already in the image.

    Degenerates to an empty plan when the image has no existing objects,
    since centers are only ever drawn from them.
    """
    params.validate()
    if bank_size < 1:
        raise ValueError("bank is empty; build it before planning")

    plan = _empty_plan(image_id, image_w, image_h, "deng", params, rng)
    if not existing:
        return plan

    n_groups = rng.integers(0, params.max_groups + 1)
    paste_order = 0
    for group_index in range(n_groups):
        anchor = existing[rng.integers(0, len(existing))]
        center = GroupCenter(
            x=anchor.x_min + anchor.width // 2,
            y=anchor.y_min + anchor.height // 2,
            size=max(anchor.width, anchor.height),
        )
        count = rng.integers(0, params.max_per_group + 1)
        objects = []
        for _ in range(count):
            sprite_ref = rng.integers(0, bank_size)
            rel = rng.normal(0.0, params.sigma_norm)
            size = max(params.min_size_px, _iround(center.size * (1.0 + rel)))
            px, py, branch = _place_into_box(
                rng, center, anchor, params.tau, params.epsilon, temperature=None
            )
            objects.append(
                PlacedObject(
                    sprite_ref=sprite_ref,
                    x=px,
                    y=py,
                    size=size,
                    group_index=group_index,
                    paste_order=paste_order,
                    accept_branch=branch,
                    temperature=None,
                )
            )
            paste_order += 1
        plan.groups.append(PlanGroup(center, objects))
    return plan


@dataclass(frozen=True)
class RealizedObject:
    """Image-space geometry of one planned object."""

    obj: PlacedObject
    box: BoundingBox | None  # tight box of the visible sprite area; None off-frame
    visible: bool            # True when enough of the object survives clipping


def _alpha_hull(alpha) -> tuple[int, int, int, int] | None:
    rows = alpha.any(axis=1)
    cols = alpha.any(axis=0)
    if not rows.any():
        return None
    ys = rows.nonzero()[0]
    xs = cols.nonzero()[0]
    return int(xs[0]), int(ys[0]), int(xs[-1] - xs[0] + 1), int(ys[-1] - ys[0] + 1)


def realize_objects(
    plan: PastePlan,
    bank: list[SpriteObject],
    image_w: int,
    image_h: int,
    visibility_threshold: float = DEFAULT_VISIBILITY_THRESHOLD,
) -> list[RealizedObject]:
    """Compute each planned object's visible tight box, in paste order.

    An object is ``visible`` when the in-frame part of its full hull keeps at
    least ``visibility_threshold`` of the unclipped hull area; objects below
    that (or entirely off-frame) carry a box but are meant to be unlabeled.
    """
    realized = []
    for obj in plan.objects():
        if not 0 <= obj.sprite_ref < len(bank):
            raise ValueError(
                f"plan references sprite {obj.sprite_ref} but bank holds {len(bank)}"
            )
        scaled = scale_sprite(bank[obj.sprite_ref], obj.size)
        ox, oy = paste_origin(obj.x, obj.y, scaled.width, scaled.height)

        hull = _alpha_hull(scaled.alpha)
        if hull is None:  # unreachable for valid sprites; be safe
            realized.append(RealizedObject(obj, None, False))
            continue
        hx, hy, hw, hh = hull
        full_x0, full_y0 = ox + hx, oy + hy
        clip_x0, clip_y0 = max(full_x0, 0), max(full_y0, 0)
        clip_x1 = min(full_x0 + hw, image_w)
        clip_y1 = min(full_y0 + hh, image_h)
        if clip_x1 <= clip_x0 or clip_y1 <= clip_y0:
            realized.append(RealizedObject(obj, None, False))
            continue

        clipped_area = (clip_x1 - clip_x0) * (clip_y1 - clip_y0)
        visible = clipped_area >= visibility_threshold * hw * hh

        # Tight box of what actually lands in frame (clip, then hull again).
        sub = scaled.alpha[
            max(-oy, 0):min(scaled.height, image_h - oy),
            max(-ox, 0):min(scaled.width, image_w - ox),
        ]
        sub_hull = _alpha_hull(sub) if sub.size else None
        if sub_hull is None:
            realized.append(RealizedObject(obj, None, False))
            continue
        sx, sy, sw, sh = sub_hull
        box = BoundingBox(max(ox, 0) + sx, max(oy, 0) + sy, sw, sh)
        realized.append(RealizedObject(obj, box, visible))
    return realized


def realized_boxes(
    plan: PastePlan,
    bank: list[SpriteObject],
    image_w: int,
    image_h: int,
    visibility_threshold: float = DEFAULT_VISIBILITY_THRESHOLD,
) -> list[BoundingBox]:
    """Boxes of all plan objects that remain visible after clipping."""
    return [
        r.box
        for r in realize_objects(plan, bank, image_w, image_h, visibility_threshold)
        if r.visible and r.box is not None
    ]


def _params_to_dict(params: PsadaParams | DengParams) -> dict:
    if isinstance(params, PsadaParams):
        return {
            "lam": params.lam,
            "max_objects": params.max_objects,
            "sigma_px": params.sigma_px,
            "tau": params.tau,
            "epsilon": params.epsilon,
            "t0": params.t0,
            "gamma": params.gamma,
            "min_size_px": params.min_size_px,
        }
    return {
        "max_groups": params.max_groups,
        "max_per_group": params.max_per_group,
        "sigma_norm": params.sigma_norm,
        "tau": params.tau,
        "epsilon": params.epsilon,
        "min_size_px": params.min_size_px,
    }


def save_plan(plan: PastePlan, destination: Path | str) -> None:
    """Serialize a plan to JSON (stable key order, replayable)."""
    payload = {
        "image_id": plan.image_id,
        "image_w": plan.image_w,
        "image_h": plan.image_h,
        "engine": plan.engine,
        "source_stem": plan.source_stem,
        "sample_index": plan.sample_index,
        "seed_info": {"master_seed": plan.seed_info[0], "stream_index": plan.seed_info[1]},
        "params": _params_to_dict(plan.params_used),
        "groups": [
            {
                "center": {"x": g.center.x, "y": g.center.y, "size": g.center.size},
                "objects": [
                    {
                        "sprite_ref": o.sprite_ref,
                        "x": o.x,
                        "y": o.y,
                        "size": o.size,
                        "group_index": o.group_index,
                        "paste_order": o.paste_order,
                        "accept_branch": o.accept_branch,
                        "temperature": o.temperature,
                    }
                    for o in g.objects
                ],
            }
            for g in plan.groups
        ],
    }
    Path(destination).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_plan(source: Path | str) -> PastePlan:
    """Load a plan saved by :func:`save_plan`."""
    payload = json.loads(Path(source).read_text())
    engine = payload["engine"]
    params: PsadaParams | DengParams
    if engine == "psada":
        params = PsadaParams(**payload["params"])
    elif engine == "deng":
        params = DengParams(**payload["params"])
    else:
        raise ValueError(f"unknown engine {engine!r} in plan {source}")
    groups = []
    for g in payload["groups"]:
        center = GroupCenter(**g["center"])
        objects = [PlacedObject(**o) for o in g["objects"]]
        groups.append(PlanGroup(center, objects))
    return PastePlan(
        image_id=payload["image_id"],
        image_w=payload["image_w"],
        image_h=payload["image_h"],
        engine=engine,
        groups=groups,
        params_used=params,
        seed_info=(payload["seed_info"]["master_seed"], payload["seed_info"]["stream_index"]),
        source_stem=payload.get("source_stem", ""),
        sample_index=payload.get("sample_index", 0),
    )
