"""Crop and geometrically normalize face images from two annotated landmarks.

Conventions used throughout (and normative for the file formats):

* every point is ``(y, x)`` in pixels, never ``(x, y)``;
* pixel centers sit on integer coordinates, so output pixel ``(i, j)`` is
  sampled at ``T^-1((i, j))``;
* resampling is inverse-mapping bilinear interpolation with zero fill for
  source coordinates outside the image.

Two anchor points determine a similarity transform (uniform scale, rotation,
translation) exactly, so the solve is closed form rather than least squares.
Frontal crops anchor on the two eyes; profile crops anchor on the visible eye
and the mouth corner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import AlignmentError, FormatError

Point = tuple[float, float]

LANDMARK_NAMES = ("right_eye", "left_eye", "eye", "mouth")


@dataclass
class LandmarkSet:
    """Named annotated points for one image, each stored as (y, x)."""

    points: dict[str, Point] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.points

    def __getitem__(self, name: str) -> Point:
        try:
            return self.points[name]
        except KeyError:
            raise AlignmentError(f"landmark '{name}' missing") from None

    def with_point(self, name: str, point: Point) -> "LandmarkSet":
        merged = dict(self.points)
        merged[name] = point
        return LandmarkSet(merged)


def read_landmarks(path: str | Path) -> LandmarkSet:
    """Parse an annotation file: one ``name y x`` line per landmark."""
    points: dict[str, Point] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split(" ")
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'name y x', got {line!r}")
        name, ys, xs = parts
        try:
            points[name] = (float(ys), float(xs))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad coordinate in {line!r}") from exc
    return LandmarkSet(points)


def write_landmarks(landmarks: LandmarkSet, path: str | Path) -> None:
    lines = [f"{name} {y!r} {x!r}" for name, (y, x) in landmarks.points.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


@dataclass(frozen=True)
class SimilarityTransform:
    """Rotation + uniform scale + translation acting on (y, x) column vectors.

    Stored as the matrix entries ``[[a, -b, ty], [b, a, tx]]``; scale and
    rotation are derived views of (a, b).
    """

    a: float
    b: float
    ty: float
    tx: float

    @property
    def scale(self) -> float:
        return math.hypot(self.a, self.b)

    @property
    def rotation(self) -> float:
        return math.atan2(self.b, self.a)

    @property
    def translation(self) -> Point:
        return (self.ty, self.tx)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, -self.b, self.ty], [self.b, self.a, self.tx]])

    def apply(self, point: Point) -> Point:
        y, x = point
        return (
            self.a * y - self.b * x + self.ty,
            self.b * y + self.a * x + self.tx,
        )

    def apply_array(self, ys: np.ndarray, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            self.a * ys - self.b * xs + self.ty,
            self.b * ys + self.a * xs + self.tx,
        )

    def inverse(self) -> "SimilarityTransform":
        s2 = self.a * self.a + self.b * self.b
        if s2 == 0.0:
            raise AlignmentError("degenerate transform has no inverse")
        return SimilarityTransform(
            a=self.a / s2,
            b=-self.b / s2,
            ty=-(self.a * self.ty + self.b * self.tx) / s2,
            tx=(self.b * self.ty - self.a * self.tx) / s2,
        )


def solve_transform(src_a: Point, src_b: Point, dst_a: Point, dst_b: Point) -> SimilarityTransform:
    """Solve the unique similarity transform with T(src_a)=dst_a and T(src_b)=dst_b.

    Two point correspondences give four linear equations in (a, b, ty, tx);
    the anchor difference vectors decouple (a, b) from the translation.
    Raises AlignmentError when either anchor pair is coincident.
    """
    dys, dxs = src_b[0] - src_a[0], src_b[1] - src_a[1]
    dyd, dxd = dst_b[0] - dst_a[0], dst_b[1] - dst_a[1]
    den = dys * dys + dxs * dxs
    if den == 0.0:
        raise AlignmentError("source anchors are coincident")
    if dyd * dyd + dxd * dxd == 0.0:
        raise AlignmentError("target anchors are coincident")
    a = (dyd * dys + dxd * dxs) / den
    b = (dxd * dys - dyd * dxs) / den
    ty = dst_a[0] - a * src_a[0] + b * src_a[1]
    tx = dst_a[1] - b * src_a[0] - a * src_a[1]
    return SimilarityTransform(a=a, b=b, ty=ty, tx=tx)


@dataclass(frozen=True)
class AlignmentSpec:
    """Target geometry: output size plus two named anchor points in it."""

    target_height: int
    target_width: int
    anchor_a_name: str
    anchor_a_target: Point
    anchor_b_name: str
    anchor_b_target: Point

    def validate(self) -> None:
        if self.target_height <= 0 or self.target_width <= 0:
            raise AlignmentError("target size must be positive")
        for name, (y, x) in (
            (self.anchor_a_name, self.anchor_a_target),
            (self.anchor_b_name, self.anchor_b_target),
        ):
            if not (0 <= y < self.target_height and 0 <= x < self.target_width):
                raise AlignmentError(
                    f"anchor '{name}' target ({y}, {x}) outside "
                    f"[0,{self.target_height})x[0,{self.target_width})"
                )
        if self.anchor_a_target == self.anchor_b_target:
            raise AlignmentError("anchor targets are coincident")


# Built-in crop geometries. Frontal presets anchor on both eyes; the -profile
# variants anchor on the visible eye and the mouth corner. legacy80x64 is the
# crop historically used with DCT/ISV feature pipelines.
PRESETS: dict[str, AlignmentSpec] = {
    "arcface112": AlignmentSpec(112, 112, "right_eye", (52.0, 38.0), "left_eye", (52.0, 74.0)),
    "arcface112-profile": AlignmentSpec(112, 112, "eye", (52.0, 56.0), "mouth", (91.0, 56.0)),
    "facenet160": AlignmentSpec(160, 160, "right_eye", (32.0, 39.0), "left_eye", (32.0, 120.0)),
    "facenet160-profile": AlignmentSpec(160, 160, "eye", (32.0, 64.0), "mouth", (106.0, 64.0)),
    "legacy80x64": AlignmentSpec(80, 64, "right_eye", (16.0, 15.0), "left_eye", (16.0, 48.0)),
}

PROFILE_FALLBACKS = {
    "arcface112": "arcface112-profile",
    "facenet160": "facenet160-profile",
}


@dataclass(frozen=True)
class AlignmentProfile:
    """A primary spec plus an optional fallback used when a landmark is missing."""

    primary: AlignmentSpec
    fallback: AlignmentSpec | None = None


def _spec_from_dict(d: dict) -> AlignmentSpec:
    def anchor(key: str) -> tuple[str, Point]:
        entry = d[key]
        y, x = entry["target"]
        return str(entry["name"]), (float(y), float(x))

    name_a, target_a = anchor("anchor_a")
    name_b, target_b = anchor("anchor_b")
    return AlignmentSpec(
        target_height=int(d["target_height"]),
        target_width=int(d["target_width"]),
        anchor_a_name=name_a,
        anchor_a_target=target_a,
        anchor_b_name=name_b,
        anchor_b_target=target_b,
    )


def resolve_alignment(spec_arg: str | Path) -> AlignmentProfile:
    """Resolve ``--spec``: a preset name, or a JSON spec file with optional fallback."""
    key = str(spec_arg)
    if key in PRESETS:
        fallback = PRESETS.get(PROFILE_FALLBACKS.get(key, ""))
        return AlignmentProfile(primary=PRESETS[key], fallback=fallback)
    path = Path(spec_arg)
    if not path.exists():
        known = ", ".join(sorted(PRESETS))
        raise AlignmentError(f"unknown preset or spec file '{spec_arg}' (presets: {known})")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        primary = _spec_from_dict(raw)
        fallback = _spec_from_dict(raw["fallback"]) if "fallback" in raw else None
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"cannot parse alignment spec '{path}': {exc!r}") from exc
    primary.validate()
    if fallback is not None:
        fallback.validate()
    return AlignmentProfile(primary=primary, fallback=fallback)


def choose_spec(
    profile: AlignmentProfile, landmarks: LandmarkSet
) -> tuple[AlignmentSpec, LandmarkSet]:
    """Pick the primary spec when its anchors are annotated, else the fallback.

    When falling back to an eye+mouth spec and the file labels only one
    concrete eye instead of a generic ``eye``, that visible eye is used.
    """
    primary = profile.primary
    if primary.anchor_a_name in landmarks and primary.anchor_b_name in landmarks:
        return primary, landmarks
    if profile.fallback is not None:
        fb = profile.fallback
        effective = landmarks
        if "eye" in (fb.anchor_a_name, fb.anchor_b_name) and "eye" not in landmarks:
            eyes = [n for n in ("right_eye", "left_eye") if n in landmarks]
            if len(eyes) == 1:
                effective = landmarks.with_point("eye", landmarks[eyes[0]])
        if fb.anchor_a_name in effective and fb.anchor_b_name in effective:
            return fb, effective
    missing = [n for n in (primary.anchor_a_name, primary.anchor_b_name) if n not in landmarks]
    raise AlignmentError(
        f"landmark '{missing[0]}' missing and no usable fallback anchors annotated"
    )


def warp_crop(image: np.ndarray, transform: SimilarityTransform, spec: AlignmentSpec) -> np.ndarray:
    """Resample ``image`` into the spec-sized crop defined by ``transform``.

    Each output pixel (i, j) is bilinearly sampled at T^-1((i, j)); any of the
    four neighbours outside the source contributes zero. Output is float64 with
    exactly (target_height, target_width) spatial dimensions. The interpolation
    uses the incremental lerp form, so constant inputs stay exactly constant.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise AlignmentError("empty input image")
    squeeze = img.ndim == 2
    if squeeze:
        img = img[:, :, None]
    if img.ndim != 3:
        raise AlignmentError(f"expected a 2-D or 3-D pixel array, got shape {img.shape}")
    height, width, channels = img.shape

    inv = transform.inverse()
    oy, ox = np.meshgrid(
        np.arange(spec.target_height, dtype=np.float64),
        np.arange(spec.target_width, dtype=np.float64),
        indexing="ij",
    )
    sy, sx = inv.apply_array(oy.ravel(), ox.ravel())

    y0 = np.floor(sy)
    x0 = np.floor(sx)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[:, None]
    y0 = y0.astype(np.int64)
    x0 = x0.astype(np.int64)

    def gather(yi: np.ndarray, xi: np.ndarray) -> np.ndarray:
        inside = (yi >= 0) & (yi < height) & (xi >= 0) & (xi < width)
        vals = img[np.clip(yi, 0, height - 1), np.clip(xi, 0, width - 1)]
        vals[~inside] = 0.0
        return vals

    v00 = gather(y0, x0)
    v01 = gather(y0, x0 + 1)
    v10 = gather(y0 + 1, x0)
    v11 = gather(y0 + 1, x0 + 1)
    top = v00 + fx * (v01 - v00)
    bottom = v10 + fx * (v11 - v10)
    out = top + fy * (bottom - top)

    out = out.reshape(spec.target_height, spec.target_width, channels)
    return out[:, :, 0] if squeeze else out


def align_sample(
    image: np.ndarray, landmarks: LandmarkSet, spec: AlignmentSpec
) -> np.ndarray:
    """Solve the anchor transform for one image and return the warped crop.

    Raises AlignmentError when a required landmark is not annotated; that is
    the signal to switch to a profile (eye+mouth) spec.
    """
    src_a = landmarks[spec.anchor_a_name]
    src_b = landmarks[spec.anchor_b_name]
    transform = solve_transform(src_a, src_b, spec.anchor_a_target, spec.anchor_b_target)
    return warp_crop(image, transform, spec)


def read_image(path: str | Path) -> np.ndarray:
    """Load an 8-bit PNG as uint8, shape (H, W) for grayscale or (H, W, 3) for color."""
    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def write_image(image: np.ndarray, path: str | Path) -> None:
    """Write a pixel array as 8-bit PNG, rounding float values to the nearest level."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path, format="PNG")
