"""Image loading, canonical resizing, and sliding-window view generation.

Every view carries a full-foreground mask: the mask exists to satisfy the
region-aware model interface, and this harness always marks the whole crop
as the region of interest.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from damqa.errors import InvalidImageError

# Pinned so golden runs do not depend on platform resampling defaults.
RESIZE_FILTER = Image.Resampling.BILINEAR

FULL = "full"
PATCH = "patch"


@dataclass(frozen=True)
class ImageBuffer:
    """RGB image held as an (H, W, 3) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise InvalidImageError(f"expected (H, W, 3) data, got {self.data.shape}")
        if self.data.dtype != np.uint8:
            raise InvalidImageError(f"expected uint8 data, got {self.data.dtype}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise InvalidImageError("image has a zero dimension")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class MaskBuffer:
    """Single-channel 8-bit mask; values are 0 or 255."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise InvalidImageError(f"expected (H, W) mask, got {self.data.shape}")
        if self.data.dtype != np.uint8:
            raise InvalidImageError(f"expected uint8 mask, got {self.data.dtype}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise InvalidImageError("mask has a zero dimension")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class PatchRect:
    """Pixel rectangle with top-left (x, y). Square except the K=1 case,
    where the single patch is the whole image."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0 or self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate rect {self}")

    @property
    def area(self) -> int:
        return self.w * self.h


@dataclass(frozen=True)
class View:
    """One model input: a crop plus its full-foreground mask.

    index 0 is always the full view; patches follow in row-major
    enumeration order.
    """

    kind: str
    rect: PatchRect
    image: ImageBuffer
    mask: MaskBuffer
    index: int

    def __post_init__(self):
        if self.kind not in (FULL, PATCH):
            raise ValueError(f"unknown view kind {self.kind!r}")
        if (self.mask.width, self.mask.height) != (self.image.width, self.image.height):
            raise InvalidImageError("mask dimensions do not match the crop")


def load_image(path: Union[str, Path]) -> ImageBuffer:
    """Load a PNG or JPEG file as RGB."""
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
    except Exception as exc:
        raise InvalidImageError(f"cannot load image {path}: {exc}") from exc
    return ImageBuffer(np.asarray(rgb, dtype=np.uint8))


def encode_png(img: ImageBuffer) -> bytes:
    """Serialize an RGB image as PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(img.data, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def encode_mask_png(mask: MaskBuffer) -> bytes:
    """Serialize a mask as 8-bit grayscale PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(mask.data, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def resize_longest_side(img: ImageBuffer, target: int) -> ImageBuffer:
    """Scale so the longest side equals ``target``, preserving aspect ratio.

    Smaller images are scaled up, not just capped. The short side rounds to
    the nearest integer with a floor of 1.
    """
    if target < 1:
        raise ValueError("resize target must be >= 1")
    w, h = img.width, img.height
    scale = target / max(w, h)
    new_w = max(1, round(w * scale))
    new_h = max(1, round(h * scale))
    if (new_w, new_h) == (w, h):
        return img
    resized = Image.fromarray(img.data, mode="RGB").resize(
        (new_w, new_h), resample=RESIZE_FILTER
    )
    return ImageBuffer(np.asarray(resized, dtype=np.uint8))


def full_mask(w: int, h: int) -> MaskBuffer:
    """All-foreground mask of the given size."""
    if w < 1 or h < 1:
        raise ValueError("mask dimensions must be >= 1")
    return MaskBuffer(np.full((h, w), 255, dtype=np.uint8))


def enumerate_patches(w: int, h: int, window: int, stride: int) -> list[PatchRect]:
    """Top-left coordinates of the sliding window over a w×h image.

    Walks the stride grid, appends a residual position flush against the
    right and bottom edges when the grid does not land there, removes
    duplicates, and orders row-major (y outer, x inner). Images smaller
    than the window in either dimension yield a single whole-image patch.
    """
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    if w < window or h < window:
        return [PatchRect(x=0, y=0, w=w, h=h)]

    def axis_positions(extent: int) -> list[int]:
        last = extent - window
        positions = list(range(0, last + 1, stride))
        if positions[-1] != last:
            positions.append(last)
        return positions

    return [
        PatchRect(x=x, y=y, w=window, h=window)
        for y in axis_positions(h)
        for x in axis_positions(w)
    ]


def _crop(img: ImageBuffer, rect: PatchRect) -> ImageBuffer:
    if rect.x + rect.w > img.width or rect.y + rect.h > img.height:
        raise InvalidImageError(f"rect {rect} exceeds image {img.width}x{img.height}")
    return ImageBuffer(
        np.ascontiguousarray(img.data[rect.y:rect.y + rect.h, rect.x:rect.x + rect.w])
    )


def make_views(img: ImageBuffer, window: int, stride: int) -> list[View]:
    """Full view first, then patch crops in enumeration order."""
    w, h = img.width, img.height
    views = [
        View(
            kind=FULL,
            rect=PatchRect(x=0, y=0, w=w, h=h),
            image=img,
            mask=full_mask(w, h),
            index=0,
        )
    ]
    for i, rect in enumerate(enumerate_patches(w, h, window, stride), start=1):
        crop = _crop(img, rect)
        views.append(
            View(
                kind=PATCH,
                rect=rect,
                image=crop,
                mask=full_mask(crop.width, crop.height),
                index=i,
            )
        )
    return views
