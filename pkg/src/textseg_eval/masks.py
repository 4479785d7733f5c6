"""Raster types and conversions: palette ground truth, binarized predictions, page splitting.

Binary masks are ``(height, width)`` boolean arrays (``True`` = text). Ground-truth
masks are ``(height, width)`` ``uint8`` arrays holding :class:`TextClass` values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, TooNarrow, UnknownColor

DEFAULT_PRED_THRESHOLD = 128


class TextClass(enum.IntEnum):
    NON_TEXT = 0
    EASY = 1
    HARD = 2


def _rgb(value) -> tuple[int, int, int]:
    rgb = tuple(int(c) for c in value)
    if len(rgb) != 3 or not all(0 <= c <= 255 for c in rgb):
        raise ValueError(f"expected an RGB triple in 0..255, got {value!r}")
    return rgb


def parse_rgb(text: str) -> tuple[int, int, int]:
    """Parse ``"R,G,B"`` into a triple."""
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected R,G,B, got {text!r}")
    return _rgb(int(p) for p in parts)


@dataclass(frozen=True)
class PaletteConfig:
    """Colors used to paint the three ground-truth classes.

    A pixel decodes to a class when every channel lies within ``tolerance`` of
    that class color. The defaults are black for easy text, pink for hard text
    and yellow for everything else.
    """

    easy_color: tuple[int, int, int] = (0, 0, 0)
    hard_color: tuple[int, int, int] = (255, 0, 255)
    nontext_color: tuple[int, int, int] = (255, 255, 0)
    tolerance: int = 32

    def __post_init__(self):
        for name in ("easy_color", "hard_color", "nontext_color"):
            object.__setattr__(self, name, _rgb(getattr(self, name)))
        colors = self.colors()
        if not 0 <= self.tolerance <= 255:
            raise ValueError(f"tolerance must be in 0..255, got {self.tolerance}")
        min_dist = min(
            max(abs(a - b) for a, b in zip(colors[i], colors[j]))
            for i in range(3)
            for j in range(i + 1, 3)
        )
        if min_dist == 0:
            raise ValueError("palette colors must be pairwise distinct")
        # strictly below half the separation, so at most one color can match
        if 2 * self.tolerance >= min_dist:
            raise ValueError(
                f"tolerance {self.tolerance} is not below half the minimum color distance {min_dist}"
            )

    def colors(self) -> tuple[tuple[int, int, int], ...]:
        """Colors indexed by :class:`TextClass` value."""
        return (self.nontext_color, self.easy_color, self.hard_color)

    def as_dict(self) -> dict:
        return {
            "easy": list(self.easy_color),
            "hard": list(self.hard_color),
            "nontext": list(self.nontext_color),
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


def check_same_shape(a: np.ndarray, b: np.ndarray, image_id=None) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(a.shape[:2], b.shape[:2], image_id)


def _check_nonempty(image: np.ndarray) -> None:
    if image.ndim < 2 or image.shape[0] == 0 or image.shape[1] == 0:
        raise ValueError(f"image must have nonzero dimensions, got shape {image.shape}")


def decode_ground_truth(image: np.ndarray, palette: PaletteConfig = PaletteConfig()) -> np.ndarray:
    """Map an ``(H, W, 3)`` RGB raster to a class-label raster.

    Raises :class:`UnknownColor` for the first pixel, in raster order, that is
    not within tolerance of any palette color. An alpha channel is ignored.
    """
    image = np.asarray(image)
    _check_nonempty(image)
    if image.ndim != 3 or image.shape[2] not in (3, 4):
        raise ValueError(f"expected an RGB image, got shape {image.shape}")
    rgb = image[..., :3].astype(np.int16)

    labels = np.zeros(rgb.shape[:2], dtype=np.uint8)
    known = np.zeros(rgb.shape[:2], dtype=bool)
    for klass, color in zip(TextClass, palette.colors()):
        dev = np.abs(rgb - np.asarray(color, dtype=np.int16)).max(axis=2)
        hit = dev <= palette.tolerance
        labels[hit] = klass
        known |= hit
    if not known.all():
        y, x = np.argwhere(~known)[0]
        raise UnknownColor(x, y, image[y, x, :3])
    return labels


def encode_ground_truth(gt: np.ndarray, palette: PaletteConfig = PaletteConfig()) -> np.ndarray:
    """Paint a label raster with the exact palette colors."""
    lut = np.asarray(palette.colors(), dtype=np.uint8)
    return lut[np.asarray(gt, dtype=np.uint8)]


def decode_gray_ground_truth(image: np.ndarray) -> np.ndarray:
    """Decode the lossless grayscale encoding (0 non-text, 1 easy, 2 hard)."""
    image = np.asarray(image)
    _check_nonempty(image)
    bad = image > TextClass.HARD
    if bad.any():
        y, x = np.argwhere(bad)[0]
        v = int(image[y, x])
        raise UnknownColor(x, y, (v, v, v))
    return image.astype(np.uint8)


def decode_prediction(image: np.ndarray, threshold: int = DEFAULT_PRED_THRESHOLD) -> np.ndarray:
    """Binarize an 8-bit prediction: text iff intensity >= ``threshold``.

    128 is the 8-bit image of a 0.5 probability; 0/255 masks pass through unchanged.
    """
    image = np.asarray(image)
    _check_nonempty(image)
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in 0..255, got {threshold}")
    return image >= threshold


def binarize_ground_truth(gt: np.ndarray) -> np.ndarray:
    return np.asarray(gt) != TextClass.NON_TEXT


def split_page(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cut a double-page spread into its left and right halves (floor split)."""
    image = np.asarray(image)
    width = image.shape[1]
    if width < 2:
        raise TooNarrow(width)
    mid = width // 2
    return image[:, :mid], image[:, mid:]


# -- file I/O ---------------------------------------------------------------


def read_ground_truth(path, palette: PaletteConfig = PaletteConfig(), encoding: str = "palette") -> np.ndarray:
    with Image.open(path) as im:
        if encoding == "palette":
            return decode_ground_truth(np.asarray(im.convert("RGB")), palette)
        if encoding == "gray":
            return decode_gray_ground_truth(np.asarray(im.convert("L")))
    raise ValueError(f"unknown ground-truth encoding {encoding!r}")


def read_gray(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"))


def read_prediction(path, threshold: int = DEFAULT_PRED_THRESHOLD) -> np.ndarray:
    return decode_prediction(read_gray(path), threshold)


def write_binary_mask(path, mask: np.ndarray) -> None:
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path)


def write_ground_truth(path, gt: np.ndarray, palette: PaletteConfig = PaletteConfig(), encoding: str = "palette") -> None:
    if encoding == "palette":
        Image.fromarray(encode_ground_truth(gt, palette)).save(path)
    elif encoding == "gray":
        Image.fromarray(np.asarray(gt, dtype=np.uint8)).save(path)
    else:
        raise ValueError(f"unknown ground-truth encoding {encoding!r}")


def split_page_file(path, out_dir) -> tuple[Path, Path]:
    """Write ``<stem>_left.png`` and ``<stem>_right.png`` for a spread."""
    path, out_dir = Path(path), Path(out_dir)
    out = []
    with Image.open(path) as im:
        width, height = im.size
        if width < 2:
            raise TooNarrow(width)
        mid = width // 2
        for side, box in (("left", (0, 0, mid, height)), ("right", (mid, 0, width, height))):
            target = out_dir / f"{path.stem}_{side}.png"
            im.crop(box).save(target)
            out.append(target)
    return out[0], out[1]
