"""Deterministic synthetic pages with pixel-exact 3-class masks.

Each page is a mid-gray procedural texture with white elliptical balloons.
Glyphs placed inside a balloon are easy text; glyphs placed on the texture are
hard text. A pixel belongs to the mask iff the glyph's coverage there reaches
``ink_threshold``, so anti-aliased fringes stay non-text on purpose.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont
from scipy import ndimage as ndi

from .errors import PlacementFailure
from .masks import PaletteConfig, TextClass, write_ground_truth

DEFAULT_FONT = str(Path(__file__).parent / "fonts" / "DejaVuSans.ttf")
DEFAULT_CHARSET = (
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz0123456789"
    "αβγδεζηθλμξπσφψωБГДЖЗИЛПФЦЧШЩЭЮЯ"
)
ATTEMPTS_PER_GLYPH = 1000
PAGE_RETRIES = 10
OUTLINE = 2
GAP = 1  # blank pixels kept between neighbouring glyph boxes


@dataclass(frozen=True)
class SynthConfig:
    page_size: tuple[int, int] = (512, 512)  # (width, height)
    font_source: str = DEFAULT_FONT
    glyph_size_range: tuple[int, int] = (14, 28)
    balloons_per_page: tuple[int, int] = (1, 3)
    glyphs_per_balloon: tuple[int, int] = (2, 8)
    loose_glyphs_per_page: tuple[int, int] = (2, 10)
    ink_threshold: int = 128
    seed: int = 0
    charset: str = DEFAULT_CHARSET

    def __post_init__(self):
        for name in ("page_size", "glyph_size_range", "balloons_per_page", "glyphs_per_balloon", "loose_glyphs_per_page"):
            value = tuple(int(v) for v in getattr(self, name))
            object.__setattr__(self, name, value)
            if len(value) != 2:
                raise ValueError(f"{name} must have two entries")
        w, h = self.page_size
        if w < 1 or h < 1:
            raise ValueError("page_size must be positive")
        for name in ("glyph_size_range", "balloons_per_page", "glyphs_per_balloon", "loose_glyphs_per_page"):
            lo, hi = getattr(self, name)
            if lo < 0 or lo > hi:
                raise ValueError(f"{name} must satisfy 0 <= min <= max, got {(lo, hi)}")
        gmin, gmax = self.glyph_size_range
        if gmin < 1 or gmax >= min(w, h):
            raise ValueError("glyph sizes must be >= 1 and smaller than the page")
        if not 1 <= self.ink_threshold <= 255:
            raise ValueError("ink_threshold must be in 1..255")
        if not self.charset:
            raise ValueError("charset must not be empty")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**known)

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass
class SynthPage:
    index: int
    image: np.ndarray
    gt: np.ndarray
    retries: int
    easy_glyphs: int
    hard_glyphs: int
    balloons: list[tuple[int, int, int, int]] = field(default_factory=list)  # cx, cy, a, b


@lru_cache(maxsize=4096)
def _glyph_bitmap(font_source: str, size: int, char: str) -> np.ndarray:
    """Tightly cropped 8-bit coverage bitmap of one glyph."""
    font = ImageFont.truetype(font_source, size)
    left, top, right, bottom = font.getbbox(char)
    if right <= left or bottom <= top:
        return np.zeros((0, 0), dtype=np.uint8)
    canvas = Image.new("L", (right - left, bottom - top), 0)
    ImageDraw.Draw(canvas).text((-left, -top), char, fill=255, font=font)
    alpha = np.asarray(canvas)
    rows, cols = np.nonzero(alpha)
    if len(rows) == 0:
        return np.zeros((0, 0), dtype=np.uint8)
    return alpha[rows.min() : rows.max() + 1, cols.min() : cols.max() + 1].copy()


def _background(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    # smooth value noise in the mid-gray range
    cell = 32
    coarse = rng.uniform(150, 215, size=(h // cell + 2, w // cell + 2))
    noise = ndi.zoom(coarse, cell, order=1)[:h, :w]
    fine = rng.normal(0, 4, size=(h, w))
    page = noise + fine

    # a few halftone patches
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(int(rng.integers(0, 4))):
        pitch = int(rng.integers(5, 9))
        x0, y0 = int(rng.integers(0, w)), int(rng.integers(0, h))
        pw, ph = int(rng.integers(w // 8, w // 3 + 1)), int(rng.integers(h // 8, h // 3 + 1))
        inside = (xx >= x0) & (xx < x0 + pw) & (yy >= y0) & (yy < y0 + ph)
        dots = ((xx % pitch - pitch / 2) ** 2 + (yy % pitch - pitch / 2) ** 2) <= (pitch / 4) ** 2
        page[inside & dots] -= 45
    return np.clip(np.rint(page), 0, 255).astype(np.int32)


def _boxes_clear(box, boxes) -> bool:
    x0, y0, x1, y1 = box
    for bx0, by0, bx1, by1 in boxes:
        if x0 < bx1 + GAP and bx0 < x1 + GAP and y0 < by1 + GAP and by0 < y1 + GAP:
            return False
    return True


def _inside_ellipse(box, cx, cy, a, b) -> bool:
    x0, y0, x1, y1 = box
    for x in (x0, x1):
        for y in (y0, y1):
            if ((x - cx) / a) ** 2 + ((y - cy) / b) ** 2 > 1.0:
                return False
    return True


def _render(config: SynthConfig, index: int, retry: int) -> SynthPage:
    rng = np.random.default_rng([config.seed, index, retry])
    w, h = config.page_size
    gmin, gmax = config.glyph_size_range
    chars = [c for c in config.charset if _glyph_bitmap(config.font_source, gmax, c).size]
    if not chars:
        raise PlacementFailure("the font renders none of the requested characters")

    bg = _background(rng, w, h)
    canvas = Image.fromarray(bg.astype(np.uint8))
    draw = ImageDraw.Draw(canvas)

    # balloons: boxes as (x0, y0, x1, y1), half-open
    balloons, balloon_boxes = [], []
    a_min = int(0.9 * gmax) + OUTLINE + 4
    a_max = max(a_min, w // 4)
    b_min = int(0.9 * gmax) + OUTLINE + 4
    b_max = max(b_min, h // 4)
    for _ in range(int(rng.integers(config.balloons_per_page[0], config.balloons_per_page[1] + 1))):
        for _attempt in range(ATTEMPTS_PER_GLYPH):
            a, b = int(rng.integers(a_min, a_max + 1)), int(rng.integers(b_min, b_max + 1))
            if 2 * a + 1 > w or 2 * b + 1 > h:
                continue
            cx, cy = int(rng.integers(a, w - a)), int(rng.integers(b, h - b))
            box = (cx - a, cy - b, cx + a + 1, cy + b + 1)
            if _boxes_clear(box, balloon_boxes):
                break
        else:
            raise PlacementFailure(f"page {index}: no room for another balloon")
        balloons.append((cx, cy, a, b))
        balloon_boxes.append(box)
        draw.ellipse(box[:2] + (box[2] - 1, box[3] - 1), fill=255, outline=20, width=OUTLINE)

    alpha = np.zeros((h, w), dtype=np.int32)
    klass = np.zeros((h, w), dtype=np.uint8)
    glyph_boxes = []

    def place(box_sampler, accept, text_class):
        for _attempt in range(ATTEMPTS_PER_GLYPH):
            size = int(rng.integers(gmin, gmax + 1))
            char = chars[int(rng.integers(len(chars)))]
            bitmap = _glyph_bitmap(config.font_source, size, char)
            if not bitmap.size:
                continue
            gh, gw = bitmap.shape
            origin = box_sampler(gw, gh)
            if origin is None:
                continue
            x0, y0 = origin
            box = (x0, y0, x0 + gw, y0 + gh)
            if accept(box) and _boxes_clear(box, glyph_boxes):
                glyph_boxes.append(box)
                alpha[y0 : y0 + gh, x0 : x0 + gw] = bitmap
                klass[y0 : y0 + gh, x0 : x0 + gw] = text_class
                return
        raise PlacementFailure(f"page {index}: could not place a glyph")

    easy = 0
    for cx, cy, a, b in balloons:
        ia, ib = a - OUTLINE - 2, b - OUTLINE - 2

        def sample(gw, gh, cx=cx, cy=cy, ia=ia, ib=ib):
            if gw > 2 * ia or gh > 2 * ib:
                return None
            return int(rng.integers(cx - ia, cx + ia - gw + 1)), int(rng.integers(cy - ib, cy + ib - gh + 1))

        for _ in range(int(rng.integers(config.glyphs_per_balloon[0], config.glyphs_per_balloon[1] + 1))):
            place(sample, lambda box, cx=cx, cy=cy, ia=ia, ib=ib: _inside_ellipse(box, cx, cy, ia, ib), TextClass.EASY)
            easy += 1

    def sample_loose(gw, gh):
        if gw > w or gh > h:
            return None
        return int(rng.integers(0, w - gw + 1)), int(rng.integers(0, h - gh + 1))

    hard = 0
    for _ in range(int(rng.integers(config.loose_glyphs_per_page[0], config.loose_glyphs_per_page[1] + 1))):
        place(sample_loose, lambda box: _boxes_clear(box, balloon_boxes), TextClass.HARD)
        hard += 1

    page = np.asarray(canvas, dtype=np.int32)
    # black ink over the page: cores with coverage >= 128 land below intensity 128
    image = ((page * (255 - alpha) + 127) // 255).astype(np.uint8)
    ink = alpha >= config.ink_threshold
    gt = np.where(ink, klass, TextClass.NON_TEXT).astype(np.uint8)
    return SynthPage(index, image, gt, retry, easy, hard, balloons)


def render_page(config: SynthConfig, index: int) -> SynthPage:
    """Render page ``index``; layout failures retry with a perturbed sub-seed."""
    last = None
    for retry in range(PAGE_RETRIES + 1):
        try:
            return _render(config, index, retry)
        except PlacementFailure as exc:
            last = exc
    raise PlacementFailure(f"page {index}: gave up after {PAGE_RETRIES} retries ({last})")


def generate_page(config: SynthConfig, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(grayscale image, 3-class ground truth)`` for page ``index``."""
    page = render_page(config, index)
    return page.image, page.gt


def _write_page(job) -> dict:
    config, index, out_dir, palette = job
    page = render_page(config, index)
    image_name, mask_name = f"page_{index:05d}.png", f"page_{index:05d}.mask.png"
    Image.fromarray(page.image).save(out_dir / image_name)
    write_ground_truth(out_dir / mask_name, page.gt, palette)
    counts = np.bincount(page.gt.ravel(), minlength=3)
    return {
        "index": index,
        "image": image_name,
        "mask": mask_name,
        "seed": [config.seed, index, page.retries],
        "retries": page.retries,
        "glyphs": {"easy": page.easy_glyphs, "hard": page.hard_glyphs},
        "class_pixels": {"nontext": int(counts[0]), "easy": int(counts[1]), "hard": int(counts[2])},
    }


def generate_corpus(
    config: SynthConfig, n: int, out, *, jobs: int = 1, palette: PaletteConfig = PaletteConfig()
) -> dict:
    """Write ``n`` image/mask pairs plus ``manifest.json`` into ``out``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    work = [(config, i, out, palette) for i in range(n)]
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            pages = list(pool.map(_write_page, work))
    else:
        pages = [_write_page(w) for w in work]
    totals = {k: sum(p["class_pixels"][k] for p in pages) for k in ("nontext", "easy", "hard")}
    manifest = {"config": config.as_dict(), "palette": palette.as_dict(), "n": n, "pages": pages, "class_pixels": totals}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
