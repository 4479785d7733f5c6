"""Exception types raised across the package."""


class TextSegEvalError(Exception):
    """Base class for all errors raised by textseg_eval."""


class DimensionMismatch(TextSegEvalError, ValueError):
    def __init__(self, a_shape, b_shape, image_id=None):
        self.a_shape = tuple(a_shape)
        self.b_shape = tuple(b_shape)
        self.image_id = image_id
        where = f" in {image_id!r}" if image_id is not None else ""
        super().__init__(f"dimension mismatch{where}: {self.a_shape} vs {self.b_shape}")


class UnknownColor(TextSegEvalError, ValueError):
    def __init__(self, x, y, rgb):
        self.x, self.y = int(x), int(y)
        self.rgb = tuple(int(c) for c in rgb)
        super().__init__(f"pixel ({self.x}, {self.y}) has color {self.rgb} outside every palette entry")


class TooNarrow(TextSegEvalError, ValueError):
    def __init__(self, width):
        self.width = width
        super().__init__(f"cannot split an image {width} pixel(s) wide")


class PlacementFailure(TextSegEvalError, RuntimeError):
    pass


class MissingPairs(TextSegEvalError):
    """Raised in strict mode when ground truth or predictions are missing."""

    def __init__(self, missing_ground_truth, missing_prediction):
        self.missing_ground_truth = list(missing_ground_truth)
        self.missing_prediction = list(missing_prediction)
        super().__init__(
            f"missing ground truth for {self.missing_ground_truth}, "
            f"missing prediction for {self.missing_prediction}"
        )


class ConfigMismatch(TextSegEvalError, ValueError):
    pass
