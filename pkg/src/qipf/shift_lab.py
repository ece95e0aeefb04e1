"""Covariate-shift tooling: image corruptions and the synthetic sine task.

Geometric corruptions (rotation, shear, zoom) are affine maps about the
image center with bilinear sampling and zero fill outside the frame;
shift translates by whole pixels; brightness adds a delta and clamps.
Intensities are plain physical units (degrees, shear factor, scale,
pixels, additive delta), not benchmark severity percentages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError

__all__ = [
    "RasterImage",
    "SineDataset",
    "CORRUPTION_KINDS",
    "corrupt",
    "make_sine_dataset",
    "read_image_csv",
    "write_image_csv",
    "read_image_pgm",
    "write_image_pgm",
]

CORRUPTION_KINDS = ("rotation", "brightness", "shear", "zoom", "shift")

DOMAIN = (-2.0, 2.5)
# training lives in the small-amplitude center; both outer regions are
# unseen so the toy model has to extrapolate there
DEFAULT_SEEN_INTERVALS = ((-1.1, 0.0), (0.15, 1.05))
DEFAULT_OMEGA = 2.0 * math.pi / 1.5


@dataclass(frozen=True)
class RasterImage:
    """Grayscale image with pixels in [0, 1], stored row-major."""

    pixels: np.ndarray  # shape (height, width)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise InvalidArgumentError("pixels must be a nonempty 2-D array")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise InvalidArgumentError("pixels must be finite and within [0, 1]")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _affine_sample(pixels: np.ndarray, inv00, inv01, inv10, inv11) -> np.ndarray:
    """Resample with output->source map  src = center + Minv @ (dst - center).

    Bilinear interpolation; anything sampled outside the frame reads as 0.
    Coordinates are (x=column, y=row).
    """
    h, w = pixels.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    dx = xx - cx
    dy = yy - cy
    sx = inv00 * dx + inv01 * dy + cx
    sy = inv10 * dx + inv11 * dy + cy

    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    out = np.zeros_like(pixels)
    for oy, ox, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (0, 1, fx * (1 - fy)),
        (1, 0, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        px = x0 + ox
        py = y0 + oy
        inside = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        pxc = np.clip(px, 0, w - 1).astype(int)
        pyc = np.clip(py, 0, h - 1).astype(int)
        out += np.where(inside, pixels[pyc, pxc] * wgt, 0.0)
    return out


_EXACT_TRIG = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}


def corrupt(image: RasterImage, kind: str, intensity: float) -> RasterImage:
    """Apply one corruption at the given intensity.

    rotation: degrees counterclockwise (exact at multiples of 90).
    brightness: additive delta in [-1, 1], clamped to [0, 1].
    shear: horizontal shear factor about the center.
    zoom: scale factor > 0 about the center.
    shift: horizontal translation by round(intensity) pixels (positive = right).
    """
    if kind not in CORRUPTION_KINDS:
        raise InvalidArgumentError(f"unknown corruption kind {kind!r}")
    if not math.isfinite(intensity):
        raise InvalidArgumentError("intensity must be finite")
    px = image.pixels
    if kind == "brightness":
        if abs(intensity) > 1.0:
            raise InvalidArgumentError(f"brightness delta {intensity} outside [-1, 1]")
        return RasterImage(np.clip(px + intensity, 0.0, 1.0))
    if kind == "shift":
        offset = int(round(intensity))
        out = np.zeros_like(px)
        if offset >= px.shape[1] or -offset >= px.shape[1]:
            return RasterImage(out)
        if offset >= 0:
            out[:, offset:] = px[:, : px.shape[1] - offset]
        else:
            out[:, :offset] = px[:, -offset:]
        return RasterImage(out)
    if kind == "rotation":
        deg = intensity % 360.0
        if deg in _EXACT_TRIG:
            c, s = _EXACT_TRIG[deg]
        else:
            rad = math.radians(deg)
            c, s = math.cos(rad), math.sin(rad)
        # inverse of CCW rotation (y axis points down, so signs flip)
        out = _affine_sample(px, c, s, -s, c)
    elif kind == "shear":
        # forward x' = x + intensity*(y - cy); invert by subtracting
        out = _affine_sample(px, 1.0, -intensity, 0.0, 1.0)
    else:  # zoom
        if intensity <= 0.0:
            raise InvalidArgumentError(f"zoom scale must be > 0, got {intensity}")
        out = _affine_sample(px, 1.0 / intensity, 0.0, 0.0, 1.0 / intensity)
    return RasterImage(np.clip(out, 0.0, 1.0))


def read_image_csv(path) -> RasterImage:
    """Read the flat CSV image format: 'height,width' header then pixel rows."""
    lines = Path(path).read_text().strip().splitlines()
    lines = [l for l in lines if not l.startswith("#")]  # manifest comments
    if not lines:
        raise FormatError(f"{path}: empty image file")
    try:
        h, w = (int(v) for v in lines[0].split(","))
    except ValueError as exc:
        raise FormatError(f"{path}: bad header {lines[0]!r}: {exc}") from exc
    if len(lines) - 1 != h:
        raise FormatError(f"{path}: expected {h} pixel rows, got {len(lines) - 1}")
    try:
        rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: bad pixel value: {exc}") from exc
    if any(len(r) != w for r in rows):
        raise FormatError(f"{path}: pixel row width mismatch")
    return RasterImage(np.array(rows))


def write_image_csv(image: RasterImage, path) -> None:
    lines = [f"{image.height},{image.width}"]
    for row in image.pixels:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_image_pgm(path) -> RasterImage:
    """Read binary 8-bit PGM (P5)."""
    blob = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    if fields[0] != b"P5":
        raise FormatError(f"{path}: not a P5 PGM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 supported, got {maxval}")
    data = blob[pos + 1 : pos + 1 + h * w]
    if len(data) != h * w:
        raise FormatError(f"{path}: truncated pixel data")
    return RasterImage(np.frombuffer(data, dtype=np.uint8).reshape(h, w) / 255.0)


def write_image_pgm(image: RasterImage, path, comment: str | None = None) -> None:
    """Write binary 8-bit PGM (P5) for visual inspection."""
    lines = ["P5"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{image.width} {image.height}")
    lines.append("255")
    data = np.rint(image.pixels * 255.0).astype(np.uint8).tobytes()
    Path(path).write_bytes(("\n".join(lines) + "\n").encode() + data)


@dataclass(frozen=True)
class SineDataset:
    """Noisy weighted-sine samples: training draws followed by a uniform grid.

    xs[:n_train] are the training inputs (uniform over the seen intervals),
    xs[n_train:] the evaluation grid over the full domain.  seen_mask marks
    interval membership for every point.
    """

    xs: np.ndarray
    ys: np.ndarray
    seen_mask: np.ndarray
    n_train: int

    def __post_init__(self):
        if not (self.xs.size == self.ys.size == self.seen_mask.size):
            raise InvalidArgumentError("xs, ys, seen_mask must have equal length")
        if not self.seen_mask.any() or self.seen_mask.all():
            raise InvalidArgumentError("need at least one seen and one unseen point")
        for arr in (self.xs, self.ys, self.seen_mask):
            arr.flags.writeable = False

    @property
    def train_xs(self) -> np.ndarray:
        return self.xs[: self.n_train]

    @property
    def train_ys(self) -> np.ndarray:
        return self.ys[: self.n_train]

    @property
    def grid_xs(self) -> np.ndarray:
        return self.xs[self.n_train :]

    @property
    def grid_ys(self) -> np.ndarray:
        return self.ys[self.n_train :]

    @property
    def grid_seen_mask(self) -> np.ndarray:
        return self.seen_mask[self.n_train :]


def _target(xs: np.ndarray, omega: float) -> np.ndarray:
    # weighted sine: amplitude grows linearly with x
    return xs * np.sin(omega * xs)


def make_sine_dataset(
    n_train: int,
    seed: int,
    noise_sd: float,
    seen_intervals=DEFAULT_SEEN_INTERVALS,
    omega: float = DEFAULT_OMEGA,
    grid_points: int = 181,
) -> SineDataset:
    """Sample the toy regression task: x*sin(omega*x) plus Gaussian noise.

    Training inputs are uniform over the union of seen_intervals; the
    evaluation grid spans the whole domain with seen_mask from interval
    membership.  Pure function of its arguments.
    """
    if n_train < 2:
        raise InvalidArgumentError("n_train must be >= 2")
    if noise_sd < 0:
        raise InvalidArgumentError("noise_sd must be >= 0")
    intervals = [(float(lo), float(hi)) for lo, hi in seen_intervals]
    if not intervals:
        raise InvalidArgumentError("seen_intervals must be nonempty")
    for lo, hi in intervals:
        if not (DOMAIN[0] <= lo < hi <= DOMAIN[1]):
            raise InvalidArgumentError(
                f"interval ({lo}, {hi}) must lie within {DOMAIN} with lo < hi"
            )
    rng = np.random.default_rng(seed)
    lengths = np.array([hi - lo for lo, hi in intervals])
    offsets = np.concatenate(([0.0], np.cumsum(lengths)))
    u = rng.uniform(0.0, offsets[-1], n_train)
    which = np.minimum(np.searchsorted(offsets, u, side="right") - 1, len(intervals) - 1)
    train_xs = np.array([intervals[i][0] + (u[j] - offsets[i]) for j, i in enumerate(which)])

    grid_xs = np.linspace(DOMAIN[0], DOMAIN[1], grid_points)
    xs = np.concatenate([train_xs, grid_xs])
    ys = _target(xs, omega)
    if noise_sd > 0:
        ys = ys + rng.normal(0.0, noise_sd, xs.size)
    in_any = lambda x: any(lo <= x <= hi for lo, hi in intervals)
    seen = np.array([in_any(x) for x in xs])
    return SineDataset(xs=xs, ys=ys, seen_mask=seen, n_train=n_train)
