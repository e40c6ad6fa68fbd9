"""Raster images of filled Julia sets and Green's functions (binary PPM)."""

from dataclasses import dataclass

import numpy as np

from .dynamics import green_field

GREEN = (0, 160, 0)
BLACK = (0, 0, 0)
MANDELBROT_BBOX = (-2.5, -1.5, 1.5, 1.5)


@dataclass(frozen=True, eq=False)
class RasterImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, top row first

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3) or self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be a (height, width, 3) uint8 array")

    def __eq__(self, other):
        return (isinstance(other, RasterImage) and self.width == other.width
                and self.height == other.height and np.array_equal(self.pixels, other.pixels))

    def pixel(self, row, col):
        return tuple(int(v) for v in self.pixels[row, col])


def boundary_mask(inside):
    """Pixels whose 8-neighbourhood (themselves included) meets both classes."""
    H, W = inside.shape
    pad_in = np.pad(inside, 1, mode="edge")
    any_in = np.zeros((H, W), dtype=bool)
    any_out = np.zeros((H, W), dtype=bool)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            win = pad_in[dy:dy + H, dx:dx + W]
            any_in |= win
            any_out |= ~win
    return any_in & any_out


def colorize(field):
    """Inside green, boundary black, outside red 255 exp(-g/g0), g0 = median positive g."""
    g = field.values
    inside = field.inside_mask
    H, W = inside.shape
    pix = np.zeros((H, W, 3), dtype=np.uint8)
    pos = g[(~inside) & (g > 0)]
    if pos.size:
        g0 = float(np.median(pos))
        red = np.rint(255.0 * np.exp(-g / g0))
        pix[..., 0] = np.where(inside, 0, red).astype(np.uint8)
    pix[inside] = GREEN
    pix[boundary_mask(inside)] = BLACK
    return RasterImage(W, H, pix)


def encode_ppm(img):
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img.pixels).tobytes()


def write_image(img, path):
    try:
        with open(path, "wb") as fh:
            fh.write(encode_ppm(img))
    except OSError as exc:
        raise OSError(f"cannot write image to {path}: {exc.strerror}") from exc


def decode_ppm(data):
    parts = []
    pos = 0
    while len(parts) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        parts.append(data[start:pos])
    if parts[0] != b"P6" or int(parts[3]) != 255:
        raise ValueError("not an 8-bit binary PPM")
    W, H = int(parts[1]), int(parts[2])
    body = data[pos + 1:pos + 1 + W * H * 3]
    if len(body) != W * H * 3:
        raise ValueError("truncated PPM payload")
    return RasterImage(W, H, np.frombuffer(body, dtype=np.uint8).reshape(H, W, 3).copy())


def read_image(path):
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())


def render(p, bbox=MANDELBROT_BBOX, resolution=(800, 600), max_iter=256, threads=None):
    """Colorized Green field of p."""
    return colorize(green_field(p, bbox, resolution, max_iter, threads))


def pixel_index(bbox, resolution, z):
    """(row, col) of the pixel whose half-open cell [x0 + i dx, x0 + (i+1) dx)
    contains z (rows counted from the top)."""
    x0, y0, x1, y1 = map(float, bbox)
    W, H = map(int, resolution)
    col = int(np.floor((z.real - x0) / (x1 - x0) * W))
    row = int(np.floor((y1 - z.imag) / (y1 - y0) * H))
    return min(max(row, 0), H - 1), min(max(col, 0), W - 1)
