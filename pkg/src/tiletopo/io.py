"""Mesh and raster output: OBJ surface meshes and binary PGM images."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InvalidParameterError
from .prism import Prism
from .tile import format_float


def surface_grid(prism: Prism, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Triangulated grid on the prism surface (d=3) or the whole prism (d=2).

    Returns ``(vertices, faces)``; faces are 0-based vertex index triples.
    """
    if n < 2:
        raise InvalidParameterError("grid needs at least 2 points per side")
    t = np.linspace(0.0, 1.0, n)
    if prism.d == 2:
        patches = [(np.meshgrid(t - 0.5, t, indexing="ij"), None)]
        params = [(g[0][..., None], g[1]) for g, _ in patches]
    elif prism.d == 3:
        a, b = np.meshgrid(t - 0.5, t - 0.5, indexing="ij")
        s, h = np.meshgrid(t - 0.5, t, indexing="ij")
        half = np.full_like(s, 0.5)
        params = [
            (np.stack([a, b], -1), np.zeros_like(a)),          # bottom
            (np.stack([b, a], -1), np.ones_like(a)),           # top, flipped orientation
            (np.stack([s, -half], -1), h),
            (np.stack([half, s], -1), h),
            (np.stack([-s, half], -1), h),
            (np.stack([-half, -s], -1), h),
        ]
    else:
        raise DimensionError("surface meshes are available for d = 2 and d = 3")
    verts, faces = [], []
    offset = 0
    for q, height in params:
        pts = prism.lateral_point(q.reshape(-1, prism.d - 1), height.ravel())
        verts.append(pts)
        idx = np.arange(n * n).reshape(n, n) + offset
        a0, a1 = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
        b0, b1 = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
        faces.append(np.stack([a0, a1, b1], 1))
        faces.append(np.stack([a0, b1, b0], 1))
        offset += n * n
    return np.concatenate(verts), np.concatenate(faces)


def mesh_to_obj(vertices: np.ndarray, faces: np.ndarray | None = None, comments=()) -> str:
    """ASCII OBJ with ``v`` and ``f`` records; 2-D vertices get a zero third coordinate."""
    vertices = np.atleast_2d(vertices)
    if vertices.shape[1] == 2:
        vertices = np.concatenate([vertices, np.zeros((len(vertices), 1))], axis=1)
    if vertices.shape[1] != 3:
        raise DimensionError("OBJ vertices need 2 or 3 coordinates")
    lines = [f"# {c}" for c in comments]
    lines += ["v " + " ".join(format_float(x) for x in row) for row in vertices]
    if faces is not None:
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in np.asarray(faces)]
    return "\n".join(lines) + "\n"


def rasterize(points: np.ndarray, width: int = 512, height: int | None = None,
              bounds: tuple[float, float, float, float] | None = None) -> np.ndarray:
    """Mark the pixels hit by 2-D points; row 0 is the top of the image."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 2:
        raise DimensionError("rasters need 2-D points")
    if width < 1 or (height is not None and height < 1):
        raise InvalidParameterError("raster size must be positive")
    if bounds is None:
        lo, hi = points.min(axis=0), points.max(axis=0)
        pad = 0.02 * max(float((hi - lo).max()), 1e-12)
        bounds = (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)
    x0, y0, x1, y1 = bounds
    if height is None:
        height = max(1, int(round(width * (y1 - y0) / (x1 - x0))))
    img = np.zeros((height, width), dtype=np.uint8)
    col = np.floor((points[:, 0] - x0) / (x1 - x0) * width).astype(np.int64)
    row = np.floor((y1 - points[:, 1]) / (y1 - y0) * height).astype(np.int64)
    ok = (col >= 0) & (col < width) & (row >= 0) & (row < height)
    img[row[ok], col[ok]] = 255
    return img


def pgm_bytes(img: np.ndarray, comments=()) -> bytes:
    """Binary (P5) PGM encoding of an 8-bit image."""
    img = np.asarray(img, dtype=np.uint8)
    head = "P5\n" + "".join(f"# {c}\n" for c in comments) + f"{img.shape[1]} {img.shape[0]}\n255\n"
    return head.encode("ascii") + img.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode("ascii"))
        pos = end
    if tokens[0] != "P5":
        raise InvalidParameterError("not a binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    return np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8).reshape(h, w)
