"""Image and point-cloud file writers."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .sensors import SensorImage


def write_pgm16(path, meters: np.ndarray) -> None:
    """Binary P5 graymap, 16-bit big-endian, millimetre units; invalid (<0) as 0."""
    mm = np.where(meters < 0, 0, np.rint(np.asarray(meters) * 1000.0))
    data = np.clip(mm, 0, 65535).astype(">u2")
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(data.tobytes())


def read_pgm16(path) -> np.ndarray:
    """Millimetre values of a file written by :func:`write_pgm16`."""
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end].decode("ascii"))
        pos = end
    magic, w, h, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic != "P5" or maxval != 65535:
        raise ValueError("not a 16-bit binary PGM")
    pos += 1
    return np.frombuffer(raw[pos:pos + 2 * w * h], dtype=">u2").reshape(h, w).astype(np.int64)


def write_matrix(path, values: np.ndarray, fmt: str = "%d") -> None:
    """2-D array as CSV with a ``c0,c1,...`` header row."""
    values = np.atleast_2d(np.asarray(values))
    header = ",".join(f"c{j}" for j in range(values.shape[1]))
    np.savetxt(path, values, fmt=fmt, delimiter=",", header=header, comments="", encoding="utf-8")


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_point_cloud(path, image: SensorImage) -> int:
    """CSV ``x,y,z,seg`` of every valid pixel (world frame). Returns the row count."""
    pts = image.points[image.valid]
    seg = image.segmentation[image.valid]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["x", "y", "z", "seg"])
        for (x, y, z), s in zip(pts, seg):
            w.writerow([f"{x:.6f}", f"{y:.6f}", f"{z:.6f}", int(s)])
    return len(pts)
