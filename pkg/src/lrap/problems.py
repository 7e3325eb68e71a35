"""Benchmark targets: random uniform matrices, grayscale images, and the
closed-form solution of the two-component constant-kernel coagulation
equation on an equidistant grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sketching import _rng

__all__ = [
    "SmoluchowskiSpec",
    "bessel_i0_log",
    "gen_uniform",
    "load_image_pgm",
    "smoluchowski_concentration",
    "smoluchowski_solution",
]

# Below this argument the power series of I0 converges quickly; above it the
# large-argument expansion is already at machine precision.
_SERIES_CUTOFF = 20.0
_SERIES_TERMS = 48
_ASYMPTOTIC_TERMS = 28


@dataclass(frozen=True)
class SmoluchowskiSpec:
    """Parameters of the analytic coagulation solution and its grid.

    The concentration starts from ``sqrt(K) a b exp(-a v1 - b v2)`` and
    evolves under a constant kernel ``K``; the grid is ``nodes`` points per
    axis at spacing ``step``, starting at ``origin``.
    """

    kernel_constant: float = 100.0
    rate_a: float = 1.0
    rate_b: float = 1.0
    time: float = 6.0
    step: float = 0.1
    nodes: int = 1024
    origin: float = 0.0

    def __post_init__(self):
        if self.kernel_constant <= 0 or self.rate_a <= 0 or self.rate_b <= 0:
            raise ValueError("kernel constant and rate parameters must be positive")
        if self.time < 0:
            raise ValueError(f"time must be >= 0, got {self.time}")
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.nodes < 1:
            raise ValueError(f"node count must be >= 1, got {self.nodes}")
        if self.origin < 0:
            raise ValueError(f"grid origin must be >= 0, got {self.origin}")

    def grid(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.nodes)


def gen_uniform(rows: int, cols: int, seed: int) -> np.ndarray:
    """Matrix of iid Uniform[0, 1) entries, deterministic per seed."""
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix shape must be positive, got {rows}x{cols}")
    return _rng(seed).random((rows, cols))


def bessel_i0_log(z):
    """log of the modified Bessel function of order zero, elementwise.

    Small arguments are summed with the power series
    ``I0(z) = sum_k (z^2/4)^k / (k!)^2``; large arguments use the expansion
    ``I0(z) ~ e^z / sqrt(2 pi z) * (1 + 1/(8z) + 9/(128 z^2) + ...)`` kept
    entirely in the log domain, so the result stays finite where I0 itself
    would overflow.

    Accepts a scalar or an ndarray of nonnegative values.
    """
    arr = np.asarray(z, dtype=np.float64)
    if (arr < 0).any():
        raise ValueError("bessel_i0_log requires z >= 0")
    out = np.empty_like(arr)

    small = arr < _SERIES_CUTOFF
    if small.any():
        zs = arr[small]
        quarter = 0.25 * zs * zs
        term = np.ones_like(zs)
        total = np.ones_like(zs)
        for k in range(1, _SERIES_TERMS + 1):
            term = term * quarter / (k * k)
            total += term
        out[small] = np.log(total)
    if (~small).any():
        zl = arr[~small]
        inv = 1.0 / zl
        term = np.ones_like(zl)
        total = np.ones_like(zl)
        for k in range(1, _ASYMPTOTIC_TERMS + 1):
            term = term * (2 * k - 1) ** 2 * inv / (8.0 * k)
            total += term
        out[~small] = zl - 0.5 * np.log(2.0 * math.pi * zl) + np.log(total)
    return out if arr.ndim else float(out)


def smoluchowski_concentration(spec: SmoluchowskiSpec) -> np.ndarray:
    """Particle concentration n(v1, v2, t) sampled on the grid.

    Strictly positive everywhere; evaluated through
    ``bessel_i0_log`` so that separately overflowing factors never appear.
    """
    v = spec.grid()
    root_k = math.sqrt(spec.kernel_constant)
    tau = root_k * spec.time
    prefactor = root_k * spec.rate_a * spec.rate_b / (1.0 + tau / 2.0) ** 2
    # Outer products keep the matrix exactly symmetric when rate_a == rate_b.
    decay = (spec.rate_a * v)[:, None] + (spec.rate_b * v)[None, :]
    mixing = spec.rate_a * spec.rate_b * tau / (tau + 2.0)
    argument = 2.0 * np.sqrt(mixing * np.outer(v, v))
    return prefactor * np.exp(bessel_i0_log(argument) - decay)


def smoluchowski_solution(spec: SmoluchowskiSpec) -> np.ndarray:
    """Mass concentration ``(v1 + v2) * n(v1, v2, t)`` on the grid.

    This is the matrix the approximation experiments target.  All entries
    are finite and nonnegative; when the grid includes the origin the
    corner entry is exactly zero because the mass weight vanishes there.
    """
    v = spec.grid()
    weight = v[:, None] + v[None, :]
    return weight * smoluchowski_concentration(spec)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comments, then collect one whitespace-delimited
    # token.
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ValueError("malformed PGM header: unexpected end of file")
    return data[start:pos], pos


def load_image_pgm(path) -> np.ndarray:
    """Load a PGM image (ASCII ``P2`` or binary ``P5``) as a matrix in [0, 1].

    Pixels are divided by the declared maximum value.  Malformed headers,
    truncated payloads, out-of-range pixels, and non-positive maxima raise
    ``ValueError``.
    """
    with open(path, "rb") as handle:
        data = handle.read()

    magic, pos = _read_token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"unsupported PGM magic {magic!r}, expected P2 or P5")
    fields = []
    for _ in range(3):
        token, pos = _read_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise ValueError(f"malformed PGM header field {token!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ValueError(f"invalid PGM dimensions {width}x{height}")
    if maxval <= 0:
        raise ValueError(f"PGM maxval must be positive, got {maxval}")
    if maxval > 65535:
        raise ValueError(f"PGM maxval must be at most 65535, got {maxval}")

    count = width * height
    if magic == b"P2":
        try:
            pixels = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError:
            raise ValueError("malformed PGM payload: non-numeric pixel") from None
        if pixels.size != count:
            raise ValueError(f"PGM payload has {pixels.size} pixels, expected {count}")
    else:
        pos += 1  # exactly one whitespace byte separates header and payload
        wide = maxval > 255
        need = count * (2 if wide else 1)
        payload = data[pos : pos + need]
        if len(payload) != need:
            raise ValueError(f"truncated PGM payload: {len(payload)} bytes, expected {need}")
        raw = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
        pixels = (raw[0::2] << 8) | raw[1::2] if wide else raw
    if (pixels < 0).any() or (pixels > maxval).any():
        raise ValueError("PGM pixel value outside [0, maxval]")
    return pixels.reshape(height, width).astype(np.float64) / float(maxval)
