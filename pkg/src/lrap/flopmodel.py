"""Analytic flop-cost model for every method and sketch family.

The model evaluates closed-form operation counts; nothing is instrumented
at runtime.  Costing conventions:

* thin QR of a tall m x n matrix with the orthogonal factor formed:
  ``4 m n^2 - (4/3) n^3``;
* SVD of a tall matrix: ``14 m n^2 + 8 n^3`` in general, ``6 m n^2 + 20 n^3``
  for strongly rectangular input, ``21 m^3`` for square input;
* Gaussian sampling is priced at 75 flops per sample (one Box-Muller
  application per pair, uniform draws included); sign matrices cost one
  flop per entry to generate and one per entry to apply (no floating-point
  multiplications); a sparse sign matrix of density ``rho`` costs
  ``(1 + rho) m n`` to generate and ``rho m n`` per vector to apply.

Per-iteration totals assume the iterate is clamped, re-projected to rank r,
and reconstructed densely.  Initial-approximation costs drop the dense
reconstruction: randomized methods keep their first approximation in
factored form, while the deterministic ones pay one square SVD plus the
reconstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .methods import MethodSpec

__all__ = [
    "FlopReport",
    "dominant_coefficient",
    "flop_report",
    "flops_init",
    "flops_per_iteration",
    "flops_qr",
    "flops_sketch_apply",
    "flops_sketch_gen",
    "flops_svd",
    "two_significant",
]

SVD_VARIANTS = ("general", "tall", "square")


def flops_qr(m: int, n: int) -> float:
    """Cost of a thin Householder QR with Q formed explicitly."""
    if m < n or n < 1:
        raise ValueError(f"qr cost requires m >= n >= 1, got {m}x{n}")
    return 4.0 * m * n * n - (4.0 / 3.0) * n**3


def flops_svd(m: int, n: int, variant: str = "general") -> float:
    """Cost of an economic SVD of an m x n matrix, m >= n."""
    if variant not in SVD_VARIANTS:
        raise ValueError(f"unknown SVD variant {variant!r}, expected one of {SVD_VARIANTS}")
    if m < n or n < 1:
        raise ValueError(f"svd cost requires m >= n >= 1, got {m}x{n}")
    if variant == "square":
        if m != n:
            raise ValueError(f"square SVD variant requires m == n, got {m}x{n}")
        return 21.0 * m**3
    if variant == "tall":
        return 6.0 * m * n * n + 20.0 * n**3
    return 14.0 * m * n * n + 8.0 * n**3


def _check_kind(kind: str, density: float):
    if kind not in ("gaussian", "rademacher", "sparse"):
        raise ValueError(f"unknown sketch kind {kind!r}")
    if kind == "sparse" and not 0.0 < density <= 1.0:
        raise ValueError(f"sparse density must be in (0, 1], got {density}")


def flops_sketch_gen(kind: str, density: float, rows: int, cols: int) -> float:
    """Cost of drawing a rows x cols test matrix."""
    _check_kind(kind, density)
    size = float(rows * cols)
    if kind == "gaussian":
        return 75.0 * size
    if kind == "rademacher":
        return size
    return (1.0 + density) * size


def flops_sketch_apply(kind: str, density: float, m: int, n: int, k: int) -> float:
    """Cost of applying an m x n test matrix across k vectors."""
    _check_kind(kind, density)
    size = float(m * n * k)
    if kind == "gaussian":
        return 2.0 * size
    if kind == "rademacher":
        return size
    return density * size


def _hmt_iteration(m, n, r, k, p, kind, rho) -> float:
    sketch_mn = {"gaussian": 4 * p + 4, "rademacher": 4 * p + 3, "sparse": 4 * p + 2 + rho}[kind]
    gen = {"gaussian": 75.0 * n * k, "rademacher": float(n * k), "sparse": (1 + rho) * n * k}[kind]
    return (
        sketch_mn * m * n * k
        + 2.0 * m * n * r
        + (4 * p + 6) * (m + n) * k * k
        + n * r
        + gen
        + (8.0 / 3.0) * (7 - p) * k**3
    )


def _tropp_iteration(m, n, r, k, l, kind, rho) -> float:
    if kind == "gaussian":
        mn_coeff = 2.0 * (r + k + l)
        mkl = 2.0 * m * k * l
        gen = 75.0 * (n * k + m * l)
    elif kind == "rademacher":
        mn_coeff = 2.0 * r + k + l
        mkl = 1.0 * m * k * l
        gen = float(n * k + m * l)
    else:
        mn_coeff = 2.0 * r + rho * k + rho * l
        mkl = rho * m * k * l
        gen = (1.0 + rho) * (n * k + m * l)
    return (
        mn_coeff * m * n
        + mkl
        + 5.0 * m * k * k
        + 7.0 * n * k * k
        + 2.0 * n * k * l
        + gen
        + n * r
        + (17.0 + 1.0 / 3.0) * k**3
        + 4.0 * l * k * k
    )


def _gn_iteration(m, n, r, l, kind, rho) -> float:
    if kind == "gaussian":
        mn_coeff = 4.0 * r + 2.0 * l
        nlr = 4.0 * n * l * r
        gen = 75.0 * (n * r + m * l)
    elif kind == "rademacher":
        mn_coeff = 3.0 * r + l
        nlr = 3.0 * n * l * r
        gen = float(n * r + m * l)
    else:
        mn_coeff = 2.0 * r + rho * r + rho * l
        nlr = (2.0 + rho) * n * l * r
        gen = (1.0 + rho) * (n * r + m * l)
    return mn_coeff * m * n + nlr + m * r * r + gen + 4.0 * l * r * r - (4.0 / 3.0) * r**3


def _dims(spec: MethodSpec, m: int, n: int) -> tuple[int, int]:
    if m < 1 or n < 1:
        raise ValueError(f"matrix shape must be positive, got {m}x{n}")
    if spec.r > min(m, n):
        raise ValueError(f"target rank {spec.r} exceeds min dimension of {m}x{n}")
    # The model assumes a tall matrix; a wide problem is costed transposed.
    return (m, n) if m >= n else (n, m)


def flops_per_iteration(spec: MethodSpec, m: int, n: int) -> float:
    """Flops for one full iteration of the selected method on an m x n target."""
    m, n = _dims(spec, m, n)
    r = spec.r
    if spec.method in ("svd", "tangent") and spec.sketch is not None:
        raise ValueError(f"{spec.method} takes no sketch")
    if spec.method == "svd":
        variant = "square" if m == n else "general"
        return flops_svd(m, n, variant) + 2.0 * m * n * r + n * r
    if spec.method == "tangent":
        return (
            6.0 * m * n * r
            + 10.0 * m * r * r
            + 12.0 * n * r * r
            + n * r
            + (165.0 + 1.0 / 3.0) * r**3
        )
    kind, rho = spec.sketch.kind, spec.sketch.density
    if spec.method == "hmt":
        return _hmt_iteration(m, n, r, spec.k, spec.p, kind, rho)
    if spec.method == "tropp":
        return _tropp_iteration(m, n, r, spec.k, spec.l, kind, rho)
    return _gn_iteration(m, n, r, spec.l, kind, rho)


def flops_init(spec: MethodSpec, m: int, n: int) -> float:
    """Flops to build the initial rank-r approximation of a dense target.

    Deterministic methods: one square (or general) SVD plus the dense
    reconstruction.  Randomized methods: one application of their projection
    with the result kept in factored form, i.e. the per-iteration cost minus
    the reconstruction terms (``2 m n r`` plus the ``n r`` scaling for the
    methods that carry singular values).
    """
    m_t, n_t = _dims(spec, m, n)
    r = spec.r
    if spec.method in ("svd", "tangent"):
        variant = "square" if m_t == n_t else "general"
        return flops_svd(m_t, n_t, variant) + 2.0 * m_t * n_t * r
    per_iter = flops_per_iteration(spec, m, n)
    if spec.method == "gn":
        return per_iter - 2.0 * m_t * n_t * r
    return per_iter - 2.0 * m_t * n_t * r - n_t * r


def dominant_coefficient(spec: MethodSpec) -> float:
    """Leading per-iteration cost divided by the matrix size ``m n``.

    Defined for the tangent and randomized methods, whose iteration cost is
    linear in ``m n``; the exact-SVD method has no such form.
    """
    r = spec.r
    if spec.method == "tangent":
        return 6.0 * r
    if spec.method == "svd":
        raise ValueError("the exact SVD method has no mn-linear dominant term")
    kind, rho = spec.sketch.kind, spec.sketch.density
    if spec.method == "hmt":
        k, p = spec.k, spec.p
        return {
            "gaussian": (4.0 * p + 4.0) * k + 2.0 * r,
            "rademacher": (4.0 * p + 3.0) * k + 2.0 * r,
            "sparse": (4.0 * p + 2.0 + rho) * k + 2.0 * r,
        }[kind]
    if spec.method == "tropp":
        k, l = spec.k, spec.l
        return {
            "gaussian": 2.0 * (r + k + l),
            "rademacher": 2.0 * r + k + l,
            "sparse": 2.0 * r + rho * k + rho * l,
        }[kind]
    l = spec.l
    return {
        "gaussian": 4.0 * r + 2.0 * l,
        "rademacher": 3.0 * r + l,
        "sparse": 2.0 * r + rho * r + rho * l,
    }[spec.sketch.kind]


@dataclass(frozen=True)
class FlopReport:
    """Cost summary for one method at one problem size.

    ``dominant_mn_coefficient`` is None for the exact-SVD method.
    """

    init_flops: float
    per_iteration_flops: float
    dominant_mn_coefficient: float | None


def flop_report(spec: MethodSpec, m: int, n: int) -> FlopReport:
    dominant = None if spec.method == "svd" else dominant_coefficient(spec)
    return FlopReport(
        init_flops=flops_init(spec, m, n),
        per_iteration_flops=flops_per_iteration(spec, m, n),
        dominant_mn_coefficient=dominant,
    )


def two_significant(value: float) -> str:
    """Format a cost in scientific notation with two significant figures."""
    if not math.isfinite(value):
        raise ValueError(f"cannot format {value}")
    return f"{value:.1e}"
