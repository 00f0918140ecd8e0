"""Dyadic index decompositions used by the chaining argument.

Any truncation point 1 <= j <= 2^r expands as j = sum_k xi_k 2^{r-k}
with binary digits xi_0, ..., xi_r; the running sum S_j then splits into
at most r + 1 partial sums over half-open dyadic blocks. These helpers
make that bookkeeping explicit and testable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


def dyadic_digits(j: int, r: int) -> tuple[int, ...]:
    """Binary digits (xi_0, ..., xi_r) of j, most significant first.

    j = sum_{k=0}^{r} xi_k 2^{r-k}, valid for 1 <= j <= 2^r. The leading
    digit xi_0 is 1 only for j = 2^r.
    """
    if r < 0:
        raise ValidationError(f"depth r must be nonnegative, got {r}")
    if not (1 <= j <= 2**r):
        raise ValidationError(f"j must satisfy 1 <= j <= 2^{r}, got {j}")
    return tuple((j >> (r - k)) & 1 for k in range(r + 1))


def dyadic_intervals(j: int, r: int) -> list[tuple[int, int]]:
    """Half-open blocks (start, end] partitioning (0, j] along dyadic digits.

    Block k (when its digit is 1) covers the 2^{r-k} indices after the
    partial sum of the more significant digits, so the union over k is
    exactly (0, j] and consecutive blocks abut.
    """
    digits = dyadic_digits(j, r)
    intervals = []
    start = 0
    for k, xi in enumerate(digits):
        if xi:
            end = start + 2 ** (r - k)
            intervals.append((start, end))
            start = end
    return intervals


@dataclass(frozen=True)
class DyadicDecomposition:
    j: int
    r: int
    digits: tuple[int, ...]
    intervals: tuple[tuple[int, int], ...]


def decompose(j: int, r: int) -> DyadicDecomposition:
    return DyadicDecomposition(
        j=j, r=r,
        digits=dyadic_digits(j, r),
        intervals=tuple(dyadic_intervals(j, r)),
    )
