"""Deterministic convergence criteria for series of dependent random terms.

Implements, over finite truncations N:

* ``mr_sum``          sum_{n<=N} |a_n|^2 log2^2(n+1), the classical
                      orthonormal-system criterion,
* ``theorem1_sum``    L = sum sum |a_n||a_m||gamma(n,m)| log2(n+1) log2(m+1),
                      the dependent-series criterion whose 8L bounds the
                      second moment of the running maximum,
* ``weighted_sum``    sum_{n<=N} |a_n|^2 n^{2b} log2^2(n+1), the
                      power-weighted form used with decaying kernels,
* ``gaussian_condition_sum``  the theorem1 double sum without log factors,
                      which also feeds the Sudakov-Fernique bound,

plus the Schur row-ratio estimator for boundedness of the power-decay
operator, the critical exponent (1-a)/2, and a finite-truncation
convergence diagnostic over geometric histories.

All criterion sums use compensated accumulation (see ``_accel``); double
sums run over the full N x N grid, recomputed per truncation mark.

Two-sided sequences fold to one-sided through the interleaving declared
in ``kernels`` (0, +1, -1, +2, -2, ...), and every weight is taken at the
one-sided position after folding. That keeps the maximal-inequality
bounds valid for folded series: the position weight dominates the
two-sided display weight log2(|n|+1), which would assign weight zero to
an n = 0 term and break the supremum bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels as _k
from ._accel import bilinear_dense, bilinear_lagged, comp_sum
from .errors import (
    InsufficientDataError,
    UnsupportedConfigurationError,
    ValidationError,
)

PLATEAU_THRESHOLD = 1e-4
GROWTH_THRESHOLD = 1e-2


# ---------------------------------------------------------------------------
# Coefficient sequences


@dataclass(frozen=True)
class CoefficientSequence:
    """Finitely supported coefficient sequence, stored in evaluation order.

    One-sided input keeps its order (slot k holds a_k, k = 1..N).
    Two-sided input is folded by the declared interleaving; slot k's
    original index is ``orig_index[k-1]``.
    """

    values: np.ndarray
    sidedness: str  # "one" | "two"
    orig_index: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 1:
            raise ValidationError("coefficient values must be a vector")
        if not np.isfinite(v).all():
            raise ValidationError("coefficient values must be finite")
        idx = np.asarray(self.orig_index, dtype=np.int64)
        if idx.shape != v.shape:
            raise ValidationError("orig_index must match values in length")
        if self.sidedness not in ("one", "two"):
            raise ValidationError(f"sidedness must be 'one' or 'two', got {self.sidedness!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "orig_index", idx)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def m_max(self) -> int:
        """Two-sided half-width M (range [-M, M])."""
        if self.sidedness != "two":
            raise UnsupportedConfigurationError("m_max is defined for two-sided sequences")
        return (len(self) - 1) // 2

    def abs_values(self) -> np.ndarray:
        return np.abs(self.values)


def one_sided(values) -> CoefficientSequence:
    v = np.asarray(values, dtype=np.complex128)
    idx = np.arange(1, v.shape[0] + 1, dtype=np.int64)
    return CoefficientSequence(values=v, sidedness="one", orig_index=idx)


def two_sided(centered_values) -> CoefficientSequence:
    """Fold a centered array (a_{-M}, ..., a_0, ..., a_M) to evaluation order."""
    v = np.asarray(centered_values, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] % 2 != 1:
        raise ValidationError("two-sided input must be a centered odd-length vector")
    m = (v.shape[0] - 1) // 2
    idx = _k.interleave_indices(m)
    return CoefficientSequence(values=v[idx + m], sidedness="two", orig_index=idx)


def from_items(pairs) -> CoefficientSequence:
    """Sequence from (index, value) items; sidedness inferred from the indices."""
    d = {}
    for n, val in pairs:
        n = int(n)
        if n in d:
            raise ValidationError(f"duplicate coefficient index {n}")
        d[n] = complex(val)
    if not d:
        raise ValidationError("no coefficients given")
    if min(d) >= 1:
        n_max = max(d)
        vals = np.zeros(n_max, dtype=np.complex128)
        for n, val in d.items():
            vals[n - 1] = val
        return one_sided(vals)
    m = max(abs(n) for n in d)
    vals = np.zeros(2 * m + 1, dtype=np.complex128)
    for n, val in d.items():
        vals[n + m] = val
    return two_sided(vals)


def load_coefficients_csv(path) -> CoefficientSequence:
    """Rows of (index, re[, im]); negative indices make the sequence two-sided."""
    import csv

    pairs = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            if i == 0 and not _numeric(cells[0]):
                continue  # header
            if len(cells) not in (2, 3):
                raise ValidationError(f"{path}: row {i + 1} needs 2 or 3 fields")
            try:
                n = int(cells[0])
                re = float(cells[1])
                im = float(cells[2]) if len(cells) == 3 else 0.0
            except ValueError as exc:
                raise ValidationError(f"{path}: row {i + 1}: {exc}") from exc
            pairs.append((n, complex(re, im)))
    if not pairs:
        raise ValidationError(f"{path}: no coefficient rows")
    return from_items(pairs)


def load_coefficients_json(path_or_obj) -> CoefficientSequence:
    """JSON array (one-sided, numbers or [re, im]) or an explicit object.

    The object form is {"sidedness": "one" | "two", "values": [...]}; a
    two-sided values list is centered (a_{-M} ... a_M).
    """
    import json

    if isinstance(path_or_obj, (str, bytes)):
        with open(path_or_obj) as fh:
            obj = json.load(fh)
    else:
        obj = path_or_obj
    if isinstance(obj, list):
        return one_sided(_complex_list(obj))
    if isinstance(obj, dict):
        side = obj.get("sidedness", "one")
        vals = _complex_list(obj.get("values", []))
        if side == "one":
            return one_sided(vals)
        if side == "two":
            return two_sided(vals)
        raise ValidationError(f"unknown sidedness {side!r}")
    raise ValidationError("coefficient JSON must be an array or object")


def _complex_list(items) -> np.ndarray:
    out = np.empty(len(items), dtype=np.complex128)
    for i, it in enumerate(items):
        if isinstance(it, (list, tuple)):
            if len(it) != 2:
                raise ValidationError(f"entry {i}: [re, im] pair expected")
            out[i] = complex(float(it[0]), float(it[1]))
        else:
            out[i] = complex(it)
    return out


def _numeric(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def as_sequence(a) -> CoefficientSequence:
    if isinstance(a, CoefficientSequence):
        return a
    return one_sided(np.asarray(a))


def align_sequence(a, n: int) -> CoefficientSequence:
    """Truncate or zero-pad a folded sequence to exactly n evaluation slots."""
    seq = as_sequence(a)
    if n < 0:
        raise ValidationError("length must be nonnegative")
    if len(seq) == n:
        return seq
    if len(seq) > n:
        return CoefficientSequence(
            values=seq.values[:n], sidedness=seq.sidedness,
            orig_index=seq.orig_index[:n],
        )
    vals = np.zeros(n, dtype=np.complex128)
    vals[: len(seq)] = seq.values
    if seq.sidedness == "one":
        idx = np.arange(1, n + 1, dtype=np.int64)
    else:
        idx = _k.interleave_indices(n // 2)[:n]
    return CoefficientSequence(values=vals, sidedness=seq.sidedness, orig_index=idx)


# ---------------------------------------------------------------------------
# Criterion values


@dataclass(frozen=True)
class CriterionValue:
    """A criterion sum at truncation N with its geometric history.

    history holds (mark, value) pairs, nondecreasing in the mark since
    every summand is nonnegative.
    """

    kind: str
    partial_value: float
    truncation: int
    history: tuple[tuple[int, float], ...]

    def history_values(self) -> np.ndarray:
        return np.array([v for _, v in self.history])

    def history_marks(self) -> np.ndarray:
        return np.array([m for m, _ in self.history])


def default_marks(N: int) -> list[int]:
    """Powers of two up to N, then N itself."""
    marks = []
    m = 1
    while m < N:
        marks.append(m)
        m *= 2
    marks.append(N)
    return marks


def _resolve_marks(N: int, marks) -> list[int]:
    if marks is None:
        return default_marks(N) if N > 0 else [0]
    out = sorted({int(m) for m in marks})
    if out and out[0] < 0:
        raise ValidationError("truncation marks must be nonnegative")
    if out and out[-1] > N:
        raise ValidationError(f"mark {out[-1]} exceeds truncation {N}")
    if not out or out[-1] != N:
        out.append(N)
    return out


def _check_truncation(a: CoefficientSequence, N: int) -> None:
    if N < 0:
        raise ValidationError("truncation must be nonnegative")
    if N > len(a):
        raise ValidationError(f"truncation {N} exceeds support length {len(a)}")


def _log_weights(N: int) -> np.ndarray:
    # position weights log2(k+1), k = 1..N after folding
    return np.log2(np.arange(1, N + 1, dtype=np.float64) + 1.0)


def mr_sum(a, N: int, marks=None) -> CriterionValue:
    """sum_{n<=N} |a_n|^2 log2^2(n+1), compensated."""
    a = as_sequence(a)
    _check_truncation(a, N)
    w = _log_weights(N)
    terms = np.abs(a.values[:N]) ** 2 * w**2
    hist = tuple((m, float(comp_sum(terms[:m]))) for m in _resolve_marks(N, marks))
    return CriterionValue("MR", hist[-1][1], N, hist)


def weighted_sum(a, b: float, N: int, marks=None) -> CriterionValue:
    """sum_{n<=N} |a_n|^2 n^{2b} log2^2(n+1), compensated."""
    if b < 0:
        raise ValidationError(f"weight exponent b must be nonnegative, got {b}")
    a = as_sequence(a)
    _check_truncation(a, N)
    n = np.arange(1, N + 1, dtype=np.float64)
    terms = np.abs(a.values[:N]) ** 2 * n ** (2.0 * b) * _log_weights(N) ** 2
    hist = tuple((m, float(comp_sum(terms[:m]))) for m in _resolve_marks(N, marks))
    return CriterionValue(f"weighted({b:g})", hist[-1][1], N, hist)


def _bilinear_history(u, kernel, idx, N, marks, kind) -> CriterionValue:
    """Full-grid double sums sum_{n,m<=mark} u_n u_m |gamma| at each mark."""
    kernel = _k.make_kernel(kernel)
    if kernel.variant == "explicit":
        base = kernel.index_base
        pos = idx - base
        if pos.size and (pos.min() < 0 or pos.max() >= kernel.size):
            raise ValidationError(
                f"kernel must be defined on the index range, explicit size {kernel.size}"
            )
        g_abs = np.ascontiguousarray(np.abs(kernel.matrix))
        hist = []
        for m in _resolve_marks(N, marks):
            p = pos[:m]
            gm = np.ascontiguousarray(g_abs[np.ix_(p, p)])
            hist.append((m, float(bilinear_dense(u[:m], gm))))
    else:
        span = int(np.abs(idx[:N, None] - idx[None, :N]).max(initial=0)) if N else 0
        glag = _k.abs_lag_table(kernel, span)
        hist = []
        for m in _resolve_marks(N, marks):
            hist.append((m, float(bilinear_lagged(u[:m], glag, idx[:m]))))
    return CriterionValue(kind, hist[-1][1], N, tuple(hist))


def _paired(a, kernel, N):
    """Validate the (sequence, kernel) pairing and fold in diagonal scales."""
    a = as_sequence(a)
    _check_truncation(a, N)
    kernel = _k.make_kernel(kernel)
    if kernel.variant == "explicit" and a.sidedness == "two":
        raise UnsupportedConfigurationError(
            "explicit kernels are one-sided tables; fold the kernel, not just the sequence"
        )
    vals = _k.apply_coefficient_scales(kernel, a.values[:N], a.orig_index[:N])
    return np.abs(vals), kernel, a.orig_index[:N]


def theorem1_sum(a, kernel, N: int, marks=None) -> CriterionValue:
    """L = sum sum |a_n||a_m||gamma(n,m)| log2(n+1) log2(m+1) over [1,N]^2.

    8L bounds E(sup_{j<=N} |S_j|^2); with the identity kernel the
    off-diagonal terms vanish and L reduces to mr_sum exactly.
    """
    absa, kernel, idx = _paired(a, kernel, N)
    u = absa * _log_weights(N)
    return _bilinear_history(u, kernel, idx, N, marks, "theorem1_L")


def gaussian_condition_sum(a, kernel, N: int, marks=None) -> CriterionValue:
    """sum sum |a_n||a_m||gamma(n,m)|, the log-free double sum."""
    absa, kernel, idx = _paired(a, kernel, N)
    return _bilinear_history(absa, kernel, idx, N, marks, "gaussian")


# ---------------------------------------------------------------------------
# Schur row-ratio boundedness estimate


@dataclass(frozen=True)
class SchurEstimate:
    """R_N history for the power-decay operator row test.

    admissible reflects the exponent condition a + b + c > 1 under which
    the rows stay bounded; r_values holds (N, R_N) over the grid and
    ratios holds (N, R_{2N}/R_N) for consecutive doubling pairs.
    """

    a_exp: float
    b_exp: float
    c_exp: float
    admissible: bool
    r_values: tuple[tuple[int, float], ...]
    ratios: tuple[tuple[int, float], ...]


def schur_bound_estimate(a_exp: float, b_exp: float, c_exp: float, N: int,
                         grid=None, zero_off_diagonal: bool = False) -> SchurEstimate:
    """Row-sum statistic R_N = max_n (1/x_n) sum_m beta_{n,m} x_m, x_n = n^{-c}.

    beta has off-diagonal |n-m|^{-a} n^{-b} m^{-b} and diagonal n^{-2b}
    (the diagonal stays in the sum; with the off-diagonal zeroed the rows
    reduce to the diagonal and R_N = 1). Reported at geometric
    truncations so a plateau (bounded operator) is observable.
    """
    for name, val in (("a", a_exp), ("b", b_exp), ("c", c_exp)):
        if val < 0:
            raise ValidationError(f"exponent {name} must be nonnegative, got {val}")
    if N < 2:
        raise ValidationError("N must be >= 2")
    if grid is None:
        g, grid = 2, []
        while g < N:
            grid.append(g)
            g *= 2
        grid.append(N)
    else:
        grid = sorted({int(g) for g in grid})
        if grid[0] < 2:
            raise ValidationError("grid truncations must be >= 2")
        if grid[-1] > N:
            raise ValidationError(f"grid point {grid[-1]} exceeds N={N}")

    r_values = [(g, _schur_r(a_exp, b_exp, c_exp, g, zero_off_diagonal)) for g in grid]
    ratios = [
        (n1, r2 / r1)
        for (n1, r1), (n2, r2) in zip(r_values, r_values[1:])
        if n2 == 2 * n1 and r1 > 0
    ]
    return SchurEstimate(
        a_exp=a_exp, b_exp=b_exp, c_exp=c_exp,
        admissible=bool(a_exp + b_exp + c_exp > 1.0),
        r_values=tuple(r_values), ratios=tuple(ratios),
    )


def _schur_r(a, b, c, N, zero_off_diagonal, chunk: int = 512) -> float:
    n = np.arange(1, N + 1, dtype=np.float64)
    x = n**-c
    diag_row_value = n ** (-2.0 * b)  # (1/x_n) * beta_nn * x_n
    if zero_off_diagonal:
        return float(diag_row_value.max())
    best = 0.0
    xb = x * n**-b  # m^{-b} x_m
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        rows = n[lo:hi, None]
        d = np.abs(rows - n[None, :])
        with np.errstate(divide="ignore"):
            beta = np.where(d == 0.0, 0.0, d**-a)
        sums = (beta * xb[None, :]).sum(axis=1) * (n[lo:hi] ** -b)
        vals = sums / x[lo:hi] + diag_row_value[lo:hi]
        best = max(best, float(vals.max()))
    return best


def threshold_b(a: float) -> float:
    """Critical weight exponent (1 - a) / 2 for kernel decay a in [0, 1]."""
    if not (0.0 <= a <= 1.0):
        raise ValidationError(f"decay exponent must be in [0, 1], got {a}")
    return (1.0 - a) / 2.0


# ---------------------------------------------------------------------------
# Finite-truncation convergence diagnostics


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Diagnostic read of a geometric truncation history, never a theorem."""

    verdict: str  # "plateau" | "growing" | "inconclusive"
    growth_exponent_estimate: float | None
    last_relative_increment: float


def convergence_diagnostic(history, plateau_threshold: float = PLATEAU_THRESHOLD,
                           growth_threshold: float = GROWTH_THRESHOLD) -> ConvergenceVerdict:
    """Classify a nondecreasing criterion history as plateau/growing/inconclusive.

    plateau: the last relative increment is below plateau_threshold.
    growing: the last three relative increments all sit at or above
             growth_threshold, or the absolute increments are strictly
             increasing across the last three steps.
    Anything else is inconclusive.
    """
    if isinstance(history, CriterionValue):
        pairs = history.history
    else:
        pairs = tuple(history)
    if len(pairs) < 4:
        raise InsufficientDataError(
            f"need values at >= 4 geometric truncations, got {len(pairs)}"
        )
    vals = np.array([float(v) for _, v in pairs])
    if (np.diff(vals) < -1e-12 * np.abs(vals[1:])).any():
        raise ValidationError("criterion history must be nondecreasing")
    inc = np.maximum(np.diff(vals), 0.0)
    denom = np.where(vals[1:] > 0, vals[1:], 1.0)
    rel = inc / denom
    last_rel = float(rel[-1])

    marks = np.array([float(m) for m, _ in pairs])
    pos = inc > 0
    if pos.sum() >= 2:
        slope = np.polyfit(np.log(marks[1:][pos]), np.log(inc[pos]), 1)[0]
        growth_exponent = float(slope)
    else:
        growth_exponent = None

    if last_rel < plateau_threshold:
        verdict = "plateau"
    elif (rel[-3:] >= growth_threshold).all() or (inc[-1] > inc[-2] > inc[-3]):
        verdict = "growing"
    else:
        verdict = "inconclusive"
    return ConvergenceVerdict(
        verdict=verdict,
        growth_exponent_estimate=growth_exponent,
        last_relative_increment=last_rel,
    )
