"""Probability measures on [0, 1] seen through their Fourier coefficients.

The trigonometric side of the package: a measure mu enters only through
mu_hat(n) = integral of exp(-2 pi i n t) d mu(t), which is exactly what
the fourier covariance kernel gamma(n, m) = mu_hat(n - m) consumes.

Three variants:

* ``lebesgue``  mu_hat(0) = 1 and nothing else,
* ``cantor``    the middle-thirds Cantor measure, with the classical
                product formula and exact 3-adic self-similarity
                mu_hat(3n) = mu_hat(n),
* ``table``     a finite table of coefficients at lags 0..n_max with
                Hermitian extension mu_hat(-n) = conj(mu_hat(n)).

On top of the coefficients: power-decay envelope fitting, sampling,
partial sums of trigonometric series at measure-distributed points, an
almost-everywhere convergence probe, Sobolev norms, and a two-window
witness test for positive Fourier dimension.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from . import criteria as _c
from ._accel import comp_sum
from ._accel import trig_partial_sums as _trig_accel
from .errors import (
    DegenerateFitError,
    InsufficientDataError,
    UnsupportedConfigurationError,
    ValidationError,
)

TWO_PI = 6.283185307179586  # 2.0 * math.pi, rounded once

# cos(x) >= 1 - x^2/2, so every factor with argument below this bound is
# within 1e-15 of 1; the truncated tail of the product is negligible.
CANTOR_TRUNCATION_THRESHOLD = 4.47e-8
# exact 3-adic reduction keeps arguments sane up to this index
CANTOR_INDEX_BUDGET = 3**20
CANTOR_SAMPLING_DIGITS = 40  # 3^-40 ~ 8e-20, far below float64 resolution

VARIANTS = ("lebesgue", "cantor", "table")


# ---------------------------------------------------------------------------
# Fourier coefficients


def cantor_fourier(n):
    """mu_hat(n) = (-1)^n prod_{k>=1} cos(2 pi n / 3^k) for the Cantor measure.

    Real-valued by symmetry of the measure about 1/2. Powers of three are
    divided out first, which makes mu_hat(3n) == mu_hat(n) exact in
    floating point, not just in theory; the remaining product is cut once
    its arguments drop below CANTOR_TRUNCATION_THRESHOLD.

    Accepts scalars or integer arrays; |n| beyond CANTOR_INDEX_BUDGET is
    rejected rather than silently degraded.
    """
    arr = np.asarray(n)
    if arr.dtype.kind not in "iu":
        if not (arr == np.floor(arr)).all():
            raise ValidationError("Fourier coefficient index must be an integer")
    arr = arr.astype(np.int64)
    scalar = arr.ndim == 0
    q = np.atleast_1d(arr).copy()
    if q.size and int(np.abs(q).max()) > CANTOR_INDEX_BUDGET:
        raise ValidationError(
            f"index {int(np.abs(q).max())} exceeds the Cantor budget 3^20"
        )
    sign = np.where(q % 2 == 0, 1.0, -1.0)
    q = np.abs(q)
    while True:
        m = (q > 0) & (q % 3 == 0)
        if not m.any():
            break
        q[m] //= 3
    vals = np.ones(q.shape)
    base = TWO_PI * q.astype(np.float64)
    k = 1
    while True:
        x = base / 3.0**k
        m = x >= CANTOR_TRUNCATION_THRESHOLD
        if not m.any():
            break
        vals[m] *= np.cos(x[m])
        k += 1
    out = sign * vals
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class MeasureSpec:
    """A measure presented through its Fourier coefficients.

    table (lags 0..n_max, Hermitian extension for negative lags) is only
    set for the table variant. envelope_K / envelope_a record a known
    decay bound |mu_hat(n)| <= K |n|^{-a} when there is one.
    """

    variant: str
    name: str
    support: tuple[float, float] = (0.0, 1.0)
    table: np.ndarray | None = None
    envelope_K: float | None = None
    envelope_a: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown measure variant {self.variant!r}")
        if self.variant == "table":
            if self.table is None:
                raise ValidationError("table measure needs a coefficient table")
            t = np.asarray(self.table)
            if t.ndim != 1 or t.size == 0:
                raise ValidationError("coefficient table must be a nonempty vector")
            if not np.isfinite(t).all() or (
                np.iscomplexobj(t) and not np.isfinite(t.imag).all()
            ):
                raise ValidationError("coefficient table must be finite")
            t = t.astype(np.complex128)
            if abs(t[0] - 1.0) > 1e-12:
                raise ValidationError(
                    f"a correlation table needs mu_hat(0) = 1, got {t[0]}"
                )
            if np.abs(t.imag).max() == 0.0:
                t = t.real.copy()
            object.__setattr__(self, "table", t)
            if self.envelope_K is not None:
                if self.envelope_a is None:
                    raise ValidationError("envelope needs both K and a")
                n = np.arange(1, t.shape[0], dtype=np.float64)
                excess = np.abs(t[1:]) - self.envelope_K * n**-self.envelope_a
                if t.shape[0] > 1 and excess.max() > 1e-12:
                    raise ValidationError(
                        f"table breaks its declared envelope by {excess.max():.3e}"
                    )

    @property
    def n_max(self) -> int:
        if self.variant != "table":
            raise UnsupportedConfigurationError("n_max is defined for table measures")
        return self.table.shape[0] - 1

    def fourier_coefficient(self, n):
        """mu_hat(n) for scalar or array n, negative lags by conjugation."""
        if self.variant == "cantor":
            return cantor_fourier(n)
        arr = np.asarray(n, dtype=np.int64)
        scalar = arr.ndim == 0
        idx = np.atleast_1d(arr)
        if self.variant == "lebesgue":
            out = (idx == 0).astype(np.float64)
            return float(out[0]) if scalar else out
        # table
        mag = np.abs(idx)
        if mag.size and int(mag.max()) > self.n_max:
            raise ValidationError(
                f"lag {int(mag.max())} missing from table (max lag {self.n_max})"
            )
        vals = self.table[mag]
        if np.iscomplexobj(vals):
            vals = np.where(idx < 0, np.conj(vals), vals)
        if scalar:
            return complex(vals[0]) if np.iscomplexobj(vals) else float(vals[0])
        return vals

    def describe(self) -> dict:
        d: dict = {"variant": self.variant, "name": self.name}
        if self.variant == "table":
            d["n_max"] = self.n_max
        if self.envelope_K is not None:
            d["envelope_K"] = self.envelope_K
            d["envelope_a"] = self.envelope_a
        return d


def lebesgue() -> MeasureSpec:
    return MeasureSpec(variant="lebesgue", name="lebesgue")


def cantor() -> MeasureSpec:
    return MeasureSpec(variant="cantor", name="cantor")


def fourier_table_measure(table, envelope_K=None, envelope_a=None,
                          name: str = "table") -> MeasureSpec:
    return MeasureSpec(
        variant="table", name=name, table=np.asarray(table),
        envelope_K=envelope_K, envelope_a=envelope_a,
    )


def synthetic_power_table(a: float, n_max: int, K: float = 1.0) -> MeasureSpec:
    """Exact power-law table mu_hat(n) = K n^{-a} for 1 <= n <= n_max."""
    if a < 0 or K <= 0:
        raise ValidationError("synthetic table needs a >= 0 and K > 0")
    if n_max < 1:
        raise ValidationError("synthetic table needs n_max >= 1")
    t = np.empty(n_max + 1)
    t[0] = 1.0
    n = np.arange(1, n_max + 1, dtype=np.float64)
    t[1:] = K * n**-a
    return fourier_table_measure(
        t, envelope_K=K, envelope_a=a, name=f"synthetic(K={K:g},a={a:g})"
    )


def measure_from_name(name: str) -> MeasureSpec:
    """Resolve "cantor", "lebesgue", "synthetic:a=..,n_max=..[,K=..]" or a CSV path."""
    text = name.strip()
    low = text.lower()
    if low == "cantor":
        return cantor()
    if low == "lebesgue":
        return lebesgue()
    if low.startswith("synthetic:"):
        params = {}
        for piece in text.split(":", 1)[1].split(","):
            if "=" not in piece:
                raise ValidationError(f"bad synthetic parameter {piece!r}")
            key, val = piece.split("=", 1)
            params[key.strip()] = val.strip()
        try:
            a = float(params.pop("a"))
            n_max = int(params.pop("n_max"))
            K = float(params.pop("K", "1.0"))
        except KeyError as exc:
            raise ValidationError(f"synthetic descriptor missing {exc}") from exc
        except ValueError as exc:
            raise ValidationError(f"bad synthetic descriptor {text!r}: {exc}") from exc
        if params:
            raise ValidationError(f"unknown synthetic parameters {sorted(params)}")
        return synthetic_power_table(a, n_max, K)
    if low.endswith(".csv") or os.path.exists(text):
        return load_measure_csv(text)
    raise ValidationError(f"unknown measure {name!r}")


def measure_from_descriptor(d: dict) -> MeasureSpec:
    d = dict(d)
    variant = d.pop("variant", d.pop("name", None))
    if variant in ("cantor", "lebesgue"):
        if d:
            raise ValidationError(f"unexpected measure parameters {sorted(d)}")
        return cantor() if variant == "cantor" else lebesgue()
    if variant == "synthetic":
        return synthetic_power_table(
            float(d.pop("a")), int(d.pop("n_max")), float(d.pop("K", 1.0))
        )
    if variant == "table":
        path = d.pop("path", None)
        values = d.pop("values", None)
        if (path is None) == (values is None):
            raise ValidationError("table measure needs exactly one of path/values")
        if path is not None:
            return load_measure_csv(path)
        return fourier_table_measure(_complexify(values))
    raise ValidationError(f"unknown measure variant {variant!r}")


def _complexify(values) -> np.ndarray:
    out = np.empty(len(values), dtype=np.complex128)
    for i, v in enumerate(values):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValidationError(f"table entry {i}: [re, im] pair expected")
            out[i] = complex(float(v[0]), float(v[1]))
        else:
            out[i] = complex(v)
    return out


def load_measure_csv(path) -> MeasureSpec:
    """Coefficient table from rows (n, re[, im]); lags must cover 0..n_max."""
    rows = {}
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            if i == 0 and not _numeric(cells[0]):
                continue
            if len(cells) not in (2, 3):
                raise ValidationError(f"{path}: row {i + 1} needs 2 or 3 fields")
            try:
                n = int(cells[0])
                re = float(cells[1])
                im = float(cells[2]) if len(cells) == 3 else 0.0
            except ValueError as exc:
                raise ValidationError(f"{path}: row {i + 1}: {exc}") from exc
            if n < 0:
                raise ValidationError(f"{path}: table lags are nonnegative, got {n}")
            if n in rows:
                raise ValidationError(f"{path}: duplicate lag {n}")
            rows[n] = complex(re, im)
    if not rows:
        raise ValidationError(f"{path}: no table rows")
    n_max = max(rows)
    missing = sorted(set(range(n_max + 1)) - set(rows))
    if missing:
        raise ValidationError(f"{path}: missing lags {missing[:5]} (table must cover 0..{n_max})")
    table = np.array([rows[n] for n in range(n_max + 1)])
    return fourier_table_measure(table, name=f"table:{os.path.basename(str(path))}")


def dump_measure_csv(mu: MeasureSpec, path) -> None:
    if mu.variant != "table":
        raise UnsupportedConfigurationError("only table measures round-trip to CSV")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re", "im"])
        for n in range(mu.n_max + 1):
            v = complex(mu.table[n])
            w.writerow([n, repr(v.real), repr(v.imag)])


def _numeric(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Decay envelope fitting


@dataclass(frozen=True)
class DecayFit:
    """Fitted envelope |mu_hat(n)| <= K_hat n^{-a_hat} over fit_range.

    a_hat comes from a least-squares line through the decay records
    (indices whose magnitude is not exceeded later in the range); K_hat
    is then the smallest constant making the envelope hold on the whole
    range, so max_violation is zero up to rounding.
    """

    K_hat: float
    a_hat: float
    max_violation: float
    fit_range: tuple[int, int]
    records_used: int


def decay_fit(mu: MeasureSpec, n_range) -> DecayFit:
    lo, hi = (int(x) for x in n_range)
    if lo < 1 or hi < lo:
        raise ValidationError(f"need 1 <= lo <= hi, got ({lo}, {hi})")
    n = np.arange(lo, hi + 1, dtype=np.int64)
    mag = np.abs(np.asarray(mu.fourier_coefficient(n)))
    # right-records: magnitude not exceeded anywhere later in the window
    tail_max = np.maximum.accumulate(mag[::-1])[::-1]
    rec = (mag >= tail_max) & (mag > 0.0)
    used = int(rec.sum())
    if used < 2:
        raise DegenerateFitError(
            f"{used} positive decay record(s) in [{lo}, {hi}]; no envelope to fit"
        )
    slope = np.polyfit(np.log(n[rec].astype(np.float64)), np.log(mag[rec]), 1)[0]
    a_hat = float(-slope)
    nf = n.astype(np.float64)
    K_hat = float((mag * nf**a_hat).max())
    violation = mag - K_hat * nf**-a_hat
    return DecayFit(
        K_hat=K_hat, a_hat=a_hat,
        max_violation=float(max(violation.max(), 0.0)),
        fit_range=(lo, hi), records_used=used,
    )


# ---------------------------------------------------------------------------
# Sampling


def sample_measure(mu: MeasureSpec, count: int, seed: int) -> np.ndarray:
    """count iid draws from mu, reproducible from the seed.

    Cantor points come from 40 independent ternary digits in {0, 2};
    table measures have no generic sampler and are refused.
    """
    count = int(count)
    if count < 0:
        raise ValidationError("sample count must be nonnegative")
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    if mu.variant == "lebesgue":
        return gen.random(count)
    if mu.variant == "cantor":
        digits = gen.integers(0, 2, size=(count, CANTOR_SAMPLING_DIGITS), dtype=np.int64)
        weights = 3.0 ** -np.arange(1, CANTOR_SAMPLING_DIGITS + 1, dtype=np.float64)
        return (2.0 * digits) @ weights
    raise UnsupportedConfigurationError(
        f"no sampler for measure variant {mu.variant!r}"
    )


# ---------------------------------------------------------------------------
# Trigonometric partial sums


def _folded_parts(a, m_needed: int):
    """Split a coefficient sequence into (a_0, a_{+n}, a_{-n}), zero-padded."""
    seq = _c.as_sequence(a)
    if seq.sidedness == "one":
        a0 = 0.0 + 0.0j
        apos = np.ascontiguousarray(seq.values)
        aneg = np.zeros_like(apos)
    else:
        a0 = complex(seq.values[0])
        apos = np.ascontiguousarray(seq.values[1::2])
        aneg = np.ascontiguousarray(seq.values[2::2])
    if m_needed > apos.shape[0]:
        pad = m_needed - apos.shape[0]
        apos = np.concatenate([apos, np.zeros(pad, dtype=np.complex128)])
        aneg = np.concatenate([aneg, np.zeros(pad, dtype=np.complex128)])
    return a0, apos, aneg


def partial_sum_table(a, ts, marks) -> np.ndarray:
    """S_M(t) = sum_{|n| <= M} a_n exp(2 pi i n t) at every (t, M) pair.

    Returns a (len(ts), len(marks)) complex array; marks are deduplicated
    and sorted. Marks beyond the sequence support read zero coefficients,
    so the columns there repeat the full sum exactly.
    """
    ts = np.asarray(ts, dtype=np.float64).ravel()
    ms = np.asarray(sorted({int(m) for m in marks}), dtype=np.int64)
    if ms.size == 0:
        raise ValidationError("no truncation marks")
    if ms[0] < 0:
        raise ValidationError("truncation marks must be nonnegative")
    a0, apos, aneg = _folded_parts(a, int(ms[-1]))
    return _trig_accel(a0, apos, aneg, ts, ms)


def trig_partial_sum(a, t: float, M: int) -> complex:
    return complex(partial_sum_table(a, [t], [int(M)])[0, 0])


# ---------------------------------------------------------------------------
# Almost-everywhere convergence probe


@dataclass(frozen=True)
class AeProbeResult:
    """Oscillation of S_M(t) across successive truncations, at sampled points.

    osc[j, i] = |S_{M_{j+1}}(t_i) - S_{M_j}(t_i)|, the gap between
    consecutive truncation marks. The verdict is "decreasing" when the
    per-gap medians are weakly nonincreasing and the final median gap
    sits below osc_tol; it only ever claims a finite-truncation trend,
    not convergence itself.
    """

    truncations: tuple[int, ...]
    points: np.ndarray
    partial_sums: np.ndarray
    osc: np.ndarray
    medians: np.ndarray
    fraction_below: float  # points whose final gap sits below osc_tol
    osc_tol: float
    verdict: str

    def max_osc_per_point(self) -> np.ndarray:
        return self.osc.max(axis=0)

    def rows(self):
        """Per (point, mark) rows: (t, M, |S_M(t)|, gap to the next mark or None)."""
        J = len(self.truncations)
        for i, t in enumerate(self.points):
            for j, M in enumerate(self.truncations):
                gap = float(self.osc[j, i]) if j < J - 1 else None
                yield (float(t), int(M), float(abs(self.partial_sums[i, j])), gap)


def ae_probe(a, mu: MeasureSpec, truncations, points: int, seed: int,
             osc_tol: float = 1e-3) -> AeProbeResult:
    ms = sorted({int(m) for m in truncations})
    if len(ms) < 3:
        raise InsufficientDataError(
            f"need at least 3 truncation marks to read a trend, got {len(ms)}"
        )
    if int(points) < 1:
        raise ValidationError("need at least one sample point")
    if osc_tol <= 0:
        raise ValidationError("osc_tol must be positive")
    ts = sample_measure(mu, int(points), seed)
    S = partial_sum_table(a, ts, ms)
    osc = np.abs(np.diff(S, axis=1)).T  # (J - 1, points)
    medians = np.median(osc, axis=1)
    trend_ok = bool((np.diff(medians) <= 1e-12 + 1e-9 * medians[:-1]).all())
    # a monotone trend alone is cheap: dyadic gaps of any smoothly decaying
    # sequence shrink by kernel cancellation even when the series diverges,
    # so "decreasing" also demands the final gap actually got small
    small_ok = float(medians[-1]) < osc_tol
    verdict = "decreasing" if (trend_ok and small_ok) else "inconclusive"
    return AeProbeResult(
        truncations=tuple(ms), points=ts, partial_sums=S, osc=osc,
        medians=medians, fraction_below=float((osc[-1] < osc_tol).mean()),
        osc_tol=float(osc_tol), verdict=verdict,
    )


# ---------------------------------------------------------------------------
# Sobolev norms and Fourier-dimension witnesses


def sobolev_norm(a, p: float) -> float:
    """H^p norm sqrt(sum |a_n|^2 (1 + n^2)^p) over the original indices."""
    if p < 0:
        raise ValidationError(f"Sobolev exponent p must be nonnegative, got {p}")
    seq = _c.as_sequence(a)
    n = seq.orig_index.astype(np.float64)
    terms = np.abs(seq.values) ** 2 * (1.0 + n * n) ** float(p)
    return math.sqrt(comp_sum(terms))


@dataclass(frozen=True)
class WitnessReport:
    """Two-window contraction test of |mu_hat(n)|^2 |n|^alpha on [lo, hi].

    witness means the statistic's maximum over the upper half of the
    range sits below the smallness factor times its maximum over the
    lower half: a finite-range stand-in for |mu_hat(n)|^2 = o(|n|^{-alpha}),
    hence for Fourier dimension >= alpha. A failed contraction proves
    nothing in either direction; both window maxima stay in the report
    so the margin is visible.
    """

    alpha: float
    n_range: tuple[int, int]
    first_half_max: float
    second_half_max: float
    smallness: float
    witness: bool


def fourier_dimension_witness(mu: MeasureSpec, alpha: float, n_range,
                              smallness: float = 0.9) -> WitnessReport:
    if not (0.0 <= alpha <= 1.0):
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    if not (0.0 < smallness < 1.0):
        raise ValidationError(f"smallness must lie in (0, 1), got {smallness}")
    lo, hi = (int(x) for x in n_range)
    if lo < 1:
        raise ValidationError(f"range must start at 1 or later, got {lo}")
    if hi < lo + 1:
        raise InsufficientDataError(
            f"range ({lo}, {hi}) has no room for two comparison windows"
        )
    mid = (lo + hi) // 2
    n1 = np.arange(lo, mid + 1, dtype=np.int64)
    n2 = np.arange(mid + 1, hi + 1, dtype=np.int64)
    s1 = np.abs(np.asarray(mu.fourier_coefficient(n1))) ** 2 * n1.astype(np.float64) ** alpha
    s2 = np.abs(np.asarray(mu.fourier_coefficient(n2))) ** 2 * n2.astype(np.float64) ** alpha
    m1 = float(s1.max())
    m2 = float(s2.max())
    witness = (m2 <= smallness * m1) if m1 > 0.0 else (m2 == 0.0)
    return WitnessReport(
        alpha=float(alpha), n_range=(lo, hi),
        first_half_max=m1, second_half_max=m2,
        smallness=float(smallness), witness=bool(witness),
    )
