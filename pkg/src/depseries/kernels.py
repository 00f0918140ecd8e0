"""Covariance kernels gamma(n, m) = E(X_n conj(X_m)).

Construction from descriptors, truncation to Gram matrices, positive
semidefiniteness checks, the logged eigenvalue-clipping repair, and the
CSV/JSON external formats. Kernels are stored unit-diagonal; an explicit
matrix with a different diagonal is rescaled and the scale factors are
meant to be folded into the coefficient sequence (see
``apply_coefficient_scales``).

Variants
--------
identity      gamma(n, m) = delta_{nm}, an orthonormal system.
all_ones      gamma(n, m) = 1, every X_n the same unit variable.
power_decay   gamma(n, n) = 1, gamma(n, m) = K |n - m|^{-a} off the diagonal.
fourier       gamma(n, m) = mu_hat(n - m) for a measure mu on the circle.
explicit      a finite Hermitian matrix, indexed from ``index_base``.

The identity, all_ones, power_decay and fourier variants are stationary:
gamma depends only on n - m, so criteria route them through a lag table.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ._accel import bilinear_dense, bilinear_lagged  # noqa: F401  (re-exported for criteria)
from .errors import (
    ContractViolationError,
    KernelIndexError,
    NumericalError,
    ValidationError,
)

log = logging.getLogger(__name__)

VARIANTS = ("identity", "all_ones", "power_decay", "fourier", "explicit")
STATIONARY_VARIANTS = ("identity", "all_ones", "power_decay", "fourier")

#: Default PSD slack, relative to the largest eigenvalue. Standard
#: numerical headroom for O(N^3) factorizations at N <= 4096.
DEFAULT_PSD_RTOL = 1e-8

#: Hermitian deviation (relative to the largest entry) beyond which an
#: explicit matrix is rejected instead of silently symmetrized.
HERMITIAN_RTOL = 1e-8


def interleave_indices(m_max: int) -> np.ndarray:
    """Folding order for two-sided problems: 0, +1, -1, +2, -2, ...

    Any fixed enumeration of the integers is admissible for the
    absolute-value criteria; this one is the declared convention, and
    every module that folds uses it.
    """
    if m_max < 0:
        raise ValidationError("m_max must be nonnegative")
    out = np.zeros(2 * m_max + 1, dtype=np.int64)
    j = np.arange(1, m_max + 1, dtype=np.int64)
    out[2 * j - 1] = j
    out[2 * j] = -j
    return out


@dataclass(frozen=True)
class CovarianceKernel:
    """A rule gamma(n, m) with unit diagonal and Hermitian symmetry.

    ``coeff_scale`` is set only for explicit matrices whose raw diagonal
    was not 1: entry i holds sigma_i = sqrt(raw gamma(i, i)), and the
    stored matrix is the rescaled gamma / (sigma_n sigma_m).
    """

    variant: str
    index_base: int = 1
    K: float | None = None
    a: float | None = None
    mu: object | None = None  # duck-typed: needs .fourier_coefficient(n)
    matrix: np.ndarray | None = None
    coeff_scale: np.ndarray | None = None

    @property
    def is_stationary(self) -> bool:
        return self.variant in STATIONARY_VARIANTS

    @property
    def size(self) -> int | None:
        return None if self.matrix is None else self.matrix.shape[0]

    def describe(self) -> dict:
        """Plain-data descriptor (round-trips through make_kernel for formula variants)."""
        d: dict = {"variant": self.variant, "index_base": self.index_base}
        if self.variant == "power_decay":
            d.update(K=self.K, a=self.a)
        elif self.variant == "fourier":
            d["measure"] = getattr(self.mu, "variant", repr(self.mu))
        elif self.variant == "explicit":
            d["size"] = self.size
        return d


def make_kernel(spec) -> CovarianceKernel:
    """Build a kernel from a descriptor.

    Accepts a dict (the JSON descriptor schema), a compact string such as
    ``"power_decay:K=1,a=1"`` or ``"fourier:cantor"``, or an existing
    CovarianceKernel (returned unchanged).
    """
    if isinstance(spec, CovarianceKernel):
        return spec
    if isinstance(spec, str):
        spec = _parse_compact_descriptor(spec)
    if not isinstance(spec, dict):
        raise ValidationError(f"kernel descriptor must be a dict or string, got {type(spec).__name__}")
    spec = dict(spec)
    variant = spec.pop("variant", None)
    index_base = int(spec.pop("index_base", 1))
    if variant not in VARIANTS:
        raise ValidationError(f"unknown kernel variant {variant!r}; expected one of {VARIANTS}")

    if variant in ("identity", "all_ones"):
        _reject_extras(variant, spec)
        return CovarianceKernel(variant=variant, index_base=index_base)

    if variant == "power_decay":
        K = spec.pop("K", None)
        a = spec.pop("a", None)
        _reject_extras(variant, spec)
        if K is None or a is None:
            raise ValidationError("power_decay needs K and a")
        K, a = float(K), float(a)
        if not (K > 0):
            raise ValidationError(f"power_decay needs K > 0, got {K}")
        if not (a >= 0):
            raise ValidationError(f"power_decay needs a >= 0, got {a}")
        return CovarianceKernel(variant=variant, index_base=index_base, K=K, a=a)

    if variant == "fourier":
        mu = spec.pop("measure", spec.pop("mu", None))
        _reject_extras(variant, spec)
        if mu is None:
            raise ValidationError("fourier kernel needs a measure")
        mu = _resolve_measure(mu)
        return CovarianceKernel(variant=variant, index_base=index_base, mu=mu)

    # explicit
    matrix = spec.pop("matrix", None)
    path = spec.pop("path", None)
    _reject_extras(variant, spec)
    if matrix is None and path is None:
        raise ValidationError("explicit kernel needs a matrix or a path")
    if matrix is None:
        matrix = load_explicit_csv(path)
    else:
        matrix = _json_matrix(matrix)
    return _make_explicit(matrix, index_base)


def _reject_extras(variant, leftover):
    if leftover:
        raise ValidationError(f"unexpected {variant} descriptor keys: {sorted(leftover)}")


def _parse_compact_descriptor(text: str) -> dict:
    """Parse ``name`` or ``name:arg`` or ``name:k=v,k=v`` CLI descriptors."""
    head, _, tail = text.partition(":")
    head = head.strip()
    if head in ("identity", "all_ones"):
        if tail:
            raise ValidationError(f"{head} takes no parameters, got {tail!r}")
        return {"variant": head}
    if head == "power_decay":
        out: dict = {"variant": head}
        for part in filter(None, (p.strip() for p in tail.split(","))):
            key, eq, val = part.partition("=")
            if not eq or key.strip() not in ("K", "a"):
                raise ValidationError(f"bad power_decay parameter {part!r}")
            out[key.strip()] = float(val)
        return out
    if head == "fourier":
        if not tail:
            raise ValidationError("fourier descriptor needs a measure name or table path")
        return {"variant": head, "measure": tail.strip()}
    if head == "explicit":
        if not tail:
            raise ValidationError("explicit descriptor needs a CSV path")
        return {"variant": head, "path": tail.strip()}
    raise ValidationError(f"unknown kernel descriptor {text!r}")


def _resolve_measure(mu):
    if hasattr(mu, "fourier_coefficient"):
        return mu
    from . import measures  # deferred: measures does not import kernels

    if isinstance(mu, str):
        return measures.measure_from_name(mu)
    if isinstance(mu, dict):
        return measures.measure_from_descriptor(mu)
    raise ValidationError(f"cannot interpret measure {mu!r}")


def _json_matrix(obj) -> np.ndarray:
    """Matrix from JSON: rows of numbers, or rows of [re, im] pairs."""
    arr = np.asarray(obj)
    if arr.ndim == 3 and arr.shape[2] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    return np.asarray(arr, dtype=np.complex128)


def _make_explicit(matrix: np.ndarray, index_base: int) -> CovarianceKernel:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"explicit kernel matrix must be square, got shape {m.shape}")
    if m.size == 0:
        raise ValidationError("explicit kernel matrix is empty")
    if not np.isfinite(m).all():
        raise ValidationError("explicit kernel matrix has non-finite entries")
    scale = max(float(np.abs(m).max()), 1.0)
    dev = float(np.abs(m - m.conj().T).max())
    if dev > HERMITIAN_RTOL * scale:
        raise ValidationError(
            f"explicit kernel matrix is not Hermitian (max deviation {dev:.3e})"
        )
    m = (m + m.conj().T) / 2.0
    diag = m.diagonal()
    if np.abs(diag.imag).max(initial=0.0) > 0:
        raise ValidationError("kernel diagonal must be real")
    d = diag.real.copy()
    if (d <= 0).any():
        raise ValidationError("kernel diagonal must be positive (unit normalizable)")
    if np.allclose(d, 1.0, rtol=0, atol=1e-12):
        np.fill_diagonal(m, 1.0)
        return CovarianceKernel(variant="explicit", index_base=index_base, matrix=m)
    # unit-diagonal normalization; sigma_n goes to the paired coefficients
    sigma = np.sqrt(d)
    m = m / np.outer(sigma, sigma)
    m = (m + m.conj().T) / 2.0
    np.fill_diagonal(m, 1.0)
    return CovarianceKernel(
        variant="explicit", index_base=index_base, matrix=m, coeff_scale=sigma
    )


def kernel_eval(kernel: CovarianceKernel, n: int, m: int) -> complex:
    """gamma(n, m) at a single index pair.

    Formula variants evaluate anywhere on the integers (two-sided
    problems need negative indices); the explicit variant is defined only
    on [index_base, index_base + size).
    """
    n, m = int(n), int(m)
    v = kernel.variant
    if v == "identity":
        return 1.0 + 0.0j if n == m else 0.0 + 0.0j
    if v == "all_ones":
        return 1.0 + 0.0j
    if v == "power_decay":
        if n == m:
            return 1.0 + 0.0j
        return complex(kernel.K * float(abs(n - m)) ** -kernel.a)
    if v == "fourier":
        return complex(kernel.mu.fourier_coefficient(n - m))
    base = kernel.index_base
    size = kernel.size
    if not (base <= n < base + size and base <= m < base + size):
        raise KernelIndexError(
            f"index pair ({n}, {m}) outside explicit kernel range [{base}, {base + size})"
        )
    return complex(kernel.matrix[n - base, m - base])


def abs_lag_table(kernel: CovarianceKernel, d_max: int) -> np.ndarray:
    """|gamma| at lags 0..d_max for a stationary kernel."""
    if not kernel.is_stationary:
        raise ContractViolationError(f"{kernel.variant} kernel is not stationary")
    if d_max < 0:
        raise ValidationError("d_max must be nonnegative")
    v = kernel.variant
    if v == "identity":
        out = np.zeros(d_max + 1)
        out[0] = 1.0
        return out
    if v == "all_ones":
        return np.ones(d_max + 1)
    if v == "power_decay":
        out = np.empty(d_max + 1)
        out[0] = 1.0
        d = np.arange(1, d_max + 1, dtype=np.float64)
        out[1:] = kernel.K * d**-kernel.a
        return out
    lags = np.arange(0, d_max + 1, dtype=np.int64)
    return np.abs(np.asarray(kernel.mu.fourier_coefficient(lags), dtype=np.complex128))


def apply_coefficient_scales(kernel: CovarianceKernel, values: np.ndarray,
                             indices: np.ndarray) -> np.ndarray:
    """Fold the kernel's diagonal scales sigma_n into coefficient values.

    Identity transformation for unit-diagonal kernels. For a rescaled
    explicit kernel, a_n X_n = (a_n sigma_n)(X_n / sigma_n) keeps the
    series fixed while the kernel becomes unit-diagonal.
    """
    if kernel.coeff_scale is None:
        return values
    base = kernel.index_base
    pos = np.asarray(indices, dtype=np.int64) - base
    if pos.size and (pos.min() < 0 or pos.max() >= kernel.size):
        raise KernelIndexError("coefficient indices outside explicit kernel range")
    return values * kernel.coeff_scale[pos]


# ---------------------------------------------------------------------------
# Gram truncations


@dataclass(eq=False)
class GramMatrix:
    """N x N Hermitian truncation of a kernel.

    ``psd_tolerance`` holds the absolute slack used by the most recent
    validation (0.0 before any validation ran); ``min_eigen_estimate`` is
    filled in by validate_psd. ``factor_info`` is the factorization cache
    written by the sampling layer.
    """

    entries: np.ndarray
    size: int
    psd_tolerance: float = 0.0
    min_eigen_estimate: float | None = None
    indices: np.ndarray | None = None
    factor_info: object = field(default=None, repr=False)

    @property
    def is_real(self) -> bool:
        return float(np.abs(self.entries.imag).max(initial=0.0)) == 0.0


def gram_matrix(kernel: CovarianceKernel, N: int, indices=None) -> GramMatrix:
    """Truncate a kernel to the N x N Gram matrix.

    Default index range is [index_base, index_base + N); a folded
    two-sided problem passes its own original-index enumeration. The
    result is Hermitian exactly (averaged with its conjugate transpose).
    """
    if N < 1:
        raise ValidationError(f"N must be >= 1, got {N}")
    kernel = make_kernel(kernel)
    if indices is None:
        indices = kernel.index_base + np.arange(N, dtype=np.int64)
    else:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.shape != (N,):
            raise ValidationError("indices must be a length-N integer vector")

    v = kernel.variant
    if v == "identity":
        entries = np.eye(N, dtype=np.complex128)
    elif v == "all_ones":
        entries = np.ones((N, N), dtype=np.complex128)
    elif v == "power_decay":
        D = np.abs(indices[:, None] - indices[None, :]).astype(np.float64)
        with np.errstate(divide="ignore"):
            entries = np.where(D == 0, 1.0, kernel.K * D**-kernel.a).astype(np.complex128)
    elif v == "fourier":
        lag = indices[:, None] - indices[None, :]
        span = int(np.abs(lag).max(initial=0))
        tab = np.asarray(kernel.mu.fourier_coefficient(np.arange(span + 1, dtype=np.int64)),
                         dtype=np.complex128)
        entries = np.where(lag >= 0, tab[np.abs(lag)], np.conj(tab[np.abs(lag)]))
    else:
        base = kernel.index_base
        if indices.min() < base or indices.max() >= base + kernel.size:
            raise ValidationError(
                f"truncation range exceeds explicit kernel size {kernel.size}"
            )
        pos = indices - base
        entries = kernel.matrix[np.ix_(pos, pos)]

    entries = np.asarray(entries, dtype=np.complex128)
    entries = (entries + entries.conj().T) / 2.0
    return GramMatrix(entries=entries, size=N, indices=indices)


def gram_from_array(matrix, psd_tolerance: float = 0.0) -> GramMatrix:
    """Wrap a raw square array as a GramMatrix (no normalization)."""
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"Gram matrix must be square, got shape {m.shape}")
    return GramMatrix(entries=m, size=m.shape[0], psd_tolerance=psd_tolerance)


@dataclass(frozen=True)
class PsdVerdict:
    valid: bool
    min_eigen: float
    tol_used: float


def validate_psd(gram: GramMatrix, tol: float | None = None) -> PsdVerdict:
    """Check the smallest eigenvalue against -tol.

    ``tol`` is an absolute slack; when omitted it defaults to
    DEFAULT_PSD_RTOL relative to the largest eigenvalue. Updates the
    Gram's ``min_eigen_estimate`` and ``psd_tolerance`` fields.
    """
    e = gram.entries
    scale = max(float(np.abs(e).max(initial=0.0)), 1.0)
    dev = float(np.abs(e - e.conj().T).max(initial=0.0))
    if dev > 1e-12 * scale:
        raise ContractViolationError(
            f"Gram matrix is not Hermitian (max deviation {dev:.3e})"
        )
    if tol is not None and tol < 0:
        raise ValidationError("tol must be nonnegative")
    try:
        w = np.linalg.eigvalsh(e)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue estimation failed: {exc}") from exc
    lam_min = float(w[0])
    lam_max = float(w[-1])
    tol_used = float(tol) if tol is not None else DEFAULT_PSD_RTOL * max(lam_max, 0.0)
    gram.min_eigen_estimate = lam_min
    gram.psd_tolerance = tol_used
    return PsdVerdict(valid=lam_min >= -tol_used, min_eigen=lam_min, tol_used=tol_used)


@dataclass(frozen=True)
class RepairInfo:
    magnitude: float  # most negative eigenvalue clipped to zero
    max_diag_shift: float  # largest diagonal renormalization applied


def repair_psd(gram: GramMatrix) -> tuple[GramMatrix, RepairInfo]:
    """Eigenvalue-clipping repair: negatives to zero, diagonal back to 1.

    Never silent: the repair magnitude is logged here and must be carried
    into any report describing samples drawn from the result.
    """
    try:
        w, v = np.linalg.eigh(gram.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed during repair: {exc}") from exc
    magnitude = max(0.0, -float(w[0]))
    w = np.clip(w, 0.0, None)
    repaired = (v * w) @ v.conj().T
    repaired = (repaired + repaired.conj().T) / 2.0
    d = repaired.diagonal().real.copy()
    live = d > 1e-300  # zero-variance rows stay as they are
    s = np.ones_like(d)
    s[live] = 1.0 / np.sqrt(d[live])
    repaired = repaired * np.outer(s, s)
    repaired = (repaired + repaired.conj().T) / 2.0
    np.fill_diagonal(repaired, np.where(live, 1.0, repaired.diagonal().real))
    max_shift = float(np.abs(d[live] - 1.0).max(initial=0.0))
    log.warning(
        "PSD repair: clipped eigenvalues down to %.6e, max diagonal shift %.3e",
        magnitude, max_shift,
    )
    out = GramMatrix(entries=repaired, size=gram.size, indices=gram.indices)
    return out, RepairInfo(magnitude=magnitude, max_diag_shift=max_shift)


# ---------------------------------------------------------------------------
# External formats


def load_explicit_csv(path) -> np.ndarray:
    """Load a complex matrix from CSV: each row holds 2N fields re,im,re,im,..."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{path}: empty kernel CSV")
    out = []
    for i, row in enumerate(rows):
        vals = [c.strip() for c in row if c.strip()]
        if len(vals) % 2:
            raise ValidationError(f"{path}: row {i + 1} has odd field count {len(vals)}")
        try:
            nums = [float(c) for c in vals]
        except ValueError as exc:
            raise ValidationError(f"{path}: row {i + 1}: {exc}") from exc
        out.append([complex(nums[2 * j], nums[2 * j + 1]) for j in range(len(nums) // 2)])
    widths = {len(r) for r in out}
    if len(widths) != 1:
        raise ValidationError(f"{path}: ragged rows, widths {sorted(widths)}")
    return np.asarray(out, dtype=np.complex128)


def dump_explicit_csv(matrix: np.ndarray, path) -> None:
    m = np.asarray(matrix, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in m:
            flat = []
            for z in row:
                flat.extend((repr(float(z.real)), repr(float(z.imag))))
            w.writerow(flat)


def kernel_from_descriptor(desc) -> CovarianceKernel:
    """CLI entry point: JSON file path, JSON text, compact string, or dict."""
    if isinstance(desc, (dict, CovarianceKernel)):
        return make_kernel(desc)
    if not isinstance(desc, str):
        raise ValidationError(f"cannot interpret kernel descriptor {desc!r}")
    text = desc.strip()
    if text.endswith(".json"):
        with open(text) as fh:
            return make_kernel(json.load(fh))
    if text.startswith("{"):
        return make_kernel(json.loads(text))
    return make_kernel(text)
