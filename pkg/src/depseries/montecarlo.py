"""Monte Carlo validation of the explicit maximal inequalities.

Draws Gaussian vectors with a prescribed covariance, forms the running
sums S_j = sum_{n <= j} a_n X_n, and compares empirical moments of the
running maximum against the deterministic bounds:

* ``lemma``       E(max_j |S_j|^2) <= (2 + log2 N)^2 * G,
* ``theorem_8L``  E(max_j |S_j|^2) <= 8 L,
* ``blocks_4L``   sum_k E(max over dyadic block k)^2 <= 4 L,
* ``sudakov``     E(max_j |S_j|)   <= 2 sqrt(G)   (real case only),

where L is the log-weighted double sum and G the log-free one (see
``criteria``). A bound "passes" when the empirical mean plus
sigma_margin standard errors sits below the theoretical value; with
fewer than MIN_REPLICATES_FOR_VERDICT replicates the verdict is
"insufficient" rather than a coin flip.

Reproducibility contract: replicate r is drawn from its own counter
stream, Philox(key=seed) jumped r times, so results depend only on
(seed, r) and never on chunking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import criteria as _c
from . import kernels as _k
from .errors import (
    ContractViolationError,
    InsufficientDataError,
    NumericalError,
    UnsupportedConfigurationError,
    ValidationError,
)

log = logging.getLogger(__name__)

MIN_REPLICATES_FOR_VERDICT = 100
MAX_SIMULATION_N = 4096
JITTER_LADDER = (1e-12, 1e-10, 1e-8)
INV_SQRT2 = 0.7071067811865476

BOUND_ALIASES = {
    "lemma": "lemma",
    "theorem": "theorem_8L",
    "theorem_8l": "theorem_8L",
    "blocks": "blocks_4L",
    "blocks_4l": "blocks_4L",
    "sudakov": "sudakov",
}
DEFAULT_BOUNDS = ("lemma", "theorem_8L", "blocks_4L", "sudakov")


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    replicates: int
    seed: int
    field: str = "real"  # "real" | "complex"
    repair: bool = True
    sigma_margin: float = 3.0
    chunk: int = 4096

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.n > MAX_SIMULATION_N:
            # dense factorization only; past this the O(n^3) eigh and the
            # replicated n-column sample blocks stop being worth it
            raise ValidationError(
                f"n must be <= {MAX_SIMULATION_N} for dense covariance "
                f"factorization, got {self.n}"
            )
        if self.replicates < 1:
            raise ValidationError(f"replicates must be >= 1, got {self.replicates}")
        if self.seed < 0:
            raise ValidationError("seed must be a nonnegative integer")
        if self.field not in ("real", "complex"):
            raise ValidationError(f"field must be 'real' or 'complex', got {self.field!r}")
        if self.sigma_margin <= 0:
            raise ValidationError("sigma_margin must be positive")
        if self.chunk < 1:
            raise ValidationError("chunk must be >= 1")


# ---------------------------------------------------------------------------
# Covariance factorization


@dataclass(frozen=True)
class FactorInfo:
    """How the covariance was split into F with F F^H = G (or its repair)."""

    method: str  # "cholesky" | "eigh" | "eigh+clip" | "cholesky+jitter"
    min_eigen: float | None = None
    jitter: float = 0.0
    repaired: bool = False
    repair_magnitude: float = 0.0
    max_diag_shift: float = 0.0
    factor: np.ndarray = field(default=None, repr=False)

    def describe(self) -> dict:
        return {
            "method": self.method,
            "min_eigen": self.min_eigen,
            "jitter": self.jitter,
            "repaired": self.repaired,
            "repair_magnitude": self.repair_magnitude,
            "max_diag_shift": self.max_diag_shift,
        }


def factor_covariance(gram: _k.GramMatrix, repair: bool = True) -> FactorInfo:
    """Factor a Gram matrix for sampling, caching the result on the matrix.

    Cholesky first; exactly singular PSD matrices (rank deficient
    covariances are legitimate inputs) fall through to an eigenvalue
    square root. A genuinely indefinite matrix is either repaired by
    clipping its negative spectrum and renormalizing the diagonal, with
    a logged warning, or refused when repair is disabled.
    """
    if gram.factor_info is not None:
        return gram.factor_info
    G = np.ascontiguousarray(gram.entries)
    try:
        F = np.linalg.cholesky(G)
        info = FactorInfo(method="cholesky", min_eigen=gram.min_eigen_estimate, factor=F)
    except np.linalg.LinAlgError:
        info = _eigh_factor(gram, G, repair)
    gram.factor_info = info
    return info


def _eigh_factor(gram: _k.GramMatrix, G: np.ndarray, repair: bool) -> FactorInfo:
    try:
        lam, V = np.linalg.eigh(G)
    except np.linalg.LinAlgError:
        return _jitter_factor(G)
    lam_min = float(lam[0])
    lam_max = float(lam[-1])
    tol = gram.psd_tolerance
    if tol <= 0.0:
        tol = _k.DEFAULT_PSD_RTOL * max(lam_max, 0.0)
    lam_pos = np.clip(lam, 0.0, None)
    if lam_min >= -tol:
        return FactorInfo(method="eigh", min_eigen=lam_min,
                          factor=V * np.sqrt(lam_pos))
    if not repair:
        raise NumericalError(
            f"covariance is indefinite (min eigenvalue {lam_min:.6e}, "
            f"tolerance {tol:.1e}) and repair is disabled"
        )
    # clipped covariance C = V diag(lam_pos) V^H; renormalize its diagonal
    # back to 1 and factor the renormalized matrix exactly from the same
    # eigenvectors, F = D^{-1/2} V sqrt(diag(lam_pos))
    d = ((np.abs(V) ** 2) @ lam_pos).real
    live = d > 1e-300
    s = np.where(live, 1.0 / np.sqrt(np.where(live, d, 1.0)), 0.0)
    F = (V * np.sqrt(lam_pos)) * s[:, None]
    max_shift = float(np.abs(np.where(live, d - 1.0, 0.0)).max())
    log.warning(
        "indefinite covariance repaired: clipped eigenvalues below %.3e "
        "(min %.6e), diagonal renormalized (largest shift %.3e)",
        -tol, lam_min, max_shift,
    )
    return FactorInfo(
        method="eigh+clip", min_eigen=lam_min, repaired=True,
        repair_magnitude=-lam_min, max_diag_shift=max_shift, factor=F,
    )


def _jitter_factor(G: np.ndarray) -> FactorInfo:
    scale = float(np.abs(G.diagonal()).max())
    if scale <= 0.0:
        scale = 1.0
    for j in JITTER_LADDER:
        try:
            F = np.linalg.cholesky(G + (j * scale) * np.eye(G.shape[0], dtype=G.dtype))
        except np.linalg.LinAlgError:
            continue
        log.warning("eigendecomposition failed; factored with jitter %.1e", j * scale)
        return FactorInfo(method="cholesky+jitter", jitter=j * scale, factor=F)
    raise NumericalError("covariance factorization failed at every jitter level")


# ---------------------------------------------------------------------------
# Sampling


def _replicate_stream(seed: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)).jumped(r))


def sample_gaussian(gram: _k.GramMatrix, config: SimulationConfig,
                    start: int = 0, count: int | None = None) -> np.ndarray:
    """Replicates [start, start + count) of the Gaussian vector X ~ N(0, G).

    Complex samples use independent real and imaginary parts scaled so
    E|X_n|^2 matches the unit diagonal. A real field with a complex
    covariance has no consistent sampler and is refused.
    """
    if config.field == "real" and not gram.is_real:
        raise UnsupportedConfigurationError(
            "real field with a complex covariance; use field='complex'"
        )
    if count is None:
        count = config.replicates - start
    if count < 0 or start < 0 or start + count > config.replicates:
        raise ValidationError(f"replicate window [{start}, {start + count}) out of range")
    info = factor_covariance(gram, repair=config.repair)
    F = info.factor
    n = gram.size
    Z = np.empty((count, n), dtype=np.complex128 if config.field == "complex" else np.float64)
    for r in range(count):
        gen = _replicate_stream(config.seed, start + r)
        if config.field == "complex":
            zr = gen.standard_normal(n)
            zi = gen.standard_normal(n)
            Z[r] = (zr + 1j * zi) * INV_SQRT2
        else:
            Z[r] = gen.standard_normal(n)
    return Z @ F.T


# ---------------------------------------------------------------------------
# Running-maximum statistics


@dataclass(frozen=True)
class MaximalStatistics:
    """Moments of the running maximum sup_{j <= N} |S_j| over replicates."""

    estimate_sup_sq: float
    stderr_sup_sq: float
    estimate_sup_abs: float
    stderr_sup_abs: float
    endpoint_sq: float
    endpoint_sq_stderr: float
    replicates: int
    n_columns: int
    field: str

    def describe(self) -> dict:
        return {
            "sup_sq_mean": self.estimate_sup_sq,
            "sup_sq_stderr": self.stderr_sup_sq,
            "sup_abs_mean": self.estimate_sup_abs,
            "sup_abs_stderr": self.stderr_sup_abs,
            "endpoint_sq_mean": self.endpoint_sq,
            "endpoint_sq_stderr": self.endpoint_sq_stderr,
            "replicates": self.replicates,
            "n": self.n_columns,
            "field": self.field,
        }


@dataclass(frozen=True)
class BlockEstimates:
    """Per-dyadic-block running maxima, blocks k = 0..r over [2^k, 2^{k+1}).

    The blocks partition [1, N]: the last one is truncated at the sample
    width, so every index lands in exactly one block and the block-sum
    chain covers the whole range.
    """

    per_block_mean: tuple[float, ...]  # E(S_block_k)^2
    per_block_stderr: tuple[float, ...]
    sum_mean: float  # mean of sum_k (S_block_k)^2
    sum_stderr: float
    r: int
    replicates: int


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    m = float(x.mean())
    if x.size < 2:
        return m, 0.0
    return m, float(x.std(ddof=1) / math.sqrt(x.size))


def _sup_and_endpoint(samples: np.ndarray, a_vals: np.ndarray):
    S = np.cumsum(samples * a_vals[None, :], axis=1)
    A = np.abs(S)
    return A.max(axis=1), A[:, -1]


def maximal_statistics(samples: np.ndarray, a_vals, field: str = "real") -> MaximalStatistics:
    samples = np.asarray(samples)
    a_vals = np.asarray(a_vals).ravel()
    if samples.ndim != 2 or samples.shape[1] != a_vals.shape[0]:
        raise ValidationError(
            f"samples with {samples.shape} columns do not match {a_vals.shape[0]} coefficients"
        )
    if samples.shape[0] == 0:
        raise InsufficientDataError("no replicates to summarize")
    sup, end = _sup_and_endpoint(samples, a_vals)
    return _stats_from_sups(sup, end, samples.shape[1], field)


def _stats_from_sups(sup: np.ndarray, end: np.ndarray, n_columns: int,
                     field: str) -> MaximalStatistics:
    m_sq, se_sq = _mean_stderr(sup**2)
    m_ab, se_ab = _mean_stderr(sup)
    m_end, se_end = _mean_stderr(end**2)
    return MaximalStatistics(
        estimate_sup_sq=m_sq, stderr_sup_sq=se_sq,
        estimate_sup_abs=m_ab, stderr_sup_abs=se_ab,
        endpoint_sq=m_end, endpoint_sq_stderr=se_end,
        replicates=int(sup.size), n_columns=int(n_columns), field=field,
    )


def _block_sups(samples: np.ndarray, a_vals: np.ndarray, r: int) -> np.ndarray:
    """(replicates, r + 1) matrix of block maxima max_j |S_j - S_{2^k - 1}|.

    Block k runs over 1-based indices [2^k, min(2^{k+1} - 1, n)]; the
    last block is truncated at the sample width so the blocks partition
    [1, n].
    """
    n = a_vals.shape[0]
    if r < 0:
        raise ValidationError(f"block depth r must be >= 0, got {r}")
    if n < 2**r:
        raise ValidationError(
            f"{n} columns do not reach block {r} at index 2^{r} = {2**r}; "
            "zero-pad the coefficients explicitly instead of padding silently"
        )
    S = np.cumsum(samples * a_vals[None, :], axis=1)
    out = np.empty((samples.shape[0], r + 1))
    for k in range(r + 1):
        lo = 2**k
        hi = min(2 * lo - 1, n)
        seg = S[:, lo - 1:hi]
        base = S[:, lo - 2][:, None] if lo >= 2 else 0.0
        out[:, k] = np.abs(seg - base).max(axis=1)
    return out


def block_maxima(samples: np.ndarray, a_vals, r: int) -> BlockEstimates:
    samples = np.asarray(samples)
    a_vals = np.asarray(a_vals).ravel()
    if samples.ndim != 2 or samples.shape[1] != a_vals.shape[0]:
        raise ValidationError("samples do not match coefficient count")
    return _blocks_from_sups(_block_sups(samples, a_vals, r), r)


def _blocks_from_sups(bs: np.ndarray, r: int) -> BlockEstimates:
    sq = bs**2
    means, errs = zip(*(_mean_stderr(sq[:, k]) for k in range(r + 1)))
    s_mean, s_err = _mean_stderr(sq.sum(axis=1))
    return BlockEstimates(
        per_block_mean=tuple(means), per_block_stderr=tuple(errs),
        sum_mean=s_mean, sum_stderr=s_err, r=int(r), replicates=int(bs.shape[0]),
    )


def max_block_depth(n: int) -> int:
    """Largest r with 2^r <= n, so blocks 0..r partition [1, n]."""
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    return int(n).bit_length() - 1


# ---------------------------------------------------------------------------
# Bound reports


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    theoretical: float
    empirical: float
    stderr: float
    margin_sigmas: float | None  # (theoretical - empirical) / stderr, None if stderr = 0
    verdict: str  # "pass" | "fail" | "insufficient"

    def describe(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "theoretical": self.theoretical,
            "empirical": self.empirical,
            "stderr": self.stderr,
            "margin_sigmas": self.margin_sigmas,
            "verdict": self.verdict,
        }


def canonical_bounds(names) -> tuple[str, ...]:
    out = []
    for name in names:
        key = str(name).strip().lower()
        if key not in BOUND_ALIASES:
            raise ValidationError(
                f"unknown bound {name!r}; choose from lemma, theorem, blocks, sudakov"
            )
        canon = BOUND_ALIASES[key]
        if canon not in out:
            out.append(canon)
    if not out:
        raise ValidationError("no bounds requested")
    return tuple(out)


def _verdict(empirical: float, stderr: float, theoretical: float,
             replicates: int, sigma_margin: float) -> tuple[str, float | None]:
    if stderr > 0.0:
        margin = (theoretical - empirical) / stderr
    else:
        margin = None
    if replicates < MIN_REPLICATES_FOR_VERDICT:
        return "insufficient", margin
    ok = empirical + sigma_margin * stderr <= theoretical
    return ("pass" if ok else "fail"), margin


def bound_report(which: str, stats: MaximalStatistics, L: float, G: float,
                 n: int, sigma_margin: float = 3.0,
                 blocks: BlockEstimates | None = None) -> BoundReport:
    """One bound comparison. L and G are the criterion double sums at n."""
    name = canonical_bounds([which])[0]
    if stats.n_columns != n:
        raise ContractViolationError(
            f"statistics were collected over {stats.n_columns} columns but the "
            f"bound is to be evaluated at n = {n}"
        )
    if name == "lemma":
        theo = (2.0 + math.log2(n)) ** 2 * G
        emp, err = stats.estimate_sup_sq, stats.stderr_sup_sq
    elif name == "theorem_8L":
        theo = 8.0 * L
        emp, err = stats.estimate_sup_sq, stats.stderr_sup_sq
    elif name == "blocks_4L":
        if blocks is None:
            raise ValidationError("blocks_4L needs block estimates")
        theo = 4.0 * L
        emp, err = blocks.sum_mean, blocks.sum_stderr
    else:  # sudakov
        if stats.field != "real":
            raise UnsupportedConfigurationError(
                "the Gaussian comparison bound is stated for real processes"
            )
        theo = 2.0 * math.sqrt(G)
        emp, err = stats.estimate_sup_abs, stats.stderr_sup_abs
    reps = stats.replicates if name != "blocks_4L" else blocks.replicates
    verdict, margin = _verdict(emp, err, theo, reps, sigma_margin)
    return BoundReport(
        bound_name=name, theoretical=float(theo), empirical=float(emp),
        stderr=float(err), margin_sigmas=margin, verdict=verdict,
    )


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    kernel_desc: dict
    sequence_desc: dict
    criterion_values: dict
    stats: MaximalStatistics
    blocks: BlockEstimates | None
    bound_reports: tuple[BoundReport, ...]
    gram_min_eigen: float | None
    psd_tolerance: float
    factor: dict
    sup_values: np.ndarray | None = field(default=None, repr=False)


def run_simulation(a, kernel, config: SimulationConfig,
                   bounds=DEFAULT_BOUNDS, keep_maxima: bool = False) -> SimulationResult:
    """Sample the process, accumulate running maxima, compare every bound.

    Coefficients are truncated or zero-padded to config.n slots in folded
    order; the covariance, the criterion sums, and the sampled series all
    see the same indices. Sampling streams through replicate chunks so
    memory stays at chunk * n. keep_maxima retains the per-replicate
    sup |S_j| vector on the result for auditing instead of discarding it
    after the summary statistics are formed.
    """
    bounds = canonical_bounds(bounds)
    seq = _c.align_sequence(a, config.n)
    kernel = _k.make_kernel(kernel)
    if kernel.variant == "explicit" and seq.sidedness == "two":
        raise UnsupportedConfigurationError(
            "explicit kernels are one-sided tables; fold the kernel, not just the sequence"
        )
    n = config.n
    gram = _k.gram_matrix(kernel, n, indices=seq.orig_index)
    _k.validate_psd(gram)

    a_vals = _k.apply_coefficient_scales(kernel, seq.values, seq.orig_index)
    L = _c.theorem1_sum(seq, kernel, n)
    G = _c.gaussian_condition_sum(seq, kernel, n)
    mr = _c.mr_sum(_c.CoefficientSequence(values=a_vals, sidedness=seq.sidedness,
                                          orig_index=seq.orig_index), n)

    want_blocks = "blocks_4L" in bounds
    r = max_block_depth(n) if want_blocks else 0

    sup_parts, end_parts, block_parts = [], [], []
    for start in range(0, config.replicates, config.chunk):
        count = min(config.chunk, config.replicates - start)
        X = sample_gaussian(gram, config, start=start, count=count)
        sup, end = _sup_and_endpoint(X, a_vals)
        sup_parts.append(sup)
        end_parts.append(end)
        if want_blocks:
            block_parts.append(_block_sups(X, a_vals, r))
    sup_all = np.concatenate(sup_parts)
    stats = _stats_from_sups(sup_all, np.concatenate(end_parts), n, config.field)
    blocks = _blocks_from_sups(np.concatenate(block_parts), r) if want_blocks else None

    reports = tuple(
        bound_report(which, stats, L.partial_value, G.partial_value, n,
                     sigma_margin=config.sigma_margin, blocks=blocks)
        for which in bounds
    )
    info = gram.factor_info
    return SimulationResult(
        config=config,
        kernel_desc=kernel.describe(),
        sequence_desc={"sidedness": seq.sidedness, "length": len(seq)},
        criterion_values={"mr": mr, "theorem1_L": L, "gaussian": G},
        stats=stats,
        blocks=blocks,
        bound_reports=reports,
        gram_min_eigen=gram.min_eigen_estimate,
        psd_tolerance=gram.psd_tolerance,
        factor=info.describe() if info is not None else {},
        sup_values=sup_all if keep_maxima else None,
    )


def sudakov_check(a, kernel, n: int, replicates: int, seed: int,
                  sigma_margin: float = 3.0) -> BoundReport:
    """Convenience wrapper: run the sampler and report only the sup-abs bound."""
    config = SimulationConfig(n=n, replicates=replicates, seed=seed,
                              field="real", sigma_margin=sigma_margin)
    result = run_simulation(a, kernel, config, bounds=("sudakov",))
    return result.bound_reports[0]


def empirical_covariance(samples: np.ndarray) -> np.ndarray:
    """Entrywise estimate of E[X_n conj(X_m)] from a (replicates, n) block."""
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[0] < 1:
        raise ValidationError("need a (replicates, n) sample block")
    return samples.T @ samples.conj() / samples.shape[0]
