"""Schmidt spectra and the entropy / spread functionals defined on them.

A spectrum is kept as classes of equal eigenvalues.  Values are stored as
base-2 logarithms and multiplicities as exact integers, so spectra of large
tensor powers (e.g. 4096 copies of a qubit pair, with binomial multiplicities
far beyond double range and values far below it) are represented without
overflow or underflow.  All logarithms are base 2.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, NormalizationError, ShapeError, SizeError

NORM_TOL = 1e-10
ZERO_CUTOFF = 1e-12
# Relative gap (in log2 value) below which two classes are merged.
MERGE_RTOL = 1e-12
# Slack on the retained-weight constraint of the smoothed spread; shared by
# the greedy optimizer and the brute-force oracle so both see the same boundary.
WEIGHT_TOL = 1e-12
MAX_POWER_CLASSES = 1_000_000
MAX_PRODUCT_CLASSES = 1 << 22
MAX_BRUTEFORCE_DIM = 20

_INT64_SAFE = 2**62


def _as_mult_array(mults: Iterable[int]) -> np.ndarray:
    ints = [int(m) for m in mults]
    if ints and max(ints) >= _INT64_SAFE:
        arr = np.empty(len(ints), dtype=object)
        arr[:] = ints
        return arr
    return np.asarray(ints, dtype=np.int64)


def _log2_mults(mults: np.ndarray) -> np.ndarray:
    if mults.dtype == object:
        return np.array([math.log2(int(m)) for m in mults], dtype=float)
    return np.log2(mults.astype(float))


def _log2_sum_exp2(terms: np.ndarray) -> float:
    top = float(np.max(terms))
    return top + math.log2(math.fsum(np.exp2(terms - top)))


def _log2_int(n: int) -> float:
    return math.log2(n) if n > 0 else -math.inf


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Eigenvalue classes of a reduced density matrix, sorted descending.

    Build instances with :meth:`from_classes` or :meth:`from_log_classes`;
    both sort, merge equal values and check normalization.
    """

    log_values: np.ndarray
    mults: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float)
        if lv.ndim != 1 or len(lv) == 0:
            raise ShapeError("a spectrum needs at least one class")
        if len(self.mults) != len(lv):
            raise ShapeError("log_values and mults differ in length")
        if not np.all(np.isfinite(lv)):
            raise DomainError("spectrum values must be strictly positive")
        if np.any(lv > 1e-12):
            raise DomainError("spectrum values must not exceed 1")
        if np.any(np.diff(lv) >= 0):
            raise DomainError("class values must be strictly decreasing")
        mults = self.mults if isinstance(self.mults, np.ndarray) else _as_mult_array(self.mults)
        if any(int(m) < 1 for m in mults):
            raise DomainError("multiplicities must be positive integers")
        lv.flags.writeable = False
        mults.flags.writeable = False
        object.__setattr__(self, "log_values", lv)
        object.__setattr__(self, "mults", mults)
        total = self.total_weight()
        if abs(total - 1.0) > NORM_TOL:
            raise NormalizationError(f"spectrum weights sum to {total!r}, not 1")

    @classmethod
    def from_classes(cls, classes: Iterable[tuple[float, int]], *, normalize=False, merge_rtol=MERGE_RTOL):
        """Spectrum from ``(value, multiplicity)`` pairs; zero values are dropped."""
        pairs = [(float(v), int(m)) for v, m in classes]
        if any(v < 0 or m < 0 for v, m in pairs):
            raise DomainError("values and multiplicities must be non-negative")
        pairs = [(v, m) for v, m in pairs if v > 0 and m > 0]
        if not pairs:
            raise NormalizationError("spectrum has no positive weight")
        logs = [math.log2(v) for v, _ in pairs]
        return cls.from_log_classes(logs, [m for _, m in pairs], normalize=normalize, merge_rtol=merge_rtol)

    @classmethod
    def from_values(cls, values: Sequence[float], **kwargs):
        """Spectrum from a flat list of eigenvalues (each with multiplicity one)."""
        return cls.from_classes(((v, 1) for v in values), **kwargs)

    @classmethod
    def from_log_classes(cls, log_values, mults, *, normalize=False, merge_rtol=MERGE_RTOL):
        lv = np.asarray(log_values, dtype=float)
        mu = _as_mult_array(mults)
        if len(lv) != len(mu):
            raise ShapeError("log_values and mults differ in length")
        order = np.argsort(-lv, kind="stable")
        lv, mu = lv[order], mu[order]
        lv, mu = _merge_sorted(lv, mu, merge_rtol)
        if normalize:
            total_log = _log2_sum_exp2(_log2_mults(mu) + lv)
            lv = lv - total_log
        return cls(lv, mu)

    # -- accessors ---------------------------------------------------------

    @property
    def num_classes(self) -> int:
        return len(self.log_values)

    @property
    def values(self) -> np.ndarray:
        return np.exp2(self.log_values)

    @property
    def rank(self) -> int:
        return int(sum(int(m) for m in self.mults))

    @property
    def max_value(self) -> float:
        return float(2.0 ** self.log_values[0])

    def class_weights(self) -> np.ndarray:
        """Total probability carried by each class (value times multiplicity)."""
        return np.exp2(_log2_mults(self.mults) + self.log_values)

    def total_weight(self) -> float:
        return math.fsum(self.class_weights())

    def classes(self) -> Iterator[tuple[float, int]]:
        for lv, m in zip(self.log_values, self.mults):
            yield float(2.0**lv), int(m)

    def expand(self, max_rank=1 << 24) -> np.ndarray:
        """All eigenvalues with multiplicity, descending."""
        if self.rank > max_rank:
            raise SizeError(f"rank {self.rank} too large to expand")
        return np.repeat(self.values, self.mults.astype(np.int64))

    def is_flat(self) -> bool:
        return self.num_classes == 1

    def allclose(self, other: "SchmidtSpectrum", atol=1e-10) -> bool:
        if self.num_classes != other.num_classes:
            return False
        if any(int(a) != int(b) for a, b in zip(self.mults, other.mults)):
            return False
        return bool(np.allclose(self.values, other.values, rtol=0, atol=atol))

    def __repr__(self):
        shown = ", ".join(f"{v:.6g}x{m}" for v, m in itertools.islice(self.classes(), 6))
        more = "" if self.num_classes <= 6 else f", ... ({self.num_classes} classes)"
        return f"SchmidtSpectrum({shown}{more})"

    # -- JSON --------------------------------------------------------------

    def to_dict(self) -> dict:
        rows = []
        for lv, m in zip(self.log_values, self.mults):
            v = float(2.0**lv)
            row = {"value": v, "mult": int(m)}
            if v < np.finfo(float).tiny:
                row["log2_value"] = float(lv)
            rows.append(row)
        return {"classes": rows}

    @classmethod
    def from_dict(cls, data: dict, *, normalize=False) -> "SchmidtSpectrum":
        try:
            rows = data["classes"]
        except (KeyError, TypeError):
            raise ShapeError('spectrum JSON needs a "classes" list') from None
        logs, mults = [], []
        for row in rows:
            if "log2_value" in row:
                logs.append(float(row["log2_value"]))
            else:
                v = float(row["value"])
                if v <= 0:
                    raise DomainError("spectrum values must be strictly positive")
                logs.append(math.log2(v))
            mults.append(int(row.get("mult", 1)))
        return cls.from_log_classes(logs, mults, normalize=normalize)


def _merge_sorted(lv: np.ndarray, mu: np.ndarray, rtol: float):
    if len(lv) <= 1:
        return lv, mu
    gaps = lv[:-1] - lv[1:]
    scale = np.maximum(1.0, np.abs(lv[:-1]))
    starts = np.concatenate([[0], np.nonzero(gaps > rtol * scale)[0] + 1])
    if len(starts) == len(lv):
        return lv, mu
    merged_lv = np.empty(len(starts))
    merged_mu = []
    bounds = list(starts) + [len(lv)]
    for g, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
        group_m = [int(m) for m in mu[a:b]]
        total = sum(group_m)
        frac = np.array([m / total for m in group_m]) if total < _INT64_SAFE else np.exp2(
            _log2_mults(mu[a:b]) - math.log2(total)
        )
        merged_lv[g] = float(np.dot(frac, lv[a:b]))
        merged_mu.append(total)
    return merged_lv, _as_mult_array(merged_mu)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Pure state on A (x) B; ``amplitudes[i, j]`` multiplies |i>_A |j>_B."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 2:
            raise ShapeError("amplitudes must be a dA x dB matrix")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"squared norm is {norm2!r}, not 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dims(self) -> tuple[int, int]:
        return self.amplitudes.shape

    def reduced_a(self) -> np.ndarray:
        m = self.amplitudes
        return m @ m.conj().T

    def reduced_b(self) -> np.ndarray:
        m = self.amplitudes
        return (m.T @ m.conj()).conj()

    def to_dict(self) -> dict:
        dA, dB = self.dims
        return {
            "dA": dA,
            "dB": dB,
            "amps_re": self.amplitudes.real.tolist(),
            "amps_im": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BipartiteState":
        re = np.asarray(data["amps_re"], dtype=float)
        im = np.asarray(data.get("amps_im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ShapeError("amps_re and amps_im differ in shape")
        dA, dB = int(data.get("dA", re.shape[0])), int(data.get("dB", re.shape[1]))
        if re.shape != (dA, dB):
            raise ShapeError(f"amplitude matrix is {re.shape}, expected {(dA, dB)}")
        return cls(re + 1j * im)


def schmidt_spectrum_of(state, cutoff: float = ZERO_CUTOFF, merge_rtol: float = 1e-10) -> SchmidtSpectrum:
    """Schmidt spectrum from the singular values of the amplitude matrix.

    Squared singular values below ``cutoff`` are treated as exact zeros.
    """
    if not isinstance(state, BipartiteState):
        state = BipartiteState(state)
    sv = np.linalg.svd(state.amplitudes, compute_uv=False)
    lam = sv**2
    lam = lam[lam > cutoff]
    return SchmidtSpectrum.from_values(lam, normalize=True, merge_rtol=merge_rtol)


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0:
        raise DomainError(f"Renyi order must be >= 0, got {alpha}")
    return alpha


def renyi_entropy(spec: SchmidtSpectrum, alpha) -> float:
    """Renyi entropy of order ``alpha`` in bits; orders 0, 1 and inf by continuity."""
    alpha = _check_alpha(alpha)
    if spec.is_flat() or alpha == 0:
        return _log2_int(spec.rank)
    if math.isinf(alpha):
        return float(-spec.log_values[0])
    if alpha == 1:
        return float(-np.dot(spec.class_weights(), spec.log_values))
    terms = _log2_mults(spec.mults) + alpha * spec.log_values
    return _log2_sum_exp2(terms) / (1.0 - alpha)


def entanglement_moments(spec: SchmidtSpectrum) -> tuple[float, float]:
    """Mean and standard deviation of -log2(lambda) under the spectrum."""
    if spec.is_flat():
        return _log2_int(spec.rank), 0.0
    w = spec.class_weights()
    lv = spec.log_values
    mean = float(-np.dot(w, lv))
    second = float(np.dot(w, lv * lv))
    return mean, math.sqrt(max(0.0, second - mean * mean))


def spread(spec: SchmidtSpectrum) -> float:
    """log2(rank) + log2(largest eigenvalue); zero exactly on flat spectra."""
    if spec.is_flat():
        return 0.0
    return max(0.0, _log2_int(spec.rank) + float(spec.log_values[0]))


def generalized_spread(spec: SchmidtSpectrum, alpha, beta) -> float:
    """Difference of Renyi entropies H_alpha - H_beta for alpha < beta."""
    alpha, beta = _check_alpha(alpha), _check_alpha(beta)
    if alpha >= beta:
        raise DomainError(f"need alpha < beta, got alpha={alpha}, beta={beta}")
    if alpha == 0 and math.isinf(beta):
        return spread(spec)
    return renyi_entropy(spec, alpha) - renyi_entropy(spec, beta)


def _check_eps(eps) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must lie in [0, 1), got {eps}")
    return eps


def smoothed_spread(spec: SchmidtSpectrum, eps) -> float:
    """Minimum of log2(#kept) + log2(max kept) over eigenvalue subsets keeping weight >= 1 - eps.

    For each choice of the largest kept class the cheapest subset keeps the
    next-largest eigenvalues until the weight constraint is met, so sweeping
    that class gives the exact optimum over eigenbasis projectors.
    """
    eps = _check_eps(eps)
    if eps == 0.0:
        return spread(spec)
    lv = spec.log_values
    log_m = _log2_mults(spec.mults)
    weights = np.exp2(log_m + lv)
    cum_w = np.concatenate([[0.0], np.cumsum(weights)])
    cum_m = [0, *itertools.accumulate(int(m) for m in spec.mults)]
    need = 1.0 - eps - WEIGHT_TOL
    n_cls = spec.num_classes
    best = math.inf
    for i in range(n_cls):
        target = cum_w[i] + need
        if cum_w[n_cls] < target:
            break
        # first class j whose inclusion reaches the target
        j = min(bisect.bisect_left(cum_w, target, lo=i + 1), n_cls) - 1
        rem = max(target - cum_w[j], 0.0)
        full = cum_m[j] - cum_m[i]
        log_count = _log2_count(full, rem, lv[j], int(spec.mults[j]))
        best = min(best, log_count + float(lv[i]))
    if not math.isfinite(best):
        raise RuntimeError("no feasible eigenvalue subset; weights do not sum to 1")
    return best


def _log2_count(full: int, rem: float, log_value: float, mult: int) -> float:
    """log2(full + k) with k = ceil(rem / value) clipped to [1, mult]."""
    x = math.log2(rem) - log_value if rem > 0 else -math.inf
    if x < 60:
        k = min(max(math.ceil(2.0**x), 1), mult)
        return math.log2(full + k)
    # k is astronomically large here; ceil no longer matters at double precision
    return _log2_add(_log2_int(full), min(x, math.log2(mult)))


def _log2_add(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = max(a, b), min(a, b)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


def smoothed_spread_bruteforce(spec: SchmidtSpectrum, eps, max_dim: int = MAX_BRUTEFORCE_DIM) -> float:
    """Exhaustive minimum over all nonempty eigenvalue subsets (independent oracle)."""
    eps = _check_eps(eps)
    if spec.rank > max_dim:
        raise SizeError(f"brute force limited to {max_dim} eigenvalues, got {spec.rank}")
    vals = np.sort(spec.expand())[::-1]
    d = len(vals)
    need = 1.0 - eps - WEIGHT_TOL
    shifts = np.arange(d, dtype=np.int64)
    best = math.inf
    chunk = 1 << 16
    for start in range(1, 1 << d, chunk):
        masks = np.arange(start, min(start + chunk, 1 << d), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        kept = bits @ vals
        ok = kept >= need
        if not ok.any():
            continue
        counts = bits[ok].sum(axis=1)
        largest = vals[np.argmax(bits[ok], axis=1)]
        best = min(best, float(np.min(np.log2(counts) + np.log2(largest))))
    return best


def tensor_product(a: SchmidtSpectrum, b: SchmidtSpectrum, max_classes: int = MAX_PRODUCT_CLASSES) -> SchmidtSpectrum:
    """Spectrum of psi_1 (x) psi_2: all pairwise products, merged."""
    if a.num_classes * b.num_classes > max_classes:
        raise SizeError(f"product would have {a.num_classes * b.num_classes} classes")
    lv = np.add.outer(a.log_values, b.log_values).ravel()
    if a.mults.dtype == object or b.mults.dtype == object or (
        int(max(a.mults)) * int(max(b.mults)) >= _INT64_SAFE
    ):
        mu = [int(x) * int(y) for x in a.mults for y in b.mults]
    else:
        mu = np.multiply.outer(a.mults, b.mults).ravel()
    return SchmidtSpectrum.from_log_classes(lv, mu)


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for k in range(n, -1, -1):
        for rest in _compositions(n - k, parts - 1):
            yield (k, *rest)


def _binomial_row(m: int) -> list[int]:
    row = [1]
    for k in range(m):
        row.append(row[-1] * (m - k) // (k + 1))
    return row


def tensor_power(base: SchmidtSpectrum, n: int, max_classes: int = MAX_POWER_CLASSES) -> SchmidtSpectrum:
    """Spectrum of psi^{(x) n}, aggregated by type class.

    A type (k_1..k_C) of the C base classes has value prod lambda_c^k_c and
    multiplicity multinomial(n; k) * prod m_c^k_c, computed in exact integers.
    """
    n = int(n)
    if n < 1:
        raise DomainError("tensor power needs n >= 1")
    n_cls = base.num_classes
    n_types = math.comb(n + n_cls - 1, n_cls - 1)
    if n_types > max_classes:
        raise SizeError(f"{n_types} type classes exceed the cap of {max_classes}")
    base_lv = [float(x) for x in base.log_values]
    base_m = [int(m) for m in base.mults]
    if n_cls == 1:
        return SchmidtSpectrum.from_log_classes([n * base_lv[0]], [base_m[0] ** n])
    rows: dict[int, list[int]] = {}
    logs, mults = [], []
    for ks in _compositions(n, n_cls):
        logs.append(math.fsum(k * x for k, x in zip(ks, base_lv)))
        mult, left = 1, n
        for k, m in zip(ks[:-1], base_m[:-1]):
            if left not in rows:
                rows[left] = _binomial_row(left)
            mult *= rows[left][k] * (m**k if m != 1 else 1)
            left -= k
        if base_m[-1] != 1:
            mult *= base_m[-1] ** left
        mults.append(mult)
    return SchmidtSpectrum.from_log_classes(logs, mults)
