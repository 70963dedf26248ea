"""Communication lower bounds from entanglement spread and spread-capacity intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.stats import norm

from .errors import DomainError, UnknownResourceError
from .spectra import (
    SchmidtSpectrum,
    entanglement_moments,
    smoothed_spread,
    spread,
    tensor_power,
)
from .states import ebits, partial, spectrum_of_named


@dataclass(frozen=True)
class SpreadInterval:
    min: float
    max: float
    note: str = ""

    def __post_init__(self):
        if self.min > self.max:
            raise DomainError(f"interval min {self.min} exceeds max {self.max}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.min + self.max)

    def as_list(self) -> list[float]:
        return [self.min, self.max]


@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    delta: float
    eps: float
    inputs: dict = field(default_factory=dict)


def smoothing_delta(eps: float) -> float:
    """delta = (4 eps)^(1/8), the smoothing radius paired with fidelity 1 - eps."""
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    return (4.0 * eps) ** 0.125


def thm1_lower_bound(source: SchmidtSpectrum, target: SchmidtSpectrum, eps: float) -> BoundReport:
    """Minimum cbits (either direction) to turn ``source`` into ``target`` at fidelity 1 - eps.

    Returns smoothed_spread(target, delta) - spread(source) + 2 log2(1 - delta).
    The bound may be negative, in which case it certifies nothing.
    """
    delta = smoothing_delta(eps)
    if delta >= 1:
        raise DomainError(f"eps={eps} gives delta={delta:.4g} >= 1; need eps < 1/4")
    value = smoothed_spread(target, delta) - spread(source) + 2.0 * math.log2(1.0 - delta)
    return BoundReport(
        bound_value=float(value),
        delta=delta,
        eps=eps,
        inputs={"source_classes": source.num_classes, "target_classes": target.num_classes},
    )


def dilution_cost_curve(p: float, eps: float, ns) -> list[tuple[int, float]]:
    """Lower bound on the communication for preparing partial(p)^{(x) n} from ebits."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    base = spectrum_of_named(partial(p))
    entropy, _ = entanglement_moments(base)
    rows = []
    for n in ns:
        n = int(n)
        source = spectrum_of_named(ebits(max(1, math.ceil(n * entropy))))
        report = thm1_lower_bound(source, tensor_power(base, n), eps)
        rows.append((n, float(report.bound_value)))
    return rows


FIXED_INTERVALS = {
    "qubit": (-1.0, 1.0),
    "cbit": (-1.0, 0.0),
    "cobit": (0.0, 1.0),
    "co-cobit": (-1.0, 0.0),
    "ebit": (1.0, 1.0),
}


def gaussian_width(eps: float) -> float:
    """Standard normal quantile at 1 - eps (heuristic constant for the O(sigma sqrt n) term)."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return float(norm.ppf(1.0 - eps))


def spread_capacity_interval(resource: str, **params) -> SpreadInterval:
    """Range of ebits a resource can cleanly create (max) or destroy (min).

    Parametrized resources: ``partial`` (p, n, eps), ``embezzler`` (n, eps),
    ``unitary`` (E, E_dagger).
    """
    name = resource.lower()
    if name in FIXED_INTERVALS:
        lo, hi = FIXED_INTERVALS[name]
        return SpreadInterval(lo, hi)
    if name == "partial":
        p, n, eps = float(params["p"]), int(params["n"]), float(params.get("eps", 0.01))
        mean, sigma = entanglement_moments(spectrum_of_named(partial(p)))
        half = gaussian_width(eps) * sigma * math.sqrt(n)
        return SpreadInterval(n * mean - half, n * mean + half, "heuristic: Gaussian quantile width")
    if name == "embezzler":
        n, eps = int(params["n"]), float(params["eps"])
        if n < 1 or eps < 0:
            raise DomainError("embezzler needs n >= 1 and eps >= 0")
        return SpreadInterval(-n * eps, n * eps)
    if name == "unitary":
        e_u, e_udag = float(params["E"]), float(params["E_dagger"])
        if e_u < 0 or e_udag < 0:
            raise DomainError("entangling capacities are non-negative")
        return SpreadInterval(-e_udag, e_u)
    raise UnknownResourceError(
        f"unknown resource {resource!r}; expected one of "
        f"{sorted(FIXED_INTERVALS) + ['partial', 'embezzler', 'unitary']}"
    )


def capacity_table(p=0.1, n=100, eps=0.01, embezzler_n=16, E=1.0, E_dagger=1.0) -> list[dict]:
    rows = [{"resource": k, "min": lo, "max": hi} for k, (lo, hi) in FIXED_INTERVALS.items()]
    for name, kwargs, formula in (
        ("partial", {"p": p, "n": n, "eps": eps}, "[nE - z sigma sqrt(n), nE + z sigma sqrt(n)]"),
        ("embezzler", {"n": embezzler_n, "eps": eps}, "[-n eps, n eps]"),
        ("unitary", {"E": E, "E_dagger": E_dagger}, "[-E(U^dagger), E(U)]"),
    ):
        iv = spread_capacity_interval(name, **kwargs)
        rows.append({"resource": name, "params": kwargs, "min": iv.min, "max": iv.max, "formula": formula})
    return rows


def thm2_bound(E_U: float, E_Udag: float) -> float:
    """Lower bound on Q1 + Q2 qubits needed to simulate U: (E(U) + E(U^dagger)) / 2."""
    if E_U < 0 or E_Udag < 0:
        raise DomainError("entangling capacities are non-negative")
    return 0.5 * (E_U + E_Udag)
