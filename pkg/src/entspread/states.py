"""Named bipartite states and local-unitary conversion fidelities.

Fidelity here is the amplitude overlap F = |<psi|phi>|, and error means 1 - F.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, SizeError, UnknownResourceError
from .spectra import SchmidtSpectrum, tensor_product

KINDS = ("partial", "ebits", "embezzler", "product")
MAX_EMBEZZLER_QUBITS = 24


@dataclass(frozen=True)
class NamedState:
    kind: str
    param: float | int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownResourceError(f"unknown state kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "partial":
            if self.param is None or not 0.0 < float(self.param) < 1.0:
                raise DomainError(f"partial(p) needs 0 < p < 1, got {self.param}")
        elif self.kind == "ebits":
            if self.param is None or int(self.param) != self.param or int(self.param) < 0:
                raise DomainError(f"ebits(m) needs an integer m >= 0, got {self.param}")
            object.__setattr__(self, "param", int(self.param))
        elif self.kind == "embezzler":
            if self.param is None or int(self.param) != self.param or int(self.param) < 1:
                raise DomainError(f"embezzler(n) needs an integer n >= 1, got {self.param}")
            object.__setattr__(self, "param", int(self.param))

    @classmethod
    def parse(cls, text: str) -> "NamedState":
        """Parse the ``kind:param`` form, e.g. ``partial:0.25``, ``ebits:3``, ``product``."""
        kind, _, arg = text.strip().partition(":")
        kind = kind.lower()
        if kind == "product":
            return cls("product")
        if not arg:
            raise DomainError(f"state {kind!r} needs a parameter, e.g. {kind}:1")
        try:
            value = float(arg) if kind == "partial" else int(arg)
        except ValueError:
            raise DomainError(f"bad parameter {arg!r} for state {kind!r}") from None
        return cls(kind, value)

    def __str__(self):
        return self.kind if self.param is None else f"{self.kind}:{self.param}"


def partial(p: float) -> NamedState:
    return NamedState("partial", p)


def ebits(m: int) -> NamedState:
    return NamedState("ebits", m)


def embezzler(n: int) -> NamedState:
    return NamedState("embezzler", n)


PRODUCT = NamedState("product")


@lru_cache(maxsize=32)
def _embezzler_spectrum(n: int) -> SchmidtSpectrum:
    if n > MAX_EMBEZZLER_QUBITS:
        raise SizeError(f"embezzler limited to {MAX_EMBEZZLER_QUBITS} qubits per side")
    inv = 1.0 / np.arange(1, 2**n + 1, dtype=float)
    harmonic = math.fsum(inv)
    return SchmidtSpectrum.from_log_classes(np.log2(inv) - math.log2(harmonic), np.ones(2**n, dtype=np.int64))


def spectrum_of_named(state: NamedState | str) -> SchmidtSpectrum:
    if isinstance(state, str):
        state = NamedState.parse(state)
    if state.kind == "product":
        return SchmidtSpectrum.from_classes([(1.0, 1)])
    if state.kind == "partial":
        p = float(state.param)
        return SchmidtSpectrum.from_classes([(1.0 - p, 1), (p, 1)])
    if state.kind == "ebits":
        m = state.param
        return SchmidtSpectrum.from_log_classes([-float(m)], [2**m])
    return _embezzler_spectrum(state.param)


def state_vector_of_named(state: NamedState | str) -> np.ndarray:
    """Amplitude matrix sum_i sqrt(lambda_i) |i>|i> for small named states."""
    spec = spectrum_of_named(state)
    amps = np.sqrt(spec.expand(max_rank=1 << 12))
    return np.diag(amps).astype(complex)


def local_conversion_fidelity(source: SchmidtSpectrum, target: SchmidtSpectrum) -> float:
    """Largest overlap reachable by local unitaries: sum_i sqrt(p_i q_i) over sorted spectra.

    Works on class boundaries, so ranks in the millions are never expanded.
    """
    if source.rank < 2**62 and target.rank < 2**62:
        ends_a = np.cumsum(source.mults.astype(np.int64))
        ends_b = np.cumsum(target.mults.astype(np.int64))
        common = min(ends_a[-1], ends_b[-1])
        cuts = np.union1d(np.union1d(ends_a, ends_b), [0, common])
        cuts = cuts[cuts <= common]
        starts, lengths = cuts[:-1], np.diff(cuts)
        log_len = np.log2(lengths.astype(float))
    else:
        ends_a = list(itertools.accumulate(int(m) for m in source.mults))
        ends_b = list(itertools.accumulate(int(m) for m in target.mults))
        common = min(ends_a[-1], ends_b[-1])
        cuts = sorted(c for c in set(ends_a) | set(ends_b) | {0, common} if c <= common)
        starts = cuts[:-1]
        log_len = np.array([math.log2(b - a) for a, b in zip(cuts[:-1], cuts[1:])])
        ends_a, ends_b = np.array(ends_a, dtype=object), np.array(ends_b, dtype=object)
    ia = np.searchsorted(ends_a, starts, side="right")
    ib = np.searchsorted(ends_b, starts, side="right")
    log_terms = 0.5 * (source.log_values[ia] + target.log_values[ib])
    total = math.fsum(np.exp2(log_len + log_terms))
    return min(1.0, max(0.0, total))


def embezzle_fidelity(n: int, target: SchmidtSpectrum) -> float:
    """Fidelity of phi_n (x) |00> -> phi_n (x) target under local unitaries."""
    phi = spectrum_of_named(embezzler(n))
    return local_conversion_fidelity(phi, tensor_product(phi, target))
