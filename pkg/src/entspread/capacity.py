"""Entangling power of bipartite gates and rate quantities of channels.

The entangling power here is a single-shot proxy: the largest increase of
entanglement entropy one application of U achieves on a pure input, with
local ancillas on both sides.  It lower-bounds the asymptotic capacity.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, ShapeError, SizeError, UnknownResourceError, ValidityError

UNITARY_TOL = 1e-9
MAX_POWER_DIM = 1 << 8
LN2 = math.log(2.0)


def vn_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits; eigenvalues are clamped at zero first."""
    ev = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    ev = np.clip(ev.real, 0.0, None)
    ev = ev[ev > 0]
    return float(-np.sum(ev * np.log2(ev)))


# -- gates -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BipartiteUnitary:
    matrix: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex)
        dA, dB = (int(d) for d in self.dims)
        if u.shape != (dA * dB, dA * dB):
            raise ShapeError(f"matrix is {u.shape}, dims {self.dims} need {(dA * dB, dA * dB)}")
        if not np.allclose(u @ u.conj().T, np.eye(dA * dB), atol=UNITARY_TOL):
            raise ValidityError("matrix is not unitary")
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "dims", (dA, dB))

    def dagger(self) -> "BipartiteUnitary":
        return BipartiteUnitary(self.matrix.conj().T, self.dims)

    def operator_schmidt_coefficients(self) -> np.ndarray:
        dA, dB = self.dims
        realigned = self.matrix.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)
        return np.linalg.svd(realigned, compute_uv=False)

    def operator_schmidt_rank(self, tol=1e-10) -> int:
        sv = self.operator_schmidt_coefficients()
        return int(np.sum(sv > tol * sv[0]))


_S = np.array
GATE_PRESETS = {
    "identity": (np.eye(4), (2, 2)),
    "cnot": (_S([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]), (2, 2)),
    "swap": (_S([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]), (2, 2)),
    "cz": (np.diag([1, 1, 1, -1]), (2, 2)),
}


def gate_from_name(name: str) -> BipartiteUnitary:
    key = name.lower()
    if key not in GATE_PRESETS:
        raise UnknownResourceError(f"unknown gate {name!r}; expected one of {sorted(GATE_PRESETS)}")
    mat, dims = GATE_PRESETS[key]
    return BipartiteUnitary(mat, dims)


def gate_from_dict(data: dict) -> BipartiteUnitary:
    re = np.asarray(data["matrix_re"], dtype=float)
    im = np.asarray(data.get("matrix_im", np.zeros_like(re)), dtype=float)
    return BipartiteUnitary(re + 1j * im, (int(data["dA"]), int(data["dB"])))


def build_uf(truth_table) -> BipartiteUnitary:
    """U_f = sum_{x,y} (-1)^f(x,y) |x><x| (x) |y><y| for Alice input x, Bob input y."""
    table = np.asarray(truth_table)
    if table.ndim != 2:
        raise ShapeError("truth table must be a 2-d array indexed by (x, y)")
    nx, ny = table.shape
    for n in (nx, ny):
        if n < 1 or n & (n - 1):
            raise ShapeError(f"truth table sides must be powers of two, got {table.shape}")
    signs = np.where(table.astype(bool), -1.0, 1.0).ravel()
    return BipartiteUnitary(np.diag(signs), (nx, ny))


# -- entangling power ------------------------------------------------------


def _cut_entropy_and_grad(psi: np.ndarray, left: int):
    """Entropy across rows/cols of psi reshaped (left, -1), and dS/d(conj psi)."""
    m = psi.reshape(left, -1)
    w, s, vh = np.linalg.svd(m, full_matrices=False)
    p = s * s
    mask = p > 1e-300
    logp = np.zeros_like(p)
    logp[mask] = np.log2(p[mask])
    entropy = float(-np.sum(p[mask] * logp[mask]))
    grad = -(w * (s * (logp + 1.0 / LN2))) @ vh
    return entropy, grad.reshape(psi.shape)


class EntanglingPowerResult(NamedTuple):
    value: float
    input_state: np.ndarray
    restart_values: list


def _apply(u: np.ndarray, psi: np.ndarray) -> np.ndarray:
    # psi has shape (a, dA*dB, b); u acts on the middle index
    return np.einsum("ij,ajb->aib", u, psi)


def _gain(u, psi, left):
    s_out, g_out = _cut_entropy_and_grad(_apply(u, psi), left)
    s_in, g_in = _cut_entropy_and_grad(psi, left)
    grad = 2.0 * (_apply(u.conj().T, g_out) - g_in)
    return s_out - s_in, grad


def _ascend(u, psi, left, max_iter, gtol):
    f, g = _gain(u, psi, left)
    step = 1.0
    for _ in range(max_iter):
        g = g - psi * np.real(np.vdot(psi, g))
        gnorm2 = float(np.real(np.vdot(g, g)))
        if gnorm2 < gtol**2:
            break
        step = min(step * 2.0, 10.0)
        while step > 1e-12:
            cand = psi + step * g
            cand /= np.linalg.norm(cand)
            f_new, g_new = _gain(u, cand, left)
            if f_new >= f + 1e-4 * step * gnorm2:
                break
            step *= 0.5
        else:
            break
        if f_new - f < 1e-13:
            psi, f, g = cand, f_new, g_new
            break
        psi, f, g = cand, f_new, g_new
    return f, psi


def entangling_power(
    U: BipartiteUnitary,
    ancilla_dims: tuple[int, int] = (2, 2),
    restarts: int = 32,
    rng_seed=0,
    max_iter: int = 2000,
    gtol: float = 1e-9,
    return_details: bool = False,
):
    """Best single-use entanglement gain E(U|psi>) - E(|psi>) found by multi-start ascent.

    Inputs live on (ancilla_a (x) A) : (B (x) ancilla_b).  Restart k always
    uses the k-th child of ``SeedSequence(rng_seed)``, so more restarts never
    lower the result.
    """
    if not isinstance(U, BipartiteUnitary):
        raise ValidityError("entangling_power expects a BipartiteUnitary")
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    a, b = (int(x) for x in ancilla_dims)
    dA, dB = U.dims
    total = a * dA * dB * b
    if total > MAX_POWER_DIM:
        raise SizeError(f"input dimension {total} exceeds {MAX_POWER_DIM}")
    left = a * dA
    u = U.matrix
    best, best_psi, values = -math.inf, None, []
    for child in np.random.SeedSequence(rng_seed).spawn(restarts):
        rng = np.random.default_rng(child)
        psi = rng.normal(size=(a, dA * dB, b)) + 1j * rng.normal(size=(a, dA * dB, b))
        psi /= np.linalg.norm(psi)
        val, psi = _ascend(u, psi, left, max_iter, gtol)
        values.append(val)
        if val > best:
            best, best_psi = val, psi
    if return_details:
        return EntanglingPowerResult(best, best_psi.reshape(-1), values)
    return best


def entangling_power_bound(U: BipartiteUnitary) -> float:
    """log2 of the operator Schmidt rank, an upper bound on the single-use gain."""
    return math.log2(U.operator_schmidt_rank())


def _side_states(resolution: int) -> np.ndarray:
    """Grid of (ancilla, system) qubit-pair states cos t |0>|al> + sin t |1>|al_perp>."""
    thetas = np.linspace(0.0, math.pi / 4, resolution)
    polar = np.linspace(0.0, math.pi, resolution)
    azim = np.linspace(0.0, 2 * math.pi, resolution, endpoint=False)
    out = []
    for t, pa, az in itertools.product(thetas, polar, azim):
        al = np.array([math.cos(pa / 2), np.exp(1j * az) * math.sin(pa / 2)])
        perp = np.array([-np.conj(al[1]), np.conj(al[0])])
        v = np.zeros((2, 2), dtype=complex)
        v[0] = math.cos(t) * al
        v[1] = math.sin(t) * perp
        out.append(v)
    return np.array(out)


def entangling_power_grid(U: BipartiteUnitary, resolution: int = 7) -> float:
    """Exhaustive grid oracle for two-qubit gates with qubit ancillas.

    Scans inputs that are products across the cut, each side a qubit pair
    parameterized by Schmidt angle and local Bloch direction (resolution**6
    points).  Independent of the gradient code.
    """
    if U.dims != (2, 2):
        raise SizeError("grid oracle covers two-qubit gates only")
    sides = _side_states(resolution)  # (n, anc, sys)
    u = U.matrix.reshape(2, 2, 2, 2)
    best = -math.inf
    for left_state in sides:
        # inputs are products across the cut, so the gain is the output entropy
        psi = np.einsum("pa,nqb->npabq", left_state, sides)
        out = np.einsum("cdab,npabq->npcdq", u, psi).reshape(len(sides), 4, 4)
        rho = out @ np.conj(np.transpose(out, (0, 2, 1)))
        ev = np.clip(np.linalg.eigvalsh(rho), 1e-300, None)
        s_out = -np.sum(ev * np.log2(ev), axis=1)
        best = max(best, float(np.max(s_out)))
    return best


# -- channels --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: tuple

    def __post_init__(self):
        ops = [np.array(k, dtype=complex) for k in self.kraus]
        if not ops:
            raise ValidityError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ops):
            raise ShapeError("Kraus operators must share one 2-d shape")
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(shape[1]), atol=1e-9):
            raise ValidityError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", tuple(ops))

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    def isometry(self) -> np.ndarray:
        """V = sum_i K_i (x) |i>_E, as a (d_out * n_kraus) x d_in matrix with E fastest."""
        stacked = np.stack(self.kraus, axis=1)  # (d_out, n_kraus, d_in)
        return stacked.reshape(-1, self.d_in)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def to_dict(self) -> dict:
        return {
            "kraus_re": [k.real.tolist() for k in self.kraus],
            "kraus_im": [k.imag.tolist() for k in self.kraus],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuantumChannel":
        re = np.asarray(data["kraus_re"], dtype=float)
        im = np.asarray(data.get("kraus_im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape or re.ndim != 3:
            raise ShapeError("kraus_re / kraus_im must be matching lists of matrices")
        return cls(tuple(re + 1j * im))


_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
}


def dephasing(p: float) -> QuantumChannel:
    """rho -> (1 - p) rho + p diag(rho); p = 1 is complete dephasing."""
    _check_prob(p)
    return QuantumChannel((math.sqrt(1 - p / 2) * _PAULI["I"], math.sqrt(p / 2) * _PAULI["Z"]))


def depolarizing(p: float) -> QuantumChannel:
    """rho -> (1 - p) rho + p I/2."""
    _check_prob(p)
    ops = [math.sqrt(1 - 3 * p / 4) * _PAULI["I"]]
    ops += [math.sqrt(p / 4) * _PAULI[s] for s in "XYZ"]
    return QuantumChannel(tuple(ops))


def amplitude_damping(gamma: float) -> QuantumChannel:
    _check_prob(gamma)
    return QuantumChannel(
        (
            np.array([[1, 0], [0, math.sqrt(1 - gamma)]]),
            np.array([[0, math.sqrt(gamma)], [0, 0]]),
        )
    )


def identity_channel(d: int = 2) -> QuantumChannel:
    return QuantumChannel((np.eye(d),))


def _check_prob(p):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"channel parameter must lie in [0, 1], got {p}")


CHANNEL_PRESETS = {
    "dephasing": dephasing,
    "depolarizing": depolarizing,
    "amplitude-damping": amplitude_damping,
}


def channel_from_spec(text: str) -> QuantumChannel:
    """``dephasing:1.0``, ``depolarizing:0.2``, ``amplitude-damping:0.3``, ``identity``, or a JSON path."""
    if text.endswith(".json"):
        with open(text) as fh:
            return QuantumChannel.from_dict(json.load(fh))
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "identity":
        return identity_channel(int(arg) if arg else 2)
    if name not in CHANNEL_PRESETS:
        raise UnknownResourceError(f"unknown channel {name!r}; expected identity or one of {sorted(CHANNEL_PRESETS)}")
    try:
        return CHANNEL_PRESETS[name](float(arg))
    except ValueError:
        raise DomainError(f"bad channel parameter {arg!r}") from None


def check_density_matrix(rho, d=None, tol=1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or (d is not None and rho.shape[0] != d):
        raise ValidityError(f"density matrix has shape {rho.shape}, expected {(d, d)}")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise ValidityError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ValidityError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValidityError("density matrix is not positive semidefinite")
    return rho


def channel_rates(ch: QuantumChannel, rho) -> tuple[float, float]:
    """(I(A;B), S(B)) in bits when a purification of rho is sent through the channel.

    rho on A' is purified into |Phi>_{AA'}; A' goes through the isometric
    extension to B and E.  Then I(A;B) = S(A) + S(B) - S(E).
    """
    rho = check_density_matrix(rho, ch.d_in)
    lam, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    lam = np.clip(lam, 0.0, None)
    # purification: Phi[i, a'] = sqrt(lam_i) <a'|e_i>
    phi = np.sqrt(lam)[:, None] * vecs.T
    out = phi @ ch.isometry().T  # (A, B*E)
    n_env = len(ch.kraus)
    tensor = out.reshape(ch.d_in, ch.d_out, n_env)
    rho_b = np.einsum("ibe,ice->bc", tensor, tensor.conj())
    rho_e = np.einsum("ibe,ibf->ef", tensor, tensor.conj())
    s_a = float(-np.sum(lam[lam > 0] * np.log2(lam[lam > 0])))
    s_b = vn_entropy(rho_b)
    s_e = vn_entropy(rho_e)
    return s_a + s_b - s_e, s_b


# -- rate optimization -----------------------------------------------------

OBJECTIVES = ("max_I", "max_SB", "min_region_term")


def region_term(ch: QuantumChannel, rho, c1: float) -> float:
    """H(B) + max(0, C1 - I(A;B)): entanglement this source absorbs, counting spare forward cbits."""
    i_ab, s_b = channel_rates(ch, rho)
    return s_b + max(0.0, c1 - i_ab)


def _objective(ch, objective, c1):
    if objective == "max_I":
        return lambda rho: channel_rates(ch, rho)[0], 1.0
    if objective == "max_SB":
        return lambda rho: channel_rates(ch, rho)[1], 1.0
    if objective == "min_region_term":
        if c1 is None:
            raise DomainError("min_region_term needs c1")
        return lambda rho: region_term(ch, rho, c1), -1.0
    raise UnknownResourceError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


def _rho_from_params(x: np.ndarray, d: int) -> np.ndarray:
    m = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
    r = m @ m.conj().T
    return r / np.trace(r).real


def bloch_grid(resolution: int = 11) -> list[np.ndarray]:
    """Qubit density matrices on a (radius, polar, azimuth) grid of the Bloch ball."""
    pts = [np.eye(2) / 2]
    for r in np.linspace(0.0, 1.0, resolution)[1:]:
        for th in np.linspace(0.0, math.pi, resolution):
            azims = [0.0] if th in (0.0, math.pi) else np.linspace(0, 2 * math.pi, 2 * resolution - 2, endpoint=False)
            for ph in azims:
                n = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
                pts.append(0.5 * (np.eye(2) + r * (n[0] * _PAULI["X"] + n[1] * _PAULI["Y"] + n[2] * _PAULI["Z"])))
    return pts


def simplex_grid(d: int, resolution: int = 10) -> list[np.ndarray]:
    """Diagonal density matrices with entries on a 1/resolution lattice."""
    pts = []
    for ks in itertools.product(range(resolution + 1), repeat=d - 1):
        if sum(ks) <= resolution:
            probs = [k / resolution for k in ks] + [(resolution - sum(ks)) / resolution]
            pts.append(np.diag(probs).astype(complex))
    return pts


def grid_optimum(ch: QuantumChannel, objective: str, c1=None, resolution: int = 11):
    """Brute-force sweep: Bloch ball for qubit inputs, diagonal simplex for d_in = 3, 4."""
    score, sense = _objective(ch, objective, c1)
    d = ch.d_in
    if d == 2:
        pts = bloch_grid(resolution)
    elif d <= 4:
        pts = simplex_grid(d, resolution)
    else:
        raise SizeError(f"grid mode supports input dimension <= 4, got {d}")
    vals = [score(p) for p in pts]
    idx = int(np.argmax(sense * np.array(vals)))
    return vals[idx], pts[idx]


def optimize_rates(
    ch: QuantumChannel,
    objective: str,
    c1: float | None = None,
    restarts: int = 8,
    grid: bool = True,
    resolution: int = 11,
    rng_seed=0,
):
    """Optimize a rate quantity over input density matrices.

    Runs multi-start local optimization over rho = M M^dagger / tr and, when
    ``grid`` is set, the brute-force grid; the better value is returned
    together with its maximizer (minimizer for ``min_region_term``).
    """
    score, sense = _objective(ch, objective, c1)
    d = ch.d_in
    best_val, best_rho = None, None
    if grid:
        best_val, best_rho = grid_optimum(ch, objective, c1, resolution)
    rng = np.random.default_rng(rng_seed)
    for _ in range(restarts):
        x0 = rng.normal(size=2 * d * d)
        res = minimize(lambda x: -sense * score(_rho_from_params(x, d)), x0, method="L-BFGS-B")
        val = score(_rho_from_params(res.x, d))
        if best_val is None or sense * val > sense * best_val:
            best_val, best_rho = val, _rho_from_params(res.x, d)
    return float(best_val), best_rho


@dataclass(frozen=True)
class RateTriple:
    C1: float
    C2: float
    E: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.C1, self.C2, self.E)):
            raise DomainError("rates must be finite")


@dataclass(frozen=True)
class QRSTReport:
    feasible: bool
    slacks: dict
    max_I: float
    max_SB: float
    min_term: float


def qrst_region_check(
    ch: QuantumChannel,
    rates: RateTriple,
    restarts: int = 8,
    grid: bool = True,
    resolution: int = 11,
    rng_seed=0,
    tol: float = 1e-3,
) -> QRSTReport:
    """Check the three feedback-simulation rate inequalities for a channel.

    C1 >= max I(A;B), E >= max H(B), C2 >= E - min [H(B) + max(0, C1 - I(A;B))].
    """
    kw = dict(restarts=restarts, grid=grid, resolution=resolution, rng_seed=rng_seed)
    max_i, _ = optimize_rates(ch, "max_I", **kw)
    max_sb, _ = optimize_rates(ch, "max_SB", **kw)
    min_term, _ = optimize_rates(ch, "min_region_term", c1=rates.C1, **kw)
    slacks = {
        "C1": rates.C1 - max_i,
        "E": rates.E - max_sb,
        "C2": rates.C2 - (rates.E - min_term),
    }
    feasible = all(s >= -tol for s in slacks.values())
    return QRSTReport(feasible, slacks, max_i, max_sb, min_term)
