"""
Date: October 19th, 2026

This file contains the brute-force Fock oracle. It evolves the two-mode
density matrix on a truncated Fock space through displacement, two-mode
squeezing, two-photon absorption and loss, then reads the photon-number
moments off the diagonal and their absorbance derivatives off central
finite differences. It shares no operator algebra with the moment engine.

States are indexed as n1 * dim + n2, so a density matrix reshapes to the
tensor T[n1, n2, m1, m2].

"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.special import comb

from twinbeam.bosonic_algebra import EpsJet
from twinbeam.channel_model import ProbeConfig, Scenario
from twinbeam.exceptions import DerivativeUnstable, InvalidSpec, TruncationUnsafe
from twinbeam.moment_engine import ORDERS, MomentTable

logger = logging.getLogger(__name__)

# extra levels used when exponentiating the displacement generator
DISPLACEMENT_PAD = 16
EXACT_TPA_RTOL = 1e-10
MAX_TPA_STEPS = 4096
CUTOFF_STEP = 8
CUTOFF_RETRIES = 3


class TpaMode(str, enum.Enum):
    FIRST_ORDER = "first-order"
    EXACT = "exact"


@dataclass(frozen=True)
class FockConfig:
    n_max: int
    """Photon cutoff of each mode."""
    eps_values: Tuple[float, float] = (1e-4, 5e-5)
    """The two central-difference steps in eps."""
    tail_tol: float = 1e-10
    """Largest population tolerated in the two top levels of either mode."""
    tpa_mode: TpaMode = TpaMode.FIRST_ORDER
    derivative_rtol: float = 1e-7

    def __post_init__(self):
        if self.n_max < 1:
            raise InvalidSpec(f"Fock cutoff must be at least 1, got {self.n_max}")
        if len(self.eps_values) != 2 or min(self.eps_values) <= 0 or self.eps_values[0] == self.eps_values[1]:
            raise InvalidSpec("Two distinct positive eps steps are required")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class DensityOperator:
    """A two-mode density matrix over the truncated Fock space."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return math.isqrt(self.matrix.shape[0])

    @property
    def tensor(self) -> np.ndarray:
        d = self.dim
        return self.matrix.reshape(d, d, d, d)

    def populations(self) -> np.ndarray:
        """P[n1, n2], the joint photon-number distribution."""
        return np.real(np.diagonal(self.matrix)).reshape(self.dim, self.dim)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


def _from_tensor(t: np.ndarray) -> DensityOperator:
    d = t.shape[0]
    return DensityOperator(np.ascontiguousarray(t.reshape(d * d, d * d)))


def initial_state(fock: FockConfig) -> DensityOperator:
    """The joint vacuum |0, 0><0, 0|."""
    matrix = np.zeros((fock.dim ** 2, fock.dim ** 2), dtype=complex)
    matrix[0, 0] = 1.0
    return DensityOperator(matrix)


def _annihilator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def tail_population(rho: DensityOperator) -> float:
    p = rho.populations()
    return float(max(p.sum(axis=1)[-2:].sum(), p.sum(axis=0)[-2:].sum()))


def _check_tail(rho: DensityOperator, fock: Optional[FockConfig], stage: str) -> DensityOperator:
    if fock is not None:
        tail = tail_population(rho)
        if tail > fock.tail_tol:
            raise TruncationUnsafe(f"{stage} leaves population {tail:.3g} at the cutoff n_max = {fock.n_max}")
    return rho


def apply_displacement(rho: DensityOperator, alpha: float, phi: float, mode: int, fock: Optional[FockConfig] = None) -> DensityOperator:
    """rho -> D rho D† on one mode, with D exponentiated on a padded space."""
    if mode not in (1, 2):
        raise InvalidSpec(f"Mode must be 1 or 2, got {mode}")
    if alpha == 0:
        return rho
    d = rho.dim
    a = _annihilator(d + DISPLACEMENT_PAD)
    beta = alpha * np.exp(1j * phi)
    disp = linalg.expm(beta * a.conj().T - np.conj(beta) * a)[:d, :d]
    spec = "ai,ijkl,bk->ajbl" if mode == 1 else "aj,ijkl,bl->iakb"
    out = _from_tensor(np.einsum(spec, disp, rho.tensor, disp.conj(), optimize=True))
    return _check_tail(out, fock, "Displacement")


def _squeeze_unitary(r: float, theta: float, dim: int) -> sparse.csr_matrix:
    # exp(zeta a1† a2† - h.c.) conserves n1 - n2, so it is exponentiated block by block
    zeta = r * np.exp(1j * theta)
    rows, cols, vals = [], [], []
    for shift in range(-(dim - 1), dim):
        ks = [k for k in range(dim) if 0 <= k + shift < dim]
        index = [(k + shift) * dim + k for k in ks]
        size = len(ks)
        gen = np.zeros((size, size), dtype=complex)
        for i, k in enumerate(ks[:-1]):
            amp = math.sqrt((k + shift + 1) * (k + 1))
            gen[i + 1, i] = zeta * amp
            gen[i, i + 1] = -np.conj(zeta) * amp
        block = linalg.expm(gen) if size > 1 else np.ones((1, 1), dtype=complex)
        for i in range(size):
            for j in range(size):
                rows.append(index[i])
                cols.append(index[j])
                vals.append(block[i, j])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(dim * dim, dim * dim))


def apply_two_mode_squeeze(rho: DensityOperator, r: float, theta: float, fock: Optional[FockConfig] = None) -> DensityOperator:
    if r == 0:
        return rho
    u = _squeeze_unitary(r, theta, rho.dim)
    left = u @ rho.matrix
    out = DensityOperator(np.asarray((u @ left.conj().T).conj().T))
    return _check_tail(out, fock, "Squeezing")


def _pair_jump(dim: int) -> sparse.csr_matrix:
    a = sparse.csr_matrix(_annihilator(dim))
    return sparse.kron(a, a, format="csr")


def _dissipator(matrix: np.ndarray, jump: sparse.csr_matrix, pairs: np.ndarray) -> np.ndarray:
    """J rho J† - (J†J rho + rho J†J) / 2, with J†J = n1 n2 diagonal."""
    x = jump @ matrix
    gained = (jump @ x.conj().T).conj().T
    return gained - 0.5 * (pairs[:, None] * matrix + matrix * pairs[None, :])


def _pair_counts(dim: int) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    return np.outer(n, n).ravel()


def _moment_grid(rho: DensityOperator) -> np.ndarray:
    p = rho.populations()
    n = np.arange(rho.dim, dtype=float)
    powers = np.vander(n, 5, increasing=True)
    return powers.T @ p @ powers


def _rk4(matrix: np.ndarray, eps: float, steps: int, jump, pairs) -> np.ndarray:
    h = eps / steps
    for _ in range(steps):
        k1 = _dissipator(matrix, jump, pairs)
        k2 = _dissipator(matrix + 0.5 * h * k1, jump, pairs)
        k3 = _dissipator(matrix + 0.5 * h * k2, jump, pairs)
        k4 = _dissipator(matrix + h * k3, jump, pairs)
        matrix = matrix + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return matrix


def _tpa(rho: DensityOperator, eps: float, mode: TpaMode) -> DensityOperator:
    # signed eps is allowed here so that central differences can step backwards
    if eps == 0:
        return rho
    jump, pairs = _pair_jump(rho.dim), _pair_counts(rho.dim)
    if TpaMode(mode) is TpaMode.FIRST_ORDER:
        return DensityOperator(rho.matrix + eps * _dissipator(rho.matrix, jump, pairs))
    steps = 1
    current = DensityOperator(_rk4(rho.matrix, eps, steps, jump, pairs))
    while steps < MAX_TPA_STEPS:
        steps *= 2
        refined = DensityOperator(_rk4(rho.matrix, eps, steps, jump, pairs))
        old, new = _moment_grid(current), _moment_grid(refined)
        current = refined
        if np.all(np.abs(new - old) <= EXACT_TPA_RTOL * np.maximum(1.0, np.abs(new))):
            break
    logger.debug("Exact absorption to eps = %.3g took %d steps", eps, steps)
    return current


def apply_tpa(rho: DensityOperator, eps: float, mode: TpaMode = TpaMode.FIRST_ORDER) -> DensityOperator:
    """Two-photon absorption, either rho + eps L rho or the full evolution to time eps."""
    if eps < 0:
        raise InvalidSpec(f"Absorbance must be non-negative, got {eps}")
    return _tpa(rho, eps, mode)


def _loss_weights(dim: int, eta: float) -> np.ndarray:
    """w[k, n] = sqrt(C(n, k) eta^(n - k) (1 - eta)^k), the amplitude of losing k of n photons."""
    n = np.arange(dim)
    k = n[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.sqrt(comb(n[None, :], k) * np.power(eta, np.maximum(n[None, :] - k, 0)) * np.power(1 - eta, k))
    return np.where(n[None, :] >= k, w, 0.0)


def apply_loss(rho: DensityOperator, eta: float) -> DensityOperator:
    """Identical photon loss on both modes, by the photon-number Kraus decomposition."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidSpec(f"Transmissivity must lie in [0, 1], got {eta}")
    if eta == 1:
        return rho
    d = rho.dim
    w = _loss_weights(d, eta)
    t = rho.tensor
    for axes in ((0, 2), (1, 3)):
        out = np.zeros_like(t)
        for k in range(d):
            keep = d - k
            wk = w[k, k:]
            src = [slice(None)] * 4
            dst = [slice(None)] * 4
            for ax in axes:
                src[ax] = slice(k, None)
                dst[ax] = slice(0, keep)
            left = wk.reshape([-1 if i == axes[0] else 1 for i in range(4)])
            right = wk.reshape([-1 if i == axes[1] else 1 for i in range(4)])
            out[tuple(dst)] += left * right * t[tuple(src)]
        t = out
    return _from_tensor(t)


def expectation(rho: DensityOperator, operator: np.ndarray) -> complex:
    return complex(np.trace(operator @ rho.matrix))


def number_operators(dim: int) -> Tuple[np.ndarray, np.ndarray]:
    n = np.diag(np.arange(dim, dtype=float))
    eye = np.eye(dim)
    return np.kron(n, eye), np.kron(eye, n)


def check_legal(rho: DensityOperator, psd: bool = True, atol: float = 1e-10) -> List[str]:
    """The ways in which rho fails to be a density matrix; empty when legal."""
    problems = []
    m = rho.matrix
    if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
        problems.append("not Hermitian")
    if abs(rho.trace() - 1) > atol:
        problems.append(f"trace {rho.trace():.12g}")
    if psd:
        low = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if low < -atol:
            problems.append(f"negative eigenvalue {low:.3g}")
    return problems


def _mode_means(cfg: ProbeConfig) -> Tuple[float, float]:
    ch, sh = math.cosh(cfg.r), math.sinh(cfg.r)
    seed1 = cfg.alpha1 * np.exp(1j * cfg.phi1)
    seed2 = cfg.alpha2 * np.exp(1j * cfg.phi2)
    rot = np.exp(1j * cfg.theta) * sh
    beta1 = ch * seed1 + rot * np.conj(seed2)
    beta2 = ch * seed2 + rot * np.conj(seed1)
    return abs(beta1) ** 2 + sh ** 2, abs(beta2) ** 2 + sh ** 2


def default_fock_config(cfg: ProbeConfig, **overrides) -> FockConfig:
    """
    Cutoff ceil(4 * mean + 12) from the larger per-mode mean, raised until
    the geometric tail of the squeezing weighs less than 1e-12 in fifth moments.
    """
    n_max = math.ceil(4 * max(_mode_means(cfg)) + 12)
    ratio = math.tanh(cfg.r) ** 2
    while ratio > 0 and n_max ** 5 * ratio ** n_max > 1e-12:
        n_max += 1
    return FockConfig(n_max=n_max, **overrides)


def prepare_state(cfg: ProbeConfig, fock: FockConfig) -> DensityOperator:
    """The probe at the absorber: displaced vacuum, then two-mode squeezed."""
    rho = initial_state(fock)
    rho = apply_displacement(rho, cfg.alpha1, cfg.phi1, 1, fock)
    rho = apply_displacement(rho, cfg.alpha2, cfg.phi2, 2, fock)
    return apply_two_mode_squeeze(rho, cfg.r, cfg.theta, fock)


def _detected_moments(state: DensityOperator, eps: float, eta: float, mode: TpaMode) -> np.ndarray:
    return _moment_grid(apply_loss(_tpa(state, eps, mode), eta))


def oracle_moments(cfg: ProbeConfig, fock: Optional[FockConfig] = None) -> MomentTable:
    """
    The moment table of cfg, by direct evolution and central differences.
    Without a FockConfig the cutoff starts from default_fock_config and grows
    by CUTOFF_STEP, at most CUTOFF_RETRIES times, while population leaks past it.
    """
    if fock is not None:
        return _oracle(cfg, fock)
    fock = default_fock_config(cfg)
    for retry in range(CUTOFF_RETRIES + 1):
        try:
            return _oracle(cfg, fock)
        except TruncationUnsafe as e:
            if retry == CUTOFF_RETRIES:
                raise
            logger.info("%s; retrying with n_max = %d", e, fock.n_max + CUTOFF_STEP)
            fock = dataclasses.replace(fock, n_max=fock.n_max + CUTOFF_STEP)


def _oracle(cfg: ProbeConfig, fock: FockConfig) -> MomentTable:
    logger.debug("Oracle for %s with n_max = %d", cfg.digest()[:8], fock.n_max)
    state = prepare_state(cfg, fock)
    base = _detected_moments(state, 0.0, cfg.eta, fock.tpa_mode)
    h1, h2 = fock.eps_values
    slopes = []
    for h in (h1, h2):
        up = _detected_moments(state, h, cfg.eta, fock.tpa_mode)
        down = _detected_moments(state, -h, cfg.eta, fock.tpa_mode)
        slopes.append((up - down) / (2 * h))
    d1, d2 = slopes
    if not np.allclose(d1, d2, rtol=fock.derivative_rtol, atol=1e-9):
        worst = float(np.max(np.abs(d1 - d2) / np.maximum(np.abs(d2), 1e-300)))
        raise DerivativeUnstable(f"Finite differences at eps = {h1:g} and {h2:g} disagree by {worst:.3g}")
    richardson = (d2 * h1 ** 2 - d1 * h2 ** 2) / (h1 ** 2 - h2 ** 2)
    entries = {(p, q): EpsJet(float(base[p, q]), float(richardson[p, q])) for p, q in ORDERS}
    entries[(0, 0)] = EpsJet(1.0, 0.0)
    return MomentTable(entries, cfg.digest())


class Mismatch(NamedTuple):
    p: int
    q: int
    part: str
    engine: float
    oracle: float


def compare_tables(engine: MomentTable, oracle: MomentTable, rtol: float = 1e-6, atol: float = 1e-9) -> List[Mismatch]:
    out = []
    for p, q in ORDERS:
        for part in ("value0", "dvalue"):
            a = getattr(engine, part)(p, q)
            b = getattr(oracle, part)(p, q)
            if not math.isclose(a, b, rel_tol=rtol, abs_tol=atol):
                out.append(Mismatch(p, q, part, a, b))
    return out


def random_suite(n: int = 50, seed: int = 7) -> List[ProbeConfig]:
    """Double-seeded probes with r <= 0.6, seeds <= 1.5, uniform phases, eta in {1, 0.7}."""
    rng = np.random.default_rng(seed)
    suite = []
    for i in range(n):
        suite.append(
            ProbeConfig(
                alpha1=float(rng.uniform(0, 1.5)),
                alpha2=float(rng.uniform(0, 1.5)),
                phi1=float(rng.uniform(0, 2 * math.pi)),
                phi2=float(rng.uniform(0, 2 * math.pi)),
                r=float(rng.uniform(0, 0.6)),
                theta=float(rng.uniform(0, 2 * math.pi)),
                eta=(1.0, 0.7)[i % 2],
                scenario=Scenario.DOUBLE,
            )
        )
    return suite
