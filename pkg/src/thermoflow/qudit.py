"""Qudit collision protocols along smooth Hamiltonian trajectories.

A protocol discretizes a continuously differentiable family H(s), s in
[0, 1], into N bath contacts with Gibbs targets tau(k/N).  Partial
thermalization makes the state lag behind the instantaneous thermal state
by O(alpha / ((1-alpha) N)), and the dissipated work obeys an explicit
1/N law whose alpha-dependence is trajectory independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    DensityOperator,
    HamiltonianMatrix,
    Temperature,
    ValidationError,
    free_energy,
    gibbs_populations,
    relative_entropy,
    trace_distance,
)
from .collision import WorkLedger

__all__ = [
    "HamiltonianPath",
    "QuditProtocolConfig",
    "AsymptoticDissipation",
    "RankDeficientPoint",
    "FULL_RANK_THRESHOLD",
    "PATH_PRESETS",
    "smoothstep",
    "linear_endpoint_path",
    "qubit_excitation_path",
    "qubit_gap_ramp_path",
    "random_diagonal_path",
    "path_preset",
    "run_qudit_protocol",
    "lag_deviation",
    "gamma_coefficient",
    "f_lambda",
    "relative_entropy_curvature",
    "asymptotic_dissipation",
    "rank_deficient_scaling",
    "make_rank_deficient_erasure",
    "initial_mismatch_work",
]

FULL_RANK_THRESHOLD = 1e-8
DEFAULT_DERIVATIVE_STEP = 1e-5
SMOOTHNESS_CURVATURE_CAP = 1e6


def smoothstep(s):
    """C^1 ramp 3s^2 - 2s^3: zero slope at both endpoints."""
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class HamiltonianPath:
    """Smooth family s -> H(s) on [0, 1] with its Gibbs family tau(s)."""

    dim: int
    sampler: Callable[[float], np.ndarray]
    temp: Temperature
    derivative_step: float = DEFAULT_DERIVATIVE_STEP

    def hamiltonian(self, s: float) -> np.ndarray:
        H = np.asarray(self.sampler(float(s)), dtype=complex)
        if H.shape != (self.dim, self.dim):
            raise ValidationError(f"sampler returned shape {H.shape}, expected ({self.dim}, {self.dim})")
        if np.abs(H - H.conj().T).max() > 1e-12:
            raise ValidationError(f"sampler returned a non-Hermitian matrix at s = {s}")
        return H

    def gibbs_matrix(self, s: float) -> np.ndarray:
        lam, vecs = np.linalg.eigh(self.hamiltonian(s))
        p = gibbs_populations(lam, self.temp)
        m = (vecs * p) @ vecs.conj().T
        return 0.5 * (m + m.conj().T)

    def gibbs(self, s: float) -> DensityOperator:
        return DensityOperator(dim=self.dim, matrix=self.gibbs_matrix(s))

    def _fd_nodes(self, s: float) -> tuple[Optional[float], float, float, float]:
        """Stencil (base, lo, hi, denom) for an O(h^2) derivative inside [0, 1]."""
        h = self.derivative_step
        if s - h < 0.0:
            return s, s + h, s + 2 * h, 2 * h
        if s + h > 1.0:
            return s, s - h, s - 2 * h, -2 * h
        return None, s - h, s + h, 2 * h  # central

    def _fd(self, fun: Callable[[float], np.ndarray], s: float) -> np.ndarray:
        at, lo, hi, denom = self._fd_nodes(s)
        if at is None:
            return (fun(hi) - fun(lo)) / denom
        # One-sided 3-point: (-3 f(s) + 4 f(s+h) - f(s+2h)) / 2h, sign in denom.
        return (-3.0 * fun(at) + 4.0 * fun(lo) - fun(hi)) / denom

    def hamiltonian_derivative(self, s: float) -> np.ndarray:
        return self._fd(self.hamiltonian, s)

    def gibbs_derivative(self, s: float) -> np.ndarray:
        return self._fd(self.gibbs_matrix, s)

    def probe_smoothness(self, points: int = 17) -> float:
        """Max second-difference curvature of H over a probe grid."""
        h = self.derivative_step
        grid = np.linspace(h, 1.0 - h, points)
        worst = 0.0
        for s in grid:
            second = self.hamiltonian(s + h) - 2.0 * self.hamiltonian(s) + self.hamiltonian(s - h)
            worst = max(worst, float(np.abs(second).max()) / (h * h))
        return worst

    def require_smooth(self) -> None:
        scale = 1.0 + float(np.abs(self.hamiltonian(0.5)).max())
        probe = self.probe_smoothness()
        if not np.isfinite(probe) or probe > SMOOTHNESS_CURVATURE_CAP * scale:
            raise ValidationError("path fails the smoothness probe (curvature blow-up)")


# ---------------------------------------------------------------------------
# Path constructors
# ---------------------------------------------------------------------------

def linear_endpoint_path(H0, H1, temp: Temperature, derivative_step: float = DEFAULT_DERIVATIVE_STEP) -> HamiltonianPath:
    """Straight-line interpolation H(s) = (1-s) H0 + s H1."""
    m0 = H0.matrix if isinstance(H0, HamiltonianMatrix) else np.asarray(H0, dtype=complex)
    m1 = H1.matrix if isinstance(H1, HamiltonianMatrix) else np.asarray(H1, dtype=complex)
    if m0.shape != m1.shape:
        raise ValidationError("endpoint Hamiltonians must share a dimension")
    return HamiltonianPath(
        dim=m0.shape[0],
        sampler=lambda s: (1.0 - s) * m0 + s * m1,
        temp=temp,
        derivative_step=derivative_step,
    )


def qubit_excitation_path(q_start: float, q_end: float, temp: Temperature, smooth: bool = True) -> HamiltonianPath:
    """Qubit path parametrized by its Gibbs excitation probability q(s).

    The gap is E(s) = T ln((1-q)/q); with the smooth ramp the endpoint
    free-energy derivatives vanish.
    """
    if not (0.0 < q_start < 1.0 and 0.0 < q_end < 1.0):
        raise ValidationError("excitation endpoints must lie in (0, 1)")

    def sampler(s: float) -> np.ndarray:
        w = smoothstep(s) if smooth else s
        q = q_start + (q_end - q_start) * w
        return np.diag([0.0, temp.T * math.log((1.0 - q) / q)]).astype(complex)

    return HamiltonianPath(dim=2, sampler=sampler, temp=temp)


def qubit_gap_ramp_path(gap_start: float, gap_end: float, temp: Temperature, smooth: bool = True) -> HamiltonianPath:
    """Qubit path ramping the energy gap from gap_start to gap_end."""

    def sampler(s: float) -> np.ndarray:
        w = smoothstep(s) if smooth else s
        return np.diag([0.0, gap_start + (gap_end - gap_start) * w]).astype(complex)

    return HamiltonianPath(dim=2, sampler=sampler, temp=temp)


def random_diagonal_path(temp: Temperature, dim: int = 4, seed: int = 11, smooth: bool = True) -> HamiltonianPath:
    """Diagonal qudit path between two seeded random spectra."""
    rng = np.random.default_rng(seed)
    d0 = np.sort(rng.uniform(-1.0, 1.0, size=dim))
    d1 = np.sort(rng.uniform(-1.0, 1.0, size=dim))

    def sampler(s: float) -> np.ndarray:
        w = smoothstep(s) if smooth else s
        return np.diag((1.0 - w) * d0 + w * d1).astype(complex)

    return HamiltonianPath(dim=dim, sampler=sampler, temp=temp)


PATH_PRESETS = {
    "qubit-linear-q": lambda temp: qubit_excitation_path(0.2, 0.5, temp),
    "qubit-gap-ramp": lambda temp: qubit_gap_ramp_path(1.6, 0.3, temp),
    "random-diagonal-d4": lambda temp: random_diagonal_path(temp),
}


def path_preset(name: str, temp: Temperature) -> HamiltonianPath:
    if name not in PATH_PRESETS:
        raise ValidationError(f"unknown path preset {name!r}; choose from {sorted(PATH_PRESETS)}")
    return PATH_PRESETS[name](temp)


# ---------------------------------------------------------------------------
# Protocol configuration and execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuditProtocolConfig:
    """N-step staircase along a path, with fixed system Hamiltonian H_system.

    H_system defaults to H(1) (the protocol ends at the system Hamiltonian).
    Full-rank initial states must match tau(0) exactly; rank-deficient ones
    record their initial mismatch delta = ||tau(0) - rho0||_1.
    """

    path: HamiltonianPath
    rho0: DensityOperator
    N: int
    alpha: float
    H_system: Optional[np.ndarray] = None
    delta: float = field(init=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError(f"N must be >= 1, got {self.N}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.rho0.dim != self.path.dim:
            raise ValidationError("initial state dimension does not match the path")
        H_S = self.path.hamiltonian(1.0) if self.H_system is None else np.asarray(self.H_system, dtype=complex)
        if np.abs(H_S - H_S.conj().T).max() > 1e-12:
            raise ValidationError("H_system must be Hermitian")
        object.__setattr__(self, "H_system", H_S)
        delta = trace_distance(self.rho0, self.path.gibbs(0.0))
        if self.is_full_rank and delta > 1e-10:
            raise ValidationError(
                f"full-rank protocols require rho0 = tau(0); mismatch {delta:.3e}"
            )
        object.__setattr__(self, "delta", float(delta))

    @property
    def is_full_rank(self) -> bool:
        return float(np.linalg.eigvalsh(self.rho0.matrix)[0]) >= FULL_RANK_THRESHOLD


def run_qudit_protocol(config: QuditProtocolConfig) -> tuple[list[DensityOperator], WorkLedger]:
    """Iterate rho_k = alpha rho_{k-1} + (1-alpha) tau(k/N) and tally work.

    Step k contributes (1-alpha) Tr[(H(k/N) - H_S)(tau(k/N) - rho_{k-1})].
    """
    N = config.N
    alpha = config.alpha
    H_S = config.H_system
    states = [config.rho0]
    rho = config.rho0.matrix
    steps = np.empty(N)
    for k in range(1, N + 1):
        s = k / N
        tau = config.path.gibbs_matrix(s)
        H = config.path.hamiltonian(s)
        steps[k - 1] = (1.0 - alpha) * np.trace((H - H_S) @ (tau - rho)).real
        rho = alpha * rho + (1.0 - alpha) * tau
        states.append(DensityOperator(dim=config.path.dim, matrix=rho))
    total = float(steps.sum())
    ledger = WorkLedger(per_step_work=steps, cumulative_work=total, mean=total, variance=0.0)
    return states, ledger


def lag_deviation(config: QuditProtocolConfig, k: int) -> float:
    """Residual of the first-order lag expansion at step k.

    Returns || rho_k - tau(k/N) + (alpha/((1-alpha) N)) taudot(k/N) ||_1,
    which vanishes one order faster than the lag itself.
    """
    if not config.is_full_rank:
        raise ValidationError("lag expansion requires full-rank mode")
    N = config.N
    if not 1 <= k <= N:
        raise ValidationError(f"step index k = {k} outside 1..{N}")
    if k < math.isqrt(N):
        raise ValidationError(f"lag expansion needs k >= sqrt(N); got k = {k}, N = {N}")
    alpha = config.alpha
    rho = config.rho0.matrix
    for j in range(1, k + 1):
        rho = alpha * rho + (1.0 - alpha) * config.path.gibbs_matrix(j / N)
    s = k / N
    correction = (alpha / (N * (1.0 - alpha))) * config.path.gibbs_derivative(s)
    residual = rho - config.path.gibbs_matrix(s) + correction
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (residual + residual.conj().T)))))


# ---------------------------------------------------------------------------
# Trajectory coefficients
# ---------------------------------------------------------------------------

def _dissipation_density(path: HamiltonianPath, s: float) -> float:
    """Integrand -(1/2) Tr(taudot(s) Hdot(s)); non-negative along Gibbs families."""
    return -0.5 * np.trace(path.gibbs_derivative(s) @ path.hamiltonian_derivative(s)).real


def _simpson(fun: Callable[[float], float], panels: int) -> float:
    xs = np.linspace(0.0, 1.0, panels + 1)
    ys = np.array([fun(x) for x in xs])
    return float((ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum()) / (3.0 * panels))


def gamma_coefficient(path: HamiltonianPath, M: int = 256, tol: float = 1e-9) -> float:
    """Dissipation coefficient Gamma = -(1/2) Integral Tr(taudot Hdot) ds.

    Composite Simpson on M panels, doubled with Richardson extrapolation
    until successive refinements agree to tol.
    """
    if M < 8:
        raise ValidationError(f"need at least 8 quadrature panels, got {M}")
    if M % 2:
        raise ValidationError("panel count must be even")
    path.require_smooth()
    fun = lambda s: _dissipation_density(path, s)
    coarse = _simpson(fun, M)
    while True:
        M *= 2
        fine = _simpson(fun, M)
        # Richardson step for the O(M^-4) Simpson error.
        extrapolated = fine + (fine - coarse) / 15.0
        if abs(fine - coarse) < tol or M >= 4096:
            return extrapolated
        coarse = fine


def f_lambda(path: HamiltonianPath, lam: float) -> float:
    """Local dissipation rate f(lambda) = -Tr(taudot(lambda) Hdot(lambda)).

    Equals T times the second derivative of S(tau(lambda+x) || tau(lambda))
    in x at 0, so it is non-negative along any Gibbs family.
    """
    h = path.derivative_step
    if not h <= lam <= 1.0 - h:
        raise ValidationError(f"lambda = {lam} too close to the boundary of (0, 1)")
    return -float(np.trace(path.gibbs_derivative(lam) @ path.hamiltonian_derivative(lam)).real)


def relative_entropy_curvature(path: HamiltonianPath, lam: float, x: float = 1e-3) -> float:
    """T * d^2/dx^2 S(tau(lambda+x) || tau(lambda)) at x = 0, by central differences."""
    if not x <= lam <= 1.0 - x:
        raise ValidationError(f"lambda = {lam} too close to the boundary for step {x}")
    base = path.gibbs(lam)
    plus = relative_entropy(path.gibbs(lam + x), base)
    minus = relative_entropy(path.gibbs(lam - x), base)
    return path.temp.T * (plus + minus) / (x * x)


def _free_energy_of_s(config: QuditProtocolConfig, s: float) -> float:
    H_S = HamiltonianMatrix(dim=config.path.dim, matrix=config.H_system)
    return free_energy(config.path.gibbs(s), H_S, config.path.temp)


def _fdot(config: QuditProtocolConfig, s: float) -> float:
    """d/ds F(tau(s), H_system) by an O(h^2) stencil staying inside [0, 1]."""
    h = config.path.derivative_step
    F = lambda u: _free_energy_of_s(config, u)
    if s + h > 1.0:
        return (3.0 * F(s) - 4.0 * F(s - h) + F(s - 2 * h)) / (2.0 * h)
    if s - h < 0.0:
        return (-3.0 * F(s) + 4.0 * F(s + h) - F(s + 2 * h)) / (2.0 * h)
    return (F(s + h) - F(s - h)) / (2.0 * h)


@dataclass(frozen=True)
class AsymptoticDissipation:
    """Leading 1/N dissipation law versus the exact N-step value."""

    prediction: float
    exact: float
    lambda_over_gamma: float
    gamma: float
    fdot_end: float
    fdot_start: float


def asymptotic_dissipation(config: QuditProtocolConfig) -> AsymptoticDissipation:
    """Assemble the order-1/N dissipation prediction and compare it exactly.

    prediction = (1 + 2 alpha/(1-alpha)) Gamma / N
                 - alpha/((1-alpha) N) Fdot(1),
    exact      = DeltaF - W  with  DeltaF = F(rho0, H_S) - F(tau(1), H_S).

    The endpoint term involves only the final free-energy slope: expanding
    the exact work sum around the upper stencil points, all Fdot(0+)
    contributions cancel between the geometric transient and the
    Riemann-sum edge corrections (verified against exact staircases; the
    starting slope is still reported for diagnostics).

    lambda_over_gamma refits the alpha-linearity against an alpha = 0 run of
    the same staircase; it approaches 2 when the endpoint terms vanish.
    """
    if not config.is_full_rank:
        raise ValidationError("rank-deficient initial state: use rank_deficient_scaling")
    gamma = gamma_coefficient(config.path)
    h = config.path.derivative_step
    fdot_end = _fdot(config, 1.0)
    fdot_start = _fdot(config, h)  # right limit, one step inside
    alpha, N = config.alpha, config.N
    ratio = alpha / (1.0 - alpha)
    prediction = (1.0 + 2.0 * ratio) * gamma / N - ratio * fdot_end / N

    exact = _exact_dissipation(config)
    if alpha > 0.0:
        perfect = _exact_dissipation(
            QuditProtocolConfig(path=config.path, rho0=config.rho0, N=N, alpha=0.0, H_system=config.H_system)
        )
        lambda_over_gamma = (exact - perfect) / (ratio * perfect)
    else:
        lambda_over_gamma = float("nan")
    return AsymptoticDissipation(
        prediction=prediction,
        exact=exact,
        lambda_over_gamma=lambda_over_gamma,
        gamma=gamma,
        fdot_end=fdot_end,
        fdot_start=fdot_start,
    )


def _exact_dissipation(config: QuditProtocolConfig) -> float:
    H_S = HamiltonianMatrix(dim=config.path.dim, matrix=config.H_system)
    _, ledger = run_qudit_protocol(config)
    delta_F = free_energy(config.rho0, H_S, config.path.temp) - free_energy(
        config.path.gibbs(1.0), H_S, config.path.temp
    )
    return delta_F - ledger.cumulative_work


# ---------------------------------------------------------------------------
# Rank-deficient initial states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankDeficientPoint:
    delta: float
    N: int
    w_dis: float


def _clamped_start(populations: np.ndarray, delta: float) -> np.ndarray:
    """Move trace weight delta/2 from the supported levels onto the empty ones."""
    pops = populations.copy()
    empty = pops < FULL_RANK_THRESHOLD
    n_empty = int(empty.sum())
    if n_empty == 0:
        raise ValidationError("initial state is already full rank")
    lift = 0.5 * delta / n_empty
    pops[empty] = lift
    support = ~empty
    pops[support] -= 0.5 * delta * populations[support] / populations[support].sum()
    return pops


def _diagonal_population_path(start: np.ndarray, end: np.ndarray, temp: Temperature) -> HamiltonianPath:
    """Diagonal path whose Gibbs populations interpolate linearly.

    Energies are gauged to the most occupied starting level, so the level
    clamped at delta/2 carries a gap of order T log(1/delta).
    """
    anchor = int(np.argmax(start))

    def sampler(s: float) -> np.ndarray:
        pops = (1.0 - s) * start + s * end
        energies = temp.T * (np.log(pops[anchor]) - np.log(pops))
        return np.diag(energies).astype(complex)

    return HamiltonianPath(dim=len(start), sampler=sampler, temp=temp)


def rank_deficient_scaling(config: QuditProtocolConfig, delta_schedule) -> list[RankDeficientPoint]:
    """Dissipation table for rank-deficient starts with delta-clamped paths.

    For each delta the protocol runs with N = round(1/delta) steps along a
    diagonal path from the clamped initial populations to the Gibbs state of
    the target Hamiltonian; the returned w_dis values scale as log(N)/N.
    """
    if config.is_full_rank:
        raise ValidationError("full-rank initial state: use asymptotic_dissipation")
    deltas = np.asarray(delta_schedule, dtype=float)
    if np.any(deltas <= 0.0):
        raise ValidationError("delta = 0 cannot be represented by a Gibbs state for a rank-deficient start")
    rho0_pops = config.rho0.populations
    if np.abs(config.rho0.matrix - np.diag(rho0_pops)).max() > 1e-12:
        raise ValidationError("rank-deficient scaling is defined for diagonal initial states")
    temp = config.path.temp
    end_pops = config.path.gibbs(1.0).populations
    H_S = config.H_system

    rows = []
    for delta in deltas:
        N = max(int(round(1.0 / delta)), 2)
        start = _clamped_start(rho0_pops, delta)
        path = _diagonal_population_path(start, end_pops, temp)
        run_cfg = QuditProtocolConfig(path=path, rho0=config.rho0, N=N, alpha=config.alpha, H_system=H_S)
        rows.append(RankDeficientPoint(delta=float(delta), N=N, w_dis=_exact_dissipation(run_cfg)))
    return rows


def make_rank_deficient_erasure(alpha: float, temp: Temperature, delta: float, dim: int = 2) -> QuditProtocolConfig:
    """Pure-state erasure start with tau(0) clamped at mismatch delta.

    The path ends at the maximally mixed Gibbs state of a zero-gap target,
    the qudit generalization of one-bit-to-work conversion.
    """
    rho0 = DensityOperator.pure(0, dim)
    start = _clamped_start(rho0.populations, delta)
    end = np.full(dim, 1.0 / dim)
    path = _diagonal_population_path(start, end, temp)
    return QuditProtocolConfig(path=path, rho0=rho0, N=max(int(round(1.0 / delta)), 2), alpha=alpha)


def initial_mismatch_work(config: QuditProtocolConfig) -> tuple[float, float]:
    """First-contact work term from rho0 != tau(0), and its norm bound.

    W0 = (1-alpha) sum_k alpha^(k-1) Tr[(H(k/N) - H_S)(tau(0) - rho0)]
    obeys |W0| <= delta * max_s ||H(s) - H_S||_inf with delta the initial
    trace-norm mismatch.
    """
    N, alpha = config.N, config.alpha
    mismatch = config.path.gibbs_matrix(0.0) - config.rho0.matrix
    w0 = 0.0
    for k in range(1, N + 1):
        H = config.path.hamiltonian(k / N)
        w0 += (1.0 - alpha) * alpha ** (k - 1) * np.trace((H - config.H_system) @ mismatch).real
    grid = np.linspace(0.0, 1.0, 201)
    bound = config.delta * max(
        float(np.linalg.norm(config.path.hamiltonian(s) - config.H_system, 2)) for s in grid
    )
    return float(w0), bound
