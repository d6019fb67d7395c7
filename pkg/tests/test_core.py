import math

import numpy as np
import pytest

from thermoflow.core import (
    DensityOperator,
    HamiltonianMatrix,
    Temperature,
    ValidationError,
    free_energy,
    gibbs_state,
    partial_thermalize,
    relative_entropy,
    trace_distance,
    von_neumann_entropy,
)

from conftest import random_density, random_diagonal_density, random_hermitian

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Types and validation
# ---------------------------------------------------------------------------

def test_temperature_caches_beta():
    t = Temperature(2.5)
    assert abs(t.beta * t.T - 1.0) < 1e-14


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_temperature_rejects_nonpositive(bad):
    with pytest.raises(ValidationError):
        Temperature(bad)


def test_density_operator_validation():
    with pytest.raises(ValidationError):  # not Hermitian
        DensityOperator.from_matrix(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValidationError):  # trace != 1
        DensityOperator.from_matrix(np.eye(2))
    with pytest.raises(ValidationError):  # negative eigenvalue
        DensityOperator.from_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):  # dim mismatch
        DensityOperator(dim=3, matrix=np.eye(2) / 2)


def test_density_operator_is_immutable():
    rho = DensityOperator.maximally_mixed(2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0.7


def test_hamiltonian_requires_hermitian():
    with pytest.raises(ValidationError):
        HamiltonianMatrix.from_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ---------------------------------------------------------------------------
# Gibbs states
# ---------------------------------------------------------------------------

def test_gibbs_zero_hamiltonian_is_maximally_mixed():
    tau = gibbs_state(HamiltonianMatrix.diagonal([0.0, 0.0]), Temperature(3.7))
    np.testing.assert_allclose(tau.populations, [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("q", [0.1, 0.25, 0.45])
def test_gibbs_qubit_parametrization(q, fig_temp):
    # gap E = T ln((1-q)/q) puts exactly q of the weight on the excited level
    E = fig_temp.T * math.log((1.0 - q) / q)
    tau = gibbs_state(HamiltonianMatrix.qubit(E), fig_temp)
    np.testing.assert_allclose(tau.populations, [1.0 - q, q], atol=1e-13)


def test_gibbs_matches_independent_eigensolve():
    rng = np.random.default_rng(42)
    H = HamiltonianMatrix.from_matrix(random_hermitian(rng, 4))
    temp = Temperature(1.0)
    tau = gibbs_state(H, temp)
    # independent oracle: plain Boltzmann weights from the eigenvalues
    lam, vecs = np.linalg.eigh(H.matrix)
    weights = np.exp(-temp.beta * lam)
    expected = (vecs * (weights / weights.sum())) @ vecs.conj().T
    assert np.abs(tau.matrix - expected).max() < 1e-10


def test_gibbs_commutes_with_hamiltonian():
    rng = np.random.default_rng(7)
    for dim in (2, 3, 4, 8):
        H = HamiltonianMatrix.from_matrix(random_hermitian(rng, dim))
        tau = gibbs_state(H, Temperature(0.7))
        comm = tau.matrix @ H.matrix - H.matrix @ tau.matrix
        assert np.abs(comm).max() < 1e-10


def test_gibbs_never_overflows():
    # beta * ||H|| ~ 1e8: naive exponentiation would overflow
    tau = gibbs_state(HamiltonianMatrix.diagonal([0.0, 1e5]), Temperature(1e-3))
    assert np.isfinite(tau.matrix).all()
    np.testing.assert_allclose(tau.populations, [1.0, 0.0], atol=1e-15)


# ---------------------------------------------------------------------------
# Entropy and free energy
# ---------------------------------------------------------------------------

def test_entropy_pure_state_is_zero():
    assert von_neumann_entropy(DensityOperator.pure(0, 2)) == 0.0


def test_entropy_maximally_mixed():
    assert abs(von_neumann_entropy(DensityOperator.maximally_mixed(2)) - LN2) < 1e-14


def test_entropy_direct_scalar_value():
    rho = DensityOperator.diagonal([0.75, 0.25])
    expected = -0.75 * math.log(0.75) - 0.25 * math.log(0.25)
    assert abs(von_neumann_entropy(rho) - expected) < 1e-14


def test_entropy_bounds_random_states():
    rng = np.random.default_rng(11)
    for dim in (2, 3, 4, 8):
        for _ in range(20):
            s = von_neumann_entropy(random_density(rng, dim))
            assert -1e-12 <= s <= math.log(dim) + 1e-12


def test_free_energy_of_gibbs_is_minus_t_log_z():
    rng = np.random.default_rng(3)
    H = HamiltonianMatrix.from_matrix(random_hermitian(rng, 3))
    temp = Temperature(0.9)
    lam = np.linalg.eigvalsh(H.matrix)
    expected = -temp.T * math.log(np.exp(-temp.beta * lam).sum())
    assert abs(free_energy(gibbs_state(H, temp), H, temp) - expected) < 1e-12


def test_free_energy_pure_ground_state_is_zero():
    H = HamiltonianMatrix.qubit(1.3)
    assert abs(free_energy(DensityOperator.pure(0, 2), H, Temperature(1.0))) < 1e-14


def test_erasure_gap_is_t_ln2(fig_temp):
    # one sharp bit is worth T ln 2 of free energy over the mixed bit
    H = HamiltonianMatrix.diagonal([0.0, 0.0])
    gap = free_energy(DensityOperator.pure(0, 2), H, fig_temp) - free_energy(
        DensityOperator.maximally_mixed(2), H, fig_temp
    )
    assert abs(gap - fig_temp.T * LN2) < 1e-13


def test_gibbs_minimizes_free_energy():
    rng = np.random.default_rng(19)
    temp = Temperature(0.8)
    for dim in (2, 3, 4, 8):
        H = HamiltonianMatrix.from_matrix(random_hermitian(rng, dim))
        f_gibbs = free_energy(gibbs_state(H, temp), H, temp)
        for _ in range(100):
            rho = random_density(rng, dim)
            assert free_energy(rho, H, temp) >= f_gibbs - 1e-10


def test_free_energy_dimension_mismatch():
    with pytest.raises(ValidationError):
        free_energy(DensityOperator.maximally_mixed(2), HamiltonianMatrix.diagonal([0.0] * 3), Temperature(1.0))


# ---------------------------------------------------------------------------
# Relative entropy and trace distance
# ---------------------------------------------------------------------------

def test_relative_entropy_of_identical_states():
    rng = np.random.default_rng(23)
    rho = random_density(rng, 3)
    assert abs(relative_entropy(rho, rho)) < 1e-12


def test_relative_entropy_binary_kl():
    p, q = 0.3, 0.6
    rho = DensityOperator.diagonal([p, 1.0 - p])
    sigma = DensityOperator.diagonal([q, 1.0 - q])
    kl = p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    assert abs(relative_entropy(rho, sigma) - kl) < 1e-12


def test_relative_entropy_free_energy_identity():
    # F(rho, H) - F(tau, H) = T S(rho || tau), both sides computed independently
    rng = np.random.default_rng(31)
    temp = Temperature(1.3)
    for dim in (2, 4):
        H = HamiltonianMatrix.from_matrix(random_hermitian(rng, dim))
        tau = gibbs_state(H, temp)
        for _ in range(10):
            rho = random_density(rng, dim)
            lhs = free_energy(rho, H, temp) - free_energy(tau, H, temp)
            assert abs(lhs - temp.T * relative_entropy(rho, tau)) < 1e-9


def test_relative_entropy_support_violation_returns_inf():
    rho = DensityOperator.maximally_mixed(2)
    sigma = DensityOperator.pure(0, 2)
    with pytest.warns(RuntimeWarning):
        assert relative_entropy(rho, sigma) == math.inf


def test_relative_entropy_nonnegative():
    rng = np.random.default_rng(5)
    for _ in range(25):
        assert relative_entropy(random_density(rng, 3), random_density(rng, 3)) >= 0.0


def test_trace_distance_basics():
    rho = DensityOperator.pure(0, 2)
    sigma = DensityOperator.pure(1, 2)
    assert trace_distance(rho, rho) == 0.0
    assert abs(trace_distance(rho, sigma) - 2.0) < 1e-14


def test_trace_distance_diagonal_closed_form():
    rng = np.random.default_rng(13)
    for _ in range(20):
        p, q = rng.random(2)
        d = trace_distance(DensityOperator.diagonal([p, 1 - p]), DensityOperator.diagonal([q, 1 - q]))
        assert abs(d - 2.0 * abs(p - q)) < 1e-12


def test_trace_distance_dimension_mismatch():
    with pytest.raises(ValidationError):
        trace_distance(DensityOperator.maximally_mixed(2), DensityOperator.maximally_mixed(3))


def test_pinsker_inequality_on_diagonal_pairs():
    rng = np.random.default_rng(17)
    for _ in range(50):
        rho = random_diagonal_density(rng, 4)
        sigma = random_diagonal_density(rng, 4)
        assert trace_distance(rho, sigma) <= math.sqrt(2.0 * relative_entropy(rho, sigma)) + 1e-8


# ---------------------------------------------------------------------------
# Partial thermalization
# ---------------------------------------------------------------------------

def test_partial_thermalize_endpoints():
    rng = np.random.default_rng(29)
    rho, tau = random_density(rng, 3), random_density(rng, 3)
    assert np.abs(partial_thermalize(rho, tau, 0.0).matrix - tau.matrix).max() < 1e-15
    assert np.abs(partial_thermalize(rho, tau, 1.0).matrix - rho.matrix).max() < 1e-15


def test_partial_thermalize_halfway_qubit():
    rho = DensityOperator.diagonal([1.0, 0.0])
    tau = DensityOperator.maximally_mixed(2)
    np.testing.assert_allclose(partial_thermalize(rho, tau, 0.5).populations, [0.75, 0.25], atol=1e-15)


def test_partial_thermalize_contracts_exactly():
    rng = np.random.default_rng(37)
    rho, tau = random_density(rng, 4), random_density(rng, 4)
    base = trace_distance(rho, tau)
    for alpha in np.linspace(0.0, 1.0, 11):
        mixed = partial_thermalize(rho, tau, float(alpha))
        assert abs(trace_distance(mixed, tau) - alpha * base) < 1e-12


def test_partial_thermalize_rejects_bad_alpha():
    rho = DensityOperator.maximally_mixed(2)
    with pytest.raises(ValidationError):
        partial_thermalize(rho, rho, 1.5)
    with pytest.raises(ValidationError):
        partial_thermalize(rho, rho, -0.1)
