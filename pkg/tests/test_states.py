import math

import numpy as np
import pytest

from discordnet import states
from discordnet.states import (
    DensityMatrix,
    PureState,
    StateError,
    bloch_orthogonal,
    bloch_state,
    fidelity,
    maximally_mixed,
    partial_trace,
    purity,
    tensor,
    trace_distance,
)

# Frozen values below were computed with an independent dense-loop
# implementation (explicit-index partial trace, eigenvalue entropies).
REF_ENTRIES = {
    "entropy": 0.8007822408158303,
    "purity": 0.6316034023672755,
    "s_m1": 0.6997844549266832,
    "s_m2": 0.4275017710560212,
    "fid_zero_plus": 0.4563339037274195,
}


def test_density_matrix_validation():
    with pytest.raises(StateError):
        DensityMatrix(("A",), np.array([[0.6, 0.0], [0.1, 0.4]]))  # not Hermitian
    with pytest.raises(StateError):
        DensityMatrix(("A",), np.array([[0.7, 0.0], [0.0, 0.7]]))  # trace != 1
    with pytest.raises(StateError):
        DensityMatrix(("A",), np.array([[1.5, 0.0], [0.0, -0.5]]))  # not PSD


def test_pure_state_density_consistency():
    psi = PureState(("A",), np.array([1.0, 1.0j]) / math.sqrt(2))
    rho = psi.density()
    assert abs(purity(rho) - 1.0) < 1e-12
    assert np.allclose(rho.matrix, rho.matrix.conj().T)


def test_bloch_state_orthogonality():
    for theta, phi in [(0.3, 1.1), (2.0, 4.4), (math.pi / 2, 0.0)]:
        v = bloch_state(theta, phi)
        w = bloch_orthogonal(theta, phi)
        assert abs(np.vdot(v.amplitudes, w.amplitudes)) < 1e-12


def test_tensor_and_partial_trace_roundtrip(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho_a = a @ a.conj().T
    rho_a = DensityMatrix(("A",), rho_a / np.trace(rho_a))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho_b = b @ b.conj().T
    rho_b = DensityMatrix(("B", "C"), rho_b / np.trace(rho_b))
    joint = tensor([rho_a, rho_b])
    assert joint.labels == ("A", "B", "C")
    back = partial_trace(joint, ["A"])
    assert np.allclose(back.matrix, rho_a.matrix, atol=1e-12)
    back_bc = partial_trace(joint, ["B", "C"])
    assert np.allclose(back_bc.matrix, rho_b.matrix, atol=1e-12)


def test_partial_trace_order_preserved():
    bell = states.bell_state("phi+").density()
    red = partial_trace(bell, ["M2"])
    assert red.labels == ("M2",)
    assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-12)


def test_reference_state_oracles(reference_state):
    from discordnet.correlations import entropy

    rho = reference_state
    assert abs(entropy(rho) - REF_ENTRIES["entropy"]) < 1e-9
    assert abs(purity(rho) - REF_ENTRIES["purity"]) < 1e-12
    assert abs(entropy(partial_trace(rho, ["M1"])) - REF_ENTRIES["s_m1"]) < 1e-9
    assert abs(entropy(partial_trace(rho, ["M2"])) - REF_ENTRIES["s_m2"]) < 1e-9
    zero_plus = tensor(
        [
            PureState(("M1",), np.array([1.0, 0.0])).density(),
            PureState(("M2",), np.array([1.0, 1.0]) / math.sqrt(2)).density(),
        ]
    )
    # matrix square roots limit fidelity accuracy to ~1e-8
    assert abs(fidelity(rho, zero_plus) - REF_ENTRIES["fid_zero_plus"]) < 5e-8


def test_fidelity_pure_state_formula(rng):
    # fidelity with a pure argument reduces to <psi|rho|psi>
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    rho = DensityMatrix(("M1", "M2"), rho / np.trace(rho))
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    psi = PureState(("M1", "M2"), v).density()
    direct = float(np.real(v.conj() @ rho.matrix @ v))
    assert abs(fidelity(rho, psi) - direct) < 5e-8
    assert abs(fidelity(psi, rho) - direct) < 5e-8


def test_fidelity_bounds_and_symmetry():
    rho = states.bell_mixture(0.5)
    sigma = maximally_mixed(("M1", "M2"))
    f = fidelity(rho, sigma)
    assert 0.0 <= f <= 1.0
    assert abs(f - fidelity(sigma, rho)) < 1e-10
    assert abs(fidelity(rho, rho) - 1.0) < 1e-10


def test_trace_distance_extremes():
    a = states.bell_state("phi+").density()
    b = states.bell_state("psi+").density()
    assert abs(trace_distance(a, b) - 1.0) < 1e-10
    assert trace_distance(a, a) < 1e-12


def test_classical_carriers_structure():
    rho = states.classical_carriers(2)
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    expected = 0.5 * (
        np.outer(np.kron(plus, plus), np.kron(plus, plus))
        + np.outer(np.kron(minus, minus), np.kron(minus, minus))
    )
    assert np.allclose(rho.matrix, expected, atol=1e-12)


def test_ghz_marginal_is_classical_carriers():
    ghz = states.ghz3_carriers()
    red = partial_trace(ghz, ["C1", "C2"])
    assert np.allclose(red.matrix, states.classical_carriers(2).matrix, atol=1e-12)


def test_mixed_carriers_endpoints():
    assert np.allclose(
        states.mixed_carriers(0.0).matrix, states.classical_carriers(2).matrix
    )
    lam = 0.3
    direct = (1 - lam) * states.classical_carriers(2).matrix + lam * (
        states.anticorrelated_carriers().matrix
    )
    assert np.allclose(states.mixed_carriers(lam).matrix, direct, atol=1e-12)


def test_biased_carriers_endpoints_pure():
    for eta in (0.0, 1.0):
        assert abs(purity(states.biased_carriers(eta)) - 1.0) < 1e-12


def test_w_state_amplitudes():
    w = states.w_state(3)
    amp = w.amplitudes
    nz = np.flatnonzero(np.abs(amp) > 1e-12)
    assert list(nz) == [1, 2, 4]  # |001>, |010>, |100>
    assert np.allclose(amp[nz], 1 / math.sqrt(3))


def test_werner_w_mixing_convention():
    n, eps = 3, 0.4
    rho = states.werner_w(n, eps)
    w = states.w_state(n)
    direct = (1 - eps) * np.outer(w.amplitudes, w.amplitudes.conj()) + eps * np.eye(8) / 8
    assert np.allclose(rho.matrix, direct, atol=1e-12)


def test_bell_mixture_and_werner_specials():
    # x = 1/3 gives the uniform mixture of the three Bell components
    tau = states.bell_mixture(1.0 / 3.0)
    assert abs(purity(tau) - 1.0 / 3.0) < 1e-12
    y = 1.0 / 3.0
    werner = states.werner_bell(y)
    psi_minus = states.bell_state("psi-").density()
    direct = y * psi_minus.matrix + (1 - y) * np.eye(4) / 4
    assert np.allclose(werner.matrix, direct, atol=1e-12)


def test_make_named_state_dispatch():
    rho = states.make_named_state("werner_w", {"n": 3, "eps": 0.2})
    assert rho.labels == ("M1", "M2", "M3")
    with pytest.raises(StateError):
        states.make_named_state("unknown_family")
    with pytest.raises(StateError):
        states.make_named_state("werner_w", {"n": 3})  # missing parameter


def test_named_entropy_values():
    from discordnet.correlations import entropy

    # Frozen via the independent implementation noted above.
    assert abs(entropy(states.werner_bell(1.0 / 3.0)) - 1.792481250360578) < 1e-9
    assert abs(entropy(states.bell_mixture(1.0 / 3.0)) - math.log2(3)) < 1e-9
    assert abs(entropy(states.bell_mixture(0.5)) - 1.5) < 1e-9
