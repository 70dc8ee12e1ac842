"""Gates, Kraus channels and projective measurements on named subsystems.

Gate and measurement embedding is done by index arithmetic on the reshaped
state tensor rather than by building full-dimension operators, keeping the
cost at O(4^n) per application.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .states import DensityMatrix, StateError, _check_bloch_angles

# Post-selection outcomes with probability below this are treated as invalid
# rather than normalized: normalizing pure round-off would fabricate states.
ZERO_PROBABILITY_TOL = 1e-12

_I2 = np.eye(2, dtype=np.complex128)
_Z = np.diag([1.0, -1.0]).astype(np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


class ChannelError(ValueError):
    """Invalid gate / channel / measurement specification."""


class ZeroProbabilityError(ChannelError):
    """Requested post-selection outcome has (numerically) zero probability."""


def basis_vectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal measurement pair (|psi>, |psi_perp>) for Bloch angles."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = np.exp(1j * phi)
    return np.array([c, e * s]), np.array([s, -e * c])


@dataclass(frozen=True)
class MeasurementBasis:
    """Per-label Bloch angles defining local rank-1 projective measurements."""

    angles: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        checked = {}
        for label, (theta, phi) in dict(self.angles).items():
            _check_bloch_angles(theta, phi % (2 * math.pi))
            checked[str(label)] = (float(theta), float(phi))
        object.__setattr__(self, "angles", checked)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.angles)

    def vectors(self, label: str) -> tuple[np.ndarray, np.ndarray]:
        theta, phi = self.angles[label]
        return basis_vectors(theta, phi)


@dataclass(frozen=True)
class GateSpec:
    """Controlled-Z / controlled-Hadamard / arbitrary local unitary."""

    kind: str  # "cz", "ch" or "local"
    control: str | None = None
    target: str = ""
    matrix: np.ndarray | None = field(default=None)

    def two_qubit_matrix(self) -> np.ndarray:
        if self.kind == "cz":
            applied = _Z
        elif self.kind == "ch":
            applied = _H
        else:
            raise ChannelError(f"gate kind {self.kind!r} is not a controlled gate")
        u = np.zeros((4, 4), dtype=np.complex128)
        u[:2, :2] = _I2
        u[2:, 2:] = applied
        return u


def _apply_matrix_rows(tensor: np.ndarray, u: np.ndarray, axes: Sequence[int], n: int) -> np.ndarray:
    """Apply u to the given row axes of a rank-2n state tensor."""
    k = len(axes)
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    flat = moved.reshape(2**k, -1)
    flat = u @ flat
    return np.moveaxis(flat.reshape(shape), range(k), axes)


def apply_unitary(rho: DensityMatrix, u: np.ndarray, labels: Sequence[str]) -> DensityMatrix:
    """U rho U^dag with u embedded at the named labels (in the given order)."""
    u = linalg.as_matrix(u)
    k = len(labels)
    if u.shape != (2**k, 2**k):
        raise ChannelError(f"unitary shape {u.shape} does not fit {k} qubits")
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(2**k))))
    if defect > 1e-10:
        raise ChannelError(f"matrix is not unitary (defect {defect:.3e})")
    n = rho.n_qubits
    axes = [rho.axis(lab) for lab in labels]
    t = rho.tensor_view()
    t = _apply_matrix_rows(t, u, axes, n)
    t = _apply_matrix_rows(t, u.conj(), [a + n for a in axes], n)
    return DensityMatrix(rho.labels, t.reshape(2**n, 2**n))


def apply_gate(rho: DensityMatrix, gate: GateSpec) -> DensityMatrix:
    if gate.kind == "local":
        if gate.matrix is None:
            raise ChannelError("local gate requires an explicit matrix")
        return apply_unitary(rho, gate.matrix, [gate.target])
    if gate.control is None or gate.control == gate.target:
        raise ChannelError("controlled gate needs distinct control and target labels")
    return apply_unitary(rho, gate.two_qubit_matrix(), [gate.control, gate.target])


@dataclass(frozen=True)
class KrausChannel:
    """Completeness-satisfying operator list acting on named subsystems."""

    labels: tuple[str, ...]
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        d = 2 ** len(labels)
        ops = tuple(linalg.as_matrix(k) for k in self.operators)
        if not ops:
            raise ChannelError("Kraus channel needs at least one operator")
        for k in ops:
            if k.shape != (d, d):
                raise ChannelError(f"Kraus operator shape {k.shape} does not fit {labels}")
        total = sum(k.conj().T @ k for k in ops)
        if float(np.max(np.abs(total - np.eye(d)))) > 1e-10:
            raise ChannelError("Kraus operators violate completeness")
        frozen = []
        for k in ops:
            k = k.copy()
            k.setflags(write=False)
            frozen.append(k)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "operators", tuple(frozen))


def correlated_dephasing(p: float, mu: float, labels: Sequence[str] = ("M1", "M2")) -> KrausChannel:
    """Two-qubit dephasing with correlation strength mu between the Z errors.

    p = 0 is the identity channel; p = 1, mu = 1 flips the joint phase with
    probability 1/2.
    """
    if not (0.0 <= p <= 1.0):
        raise ChannelError(f"noise strength p = {p} outside [0, 1]")
    if not (0.0 <= mu <= 1.0):
        raise ChannelError(f"correlation strength mu = {mu} outside [0, 1]")
    ii = np.kron(_I2, _I2)
    zi = np.kron(_Z, _I2)
    iz = np.kron(_I2, _Z)
    zz = np.kron(_Z, _Z)
    w_single = p / 2 * (1 - mu)
    w_joint = p / 2 * mu
    # identity weight is the completeness complement; equals 1 - p/2 at mu = 1
    ops = [
        math.sqrt(1 - 2 * w_single - w_joint) * ii,
        math.sqrt(w_single) * zi,
        math.sqrt(w_single) * iz,
        math.sqrt(w_joint) * zz,
    ]
    ops = [k for k in ops if np.max(np.abs(k)) > 0]
    return KrausChannel(tuple(labels), tuple(ops))


def apply_kraus(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    n = rho.n_qubits
    axes = [rho.axis(lab) for lab in ch.labels]
    t = rho.tensor_view()
    out = np.zeros_like(t)
    for k in ch.operators:
        term = _apply_matrix_rows(t, k, axes, n)
        term = _apply_matrix_rows(term, k.conj(), [a + n for a in axes], n)
        out = out + term
    return DensityMatrix(rho.labels, out.reshape(2**n, 2**n))


def measure_project(
    rho: DensityMatrix,
    basis: MeasurementBasis,
    outcomes: Sequence[int],
) -> tuple[DensityMatrix, float]:
    """Project the measured labels onto the chosen basis elements.

    Returns the normalized state on the unmeasured labels and the outcome
    probability.  Outcome bit 0 selects |psi>, bit 1 selects |psi_perp>.
    """
    measured = basis.labels
    if len(outcomes) != len(measured):
        raise ChannelError("one outcome bit required per measured label")
    missing = [lab for lab in measured if lab not in rho.labels]
    if missing:
        raise ChannelError(f"labels not in state: {missing}")
    remaining = [lab for lab in rho.labels if lab not in measured]
    if not remaining:
        raise ChannelError("measuring every label would leave an empty state")

    n = rho.n_qubits
    t = rho.tensor_view()
    # Contract <v| rho |v> over each measured label in a single einsum.
    row_idx = list(range(n))
    col_idx = list(range(n, 2 * n))
    out_idx = [rho.axis(lab) for lab in remaining] + [rho.axis(lab) + n for lab in remaining]
    args: list = [t, row_idx + col_idx]
    for lab, bit in zip(measured, outcomes):
        v = basis.vectors(lab)[int(bit)]
        args += [v.conj(), [rho.axis(lab)], v, [rho.axis(lab) + n]]
    args.append(out_idx)
    reduced = np.einsum(*args, optimize=True)
    d = 2 ** len(remaining)
    reduced = reduced.reshape(d, d)
    prob = float(np.real(np.trace(reduced)))
    if prob < ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityError(
            f"outcome {tuple(int(b) for b in outcomes)} has probability {prob:.3e}"
        )
    return DensityMatrix(tuple(remaining), reduced / prob), prob


def measure_all_outcomes(
    rho: DensityMatrix, basis: MeasurementBasis
) -> list[tuple[tuple[int, ...], DensityMatrix | None, float]]:
    """All 2^k outcome branches as (bits, state-or-None, probability)."""
    k = len(basis.labels)
    results = []
    for idx in range(2**k):
        bits = tuple((idx >> (k - 1 - j)) & 1 for j in range(k))
        try:
            state, prob = measure_project(rho, basis, bits)
        except ZeroProbabilityError:
            state, prob = None, 0.0
        results.append((bits, state, prob))
    return results
