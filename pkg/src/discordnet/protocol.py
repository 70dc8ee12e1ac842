"""The discord distribution protocol: circuit execution, the bipartite
closed form, its variants (B92 resource generation, single-memory, GHZ
carriers, partial interaction subsets, noisy memories) and the effective
memory-channel classification analyses.

Retention rule for partial-interaction runs: an index i whose carrier-memory
pair does interact contributes M_i to the final state (C_i is measured and
discarded); a non-interacting index contributes C_i and its unused memory
M_i is traced out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from . import states
from .channels import (
    GateSpec,
    KrausChannel,
    MeasurementBasis,
    apply_gate,
    apply_kraus,
    measure_all_outcomes,
    measure_project,
)
from .states import DensityMatrix, StateError, partial_trace, tensor, trace_distance

# "Generic" angles for structure tests: away from the degenerate sets
# {0, pi/2, pi} where one of the discord directions collapses.
GENERIC_THETA = 0.9
GENERIC_PHI = 0.3

KET_PLUS = states.KET_PLUS
KET_MINUS = states.KET_MINUS


@dataclass(frozen=True)
class ProtocolConfig:
    """Complete specification of one protocol run."""

    n: int
    carriers: DensityMatrix | None = None  # default: classical carrier mixture
    memories: DensityMatrix | None = None  # default: |+>^n
    interactions: tuple[int, ...] | None = None  # default: all pairs
    gate_kind: str = "cz"
    carrier_angles: Mapping[int, tuple[float, float]] = field(default_factory=dict)
    outcome: tuple[int, ...] | str = "zeros"  # bits, "zeros" or "all"
    memory_noise: KrausChannel | None = None

    def resolved(self) -> "ProtocolConfig":
        if self.n < 1:
            raise StateError("protocol needs n >= 1")
        carriers = self.carriers if self.carriers is not None else states.classical_carriers(self.n)
        memories = self.memories if self.memories is not None else states.plus_memories(self.n)
        interactions = (
            tuple(sorted(self.interactions))
            if self.interactions is not None
            else tuple(range(1, self.n + 1))
        )
        if any(i < 1 or i > self.n for i in interactions):
            raise StateError(f"interaction set {interactions} outside 1..{self.n}")
        missing = [i for i in interactions if i not in self.carrier_angles]
        if missing:
            raise StateError(f"no measurement angles for interacting carriers {missing}")
        return replace(
            self,
            carriers=carriers,
            memories=memories,
            interactions=interactions,
        )


@dataclass(frozen=True)
class ProtocolOutcome:
    final_state: DensityMatrix
    probability: float
    retained_labels: tuple[str, ...]
    outcome_bits: tuple[int, ...]


def run_circuit(cfg: ProtocolConfig) -> ProtocolOutcome | list[ProtocolOutcome]:
    """Execute the protocol circuit; returns all branches when outcome='all'."""
    cfg = cfg.resolved()
    joint = tensor([cfg.carriers, cfg.memories])
    if cfg.memory_noise is not None:
        joint = apply_kraus(joint, cfg.memory_noise)
    for i in cfg.interactions:
        joint = apply_gate(joint, GateSpec(kind=cfg.gate_kind, control=f"C{i}", target=f"M{i}"))
    basis = MeasurementBasis({f"C{i}": cfg.carrier_angles[i] for i in cfg.interactions})
    retained = _retained_labels(cfg, joint)

    if cfg.outcome == "all":
        outcomes = []
        for bits, state, prob in measure_all_outcomes(joint, basis):
            if state is None:
                continue
            final = partial_trace(state, retained)
            outcomes.append(ProtocolOutcome(final, prob, tuple(retained), bits))
        return outcomes

    bits = (
        tuple(0 for _ in cfg.interactions)
        if cfg.outcome == "zeros"
        else tuple(int(b) for b in cfg.outcome)
    )
    state, prob = measure_project(joint, basis, bits)
    final = partial_trace(state, retained)
    return ProtocolOutcome(final, prob, tuple(retained), bits)


def _retained_labels(cfg: ProtocolConfig, joint: DensityMatrix) -> list[str]:
    retained = []
    for lab in joint.labels:
        kind, idx = lab[0], int(lab[1:])
        if kind == "M":
            keep = idx in cfg.interactions
        else:  # carrier
            if idx > cfg.n:  # extra carrier with no partner (GHZ variant)
                keep = True
            else:
                keep = idx not in cfg.interactions
        if keep:
            retained.append(lab)
    return retained


def standard_config(
    thetas: Sequence[float],
    phis: Sequence[float] | None = None,
    outcome: tuple[int, ...] | str = "zeros",
    carriers: DensityMatrix | None = None,
    memories: DensityMatrix | None = None,
    memory_noise: KrausChannel | None = None,
    interactions: Sequence[int] | None = None,
) -> ProtocolConfig:
    """All-pairs controlled-Z protocol with per-carrier measurement angles."""
    n = len(thetas)
    phis = list(phis) if phis is not None else [0.0] * n
    angles = {i + 1: (float(thetas[i]), float(phis[i])) for i in range(n)}
    return ProtocolConfig(
        n=n,
        carriers=carriers,
        memories=memories,
        interactions=tuple(interactions) if interactions is not None else None,
        carrier_angles=angles,
        outcome=outcome,
        memory_noise=memory_noise,
    )


def final_state_closed_form(
    theta1: float, theta2: float, phi1: float = 0.0, phi2: float = 0.0
) -> DensityMatrix:
    """Closed-form bipartite memory output for the ideal protocol.

    Product of local |+>/|-> mixtures weighted by cos^2/sin^2 of the half
    measurement angles, plus a coherence block of strength
    (sin theta1 sin theta2)/4 carrying the phase sums/differences.
    """
    c2 = [math.cos(theta1 / 2) ** 2, math.cos(theta2 / 2) ** 2]
    locals_ = [
        c * np.outer(KET_PLUS, KET_PLUS) + (1 - c) * np.outer(KET_MINUS, KET_MINUS)
        for c in c2
    ]
    m = np.kron(locals_[0], locals_[1]).astype(np.complex128)
    alpha = math.sin(theta1) * math.sin(theta2) / 4
    pp = np.kron(KET_PLUS, KET_PLUS)
    pm = np.kron(KET_PLUS, KET_MINUS)
    mp = np.kron(KET_MINUS, KET_PLUS)
    mm = np.kron(KET_MINUS, KET_MINUS)
    phi_plus, phi_minus = phi1 + phi2, phi1 - phi2
    coh = np.exp(1j * phi_plus) * np.outer(pp, mm) + np.exp(1j * phi_minus) * np.outer(pm, mp)
    m = m + alpha * (coh + coh.conj().T)
    return DensityMatrix(("M1", "M2"), m)


def run_b92_variant(phi2: float = 0.0, theta2: float = math.pi / 2):
    """Computational-basis protocol with a controlled-Hadamard on pair 2 only.

    Returns the two outcome branches; both occur with probability 1/2 and
    both project onto the same resource state on (C1, M2).
    """
    carriers = DensityMatrix(
        ("C1", "C2"), np.diag([0.5, 0.0, 0.0, 0.5]).astype(np.complex128)
    )
    cfg = ProtocolConfig(
        n=2,
        carriers=carriers,
        memories=states.zero_memories(2),
        interactions=(2,),
        gate_kind="ch",
        carrier_angles={2: (theta2, phi2)},
        outcome="all",
    )
    return run_circuit(cfg)


def run_single_memory_variant(
    theta2: float, phi2: float = 0.0, outcome: int = 0
) -> ProtocolOutcome:
    """Controlled-Z protocol with one memory: pair 2 interacts, C1 is idle.

    The final compound is (C1, M2).
    """
    cfg = ProtocolConfig(
        n=2,
        memories=states.plus_memories(2),
        interactions=(2,),
        carrier_angles={2: (theta2, phi2)},
        outcome=(outcome,),
    )
    return run_circuit(cfg)


def run_ghz_variant(
    theta1: float, theta2: float, phi1: float = 0.0, phi2: float = 0.0
) -> ProtocolOutcome:
    """Three GHZ carriers, two memories; C3 never interacts and is retained."""
    cfg = ProtocolConfig(
        n=2,
        carriers=states.ghz3_carriers(),
        memories=states.plus_memories(2),
        interactions=(1, 2),
        carrier_angles={1: (theta1, phi1), 2: (theta2, phi2)},
        outcome="zeros",
    )
    return run_circuit(cfg)


# --------------------------------------------------------------------------
# Effective memory channel analyses
# --------------------------------------------------------------------------

ChannelBuilder = Callable[[DensityMatrix], DensityMatrix]


def effective_memory_channel(
    thetas: Sequence[float],
    phis: Sequence[float] | None = None,
    carriers: DensityMatrix | None = None,
    outcome: tuple[int, ...] | str = "zeros",
) -> ChannelBuilder:
    """Post-selected map from an initial memory state to the final memory state."""

    def channel(memories: DensityMatrix) -> DensityMatrix:
        cfg = standard_config(thetas, phis, outcome=outcome, carriers=carriers, memories=memories)
        return run_circuit(cfg).final_state

    return channel


def _classical_product_inputs() -> list[DensityMatrix]:
    inputs = []
    for s1 in (KET_PLUS, KET_MINUS):
        for s2 in (KET_PLUS, KET_MINUS):
            v = np.kron(s1, s2)
            inputs.append(DensityMatrix(("M1", "M2"), np.outer(v, v.conj())))
    return inputs


def classify_semiclassical(
    channel: ChannelBuilder, off_diag_tol: float = 1e-9
) -> bool:
    """True iff every classical product input maps to a state diagonal in the
    product |+>/|-> basis."""
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
    to_x = np.kron(h, h)
    for rho_in in _classical_product_inputs():
        out = channel(rho_in)
        in_x = to_x.conj().T @ out.matrix @ to_x
        off = in_x - np.diag(np.diag(in_x))
        if float(np.max(np.abs(off))) > off_diag_tol:
            return False
    return True


def classify_unital(channel: ChannelBuilder, tol: float = 1e-9) -> bool:
    """True iff the channel fixes the maximally mixed memory state."""
    mixed = states.maximally_mixed(("M1", "M2"))
    out = channel(mixed)
    return float(np.max(np.abs(out.matrix - mixed.matrix))) <= tol


def unital_closed_form(
    theta1: float, theta2: float, phi1: float = 0.0, phi2: float = 0.0
) -> DensityMatrix:
    """Output of the protocol on maximally mixed memories.

    I/4 plus a Z(x)Z correction whose weight is the product of sin(theta_i)
    cos(phi_i); the channel is unital exactly when that weight vanishes.
    """
    k = (
        math.sin(theta1) * math.cos(phi1) * math.sin(theta2) * math.cos(phi2)
    )
    z = np.diag([1.0, -1.0])
    m = np.eye(4) / 4 + 0.25 * k * np.kron(z, z)
    return DensityMatrix(("M1", "M2"), m.astype(np.complex128))


@dataclass(frozen=True)
class FactorizabilityReport:
    joint_output: DensityMatrix
    product_of_marginals: DensityMatrix
    trace_distance: float

    @property
    def factorizable(self) -> bool:
        return self.trace_distance <= 1e-9


def effective_channel_nonfactorizability_check(
    thetas: Sequence[float] = (0.9458, 0.9458),
    phis: Sequence[float] = (0.0, 0.0),
    carriers: DensityMatrix | None = None,
    memory_input: DensityMatrix | None = None,
) -> FactorizabilityReport:
    """Compare the joint memory map against the product of its marginal maps.

    The marginal map for M_i feeds the other memory with its reference |+>
    state and traces it out of the result.
    """
    channel = effective_memory_channel(thetas, phis, carriers=carriers)
    mem = memory_input if memory_input is not None else states.plus_memories(2)
    joint_out = channel(mem)

    marg_out = []
    for i, other in ((1, 2), (2, 1)):
        marg_in = partial_trace(mem, [f"M{i}"])
        plus = DensityMatrix((f"M{other}",), np.outer(KET_PLUS, KET_PLUS).astype(np.complex128))
        ordered = [marg_in, plus] if i < other else [plus, marg_in]
        out = channel(DensityMatrix(("M1", "M2"), tensor(ordered).matrix))
        marg_out.append(partial_trace(out, [f"M{i}"]))
    product = tensor(marg_out)
    return FactorizabilityReport(
        joint_output=joint_out,
        product_of_marginals=product,
        trace_distance=trace_distance(joint_out, product),
    )
