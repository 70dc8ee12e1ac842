"""Correlation quantifiers: von Neumann entropy, mutual information,
asymmetric quantum discord, relative entropy and global quantum discord
(GQD), each with its internal minimization over local projective bases.

The basis searches are grid + multistart Nelder-Mead.  Objective evaluation
is vectorized over batches of candidate bases, which is what makes the
nested protocol optimizations elsewhere in the package tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import EIGENVALUE_FLOOR
from .states import DensityMatrix, StateError, partial_trace

# Correlation values in (-NEGATIVE_CLAMP, 0) are reported as exactly 0.
NEGATIVE_CLAMP = 1e-9

_CHUNK = 16384


def _shannon(p: np.ndarray, axis: int = -1) -> np.ndarray:
    """Shannon entropy in bits along an axis; entries below the floor count 0."""
    p = np.clip(np.real(p), 0.0, None)
    safe = np.where(p > EIGENVALUE_FLOOR, p, 1.0)
    return -np.sum(np.where(p > EIGENVALUE_FLOOR, p * np.log2(safe), 0.0), axis=axis)


def entropy(rho: DensityMatrix) -> float:
    """von Neumann entropy S(rho) in bits."""
    return float(_shannon(np.linalg.eigvalsh(rho.matrix)))


def mutual_information(rho: DensityMatrix, part_a: Sequence[str]) -> float:
    """S(A) + S(B) - S(AB) for the bipartition part_a : rest."""
    part_a = tuple(part_a)
    part_b = tuple(lab for lab in rho.labels if lab not in part_a)
    if not part_a or not part_b or set(part_a) - set(rho.labels):
        raise StateError(f"invalid bipartition {part_a} of {rho.labels}")
    s_a = entropy(partial_trace(rho, part_a))
    s_b = entropy(partial_trace(rho, part_b))
    return s_a + s_b - entropy(rho)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """tr rho (log2 rho - log2 sigma); +inf when supp(rho) leaves supp(sigma)."""
    if rho.matrix.shape != sigma.matrix.shape:
        raise StateError("relative entropy of states with different dimensions")
    w, u = np.linalg.eigh(sigma.matrix)
    rho_tilde = u.conj().T @ rho.matrix @ u
    diag = np.clip(np.real(np.diag(rho_tilde)), 0.0, None)
    outside = float(np.sum(diag[w < EIGENVALUE_FLOOR]))
    if outside > NEGATIVE_CLAMP:
        return math.inf
    support = w >= EIGENVALUE_FLOOR
    cross = -float(np.sum(diag[support] * np.log2(w[support])))
    value = cross - entropy(rho)
    return max(value, 0.0)


# --------------------------------------------------------------------------
# Measurement-basis machinery (vectorized over batches of candidate bases)
# --------------------------------------------------------------------------


def _basis_columns(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Orthonormal pairs for angle arrays; output shape (..., 2 outcomes, 2)."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    c, s = np.cos(thetas / 2), np.sin(thetas / 2)
    e = np.exp(1j * phis)
    out = np.empty(thetas.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = e * s
    out[..., 1, 0] = s
    out[..., 1, 1] = -e * c
    return out


def _product_basis(cols: np.ndarray) -> np.ndarray:
    """Expand per-qubit bases (B, N, 2, 2) into product vectors (B, 2^N, 2^N)."""
    b, n = cols.shape[:2]
    v = cols[:, 0]
    for j in range(1, n):
        k = v.shape[1]
        v = np.einsum("bkx,bly->bklxy", v, cols[:, j]).reshape(b, 2 * k, 2 * k)
    return v


def pinch(rho: DensityMatrix, basis_angles: Mapping[str, tuple[float, float]]) -> DensityMatrix:
    """Dephase rho in the product basis given by per-label Bloch angles."""
    thetas, phis = _angles_for(rho, basis_angles)
    cols = _basis_columns(thetas[None, :], phis[None, :])
    v = _product_basis(cols)[0]  # rows = product basis vectors
    w = v.T  # columns = basis vectors
    probs = np.real(np.diag(w.conj().T @ rho.matrix @ w))
    return DensityMatrix(rho.labels, (w * probs) @ w.conj().T)


def _angles_for(
    rho: DensityMatrix, basis_angles: Mapping[str, tuple[float, float]]
) -> tuple[np.ndarray, np.ndarray]:
    if set(basis_angles) != set(rho.labels):
        raise StateError(
            f"basis angles {sorted(basis_angles)} do not cover labels {rho.labels}"
        )
    thetas = np.array([basis_angles[lab][0] for lab in rho.labels])
    phis = np.array([basis_angles[lab][1] for lab in rho.labels])
    return thetas, phis


class _GqdObjective:
    """Precomputed pieces of the GQD objective for one state."""

    def __init__(self, rho: DensityMatrix):
        self.rho = rho
        self.n = rho.n_qubits
        self.s_total = entropy(rho)
        margs = [partial_trace(rho, [lab]).matrix for lab in rho.labels]
        self.margs = np.stack(margs)
        self.s_margs = np.array([_shannon(np.linalg.eigvalsh(m)) for m in margs])
        self.evaluations = 0

    def batch(self, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
        """Objective for angle arrays of shape (B, N)."""
        thetas = np.atleast_2d(thetas)
        phis = np.atleast_2d(phis)
        self.evaluations += thetas.shape[0]
        cols = _basis_columns(thetas, phis)
        psi = cols[:, :, 0, :]  # (B, N, 2)
        p0 = np.real(np.einsum("bjx,jxy,bjy->bj", psi.conj(), self.margs, psi))
        p0 = np.clip(p0, 0.0, 1.0)
        h_marg = _shannon(np.stack([p0, 1.0 - p0], axis=-1), axis=-1)  # (B, N)
        v = _product_basis(cols)
        probs = np.real(np.einsum("bka,ac,bkc->bk", v.conj(), self.rho.matrix, v))
        h_joint = _shannon(probs, axis=1)
        return (h_joint - self.s_total) - np.sum(h_marg - self.s_margs[None, :], axis=1)

    def point(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.batch(x[: self.n][None, :], x[self.n :][None, :])[0])


@dataclass(frozen=True)
class DiscordResult:
    """Optimized correlation value with the basis that attains it."""

    value: float
    basis: dict[str, tuple[float, float]]
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class Budget:
    """Search effort knobs for the internal basis minimizations."""

    grid_per_axis: int  # theta x phi points per qubit on the joint grid
    joint_grid_max_qubits: int  # joint tensor grid only up to this many qubits
    sym_grid: int  # theta x phi points for the symmetric (tied-basis) grid
    nm_starts: int  # refinements launched from the best grid points
    random_starts: int  # extra seeded random restarts
    xatol: float = 1e-7
    fatol: float = 1e-10


FULL_BUDGET = Budget(grid_per_axis=25, joint_grid_max_qubits=2, sym_grid=41, nm_starts=5, random_starts=4)
FAST_BUDGET = Budget(grid_per_axis=9, joint_grid_max_qubits=2, sym_grid=21, nm_starts=3, random_starts=2)
FULL3_GRID = 9  # per-qubit grid resolution used for 3-qubit joint grids at full budget

_BUDGETS = {"full": FULL_BUDGET, "fast": FAST_BUDGET}


def _resolve_budget(budget: str | Budget) -> Budget:
    if isinstance(budget, Budget):
        return budget
    try:
        return _BUDGETS[budget]
    except KeyError:
        raise ValueError(f"unknown budget {budget!r}; use 'full' or 'fast'") from None


def _normalize_angles(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Fold free-running optimizer angles back into theta in [0,pi], phi in [0,2pi)."""
    thetas = np.mod(x[:n], 2 * math.pi)
    phis = np.mod(x[n:], 2 * math.pi)
    flip = thetas > math.pi
    thetas = np.where(flip, 2 * math.pi - thetas, thetas)
    phis = np.mod(np.where(flip, phis + math.pi, phis), 2 * math.pi)
    return thetas, phis


def _refine(objective_point, x0: np.ndarray, budget: Budget):
    res = minimize(
        objective_point,
        x0,
        method="Nelder-Mead",
        options={
            "xatol": budget.xatol,
            "fatol": budget.fatol,
            "maxiter": 400 * len(x0),
            "maxfev": 400 * len(x0),
        },
    )
    return res


def _theta_grid(g: int) -> np.ndarray:
    return np.linspace(0.0, math.pi, g)


def _phi_grid(g: int) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, g, endpoint=False)


def _joint_grid(n: int, g: int) -> np.ndarray:
    """All per-qubit (theta, phi) combinations; shape (g^2n... , 2n)."""
    axes = []
    for _ in range(n):
        axes.append(_theta_grid(g))
    for _ in range(n):
        axes.append(_phi_grid(g))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _grid_minimum(obj: _GqdObjective, points: np.ndarray, n: int, top: int):
    """Evaluate a point matrix (rows = [thetas..., phis...]) in chunks."""
    best_vals = None
    best_pts = None
    for start in range(0, points.shape[0], _CHUNK):
        block = points[start : start + _CHUNK]
        vals = obj.batch(block[:, :n], block[:, n:])
        order = np.argsort(vals)[:top]
        if best_vals is None:
            best_vals, best_pts = vals[order], block[order]
        else:
            vals = np.concatenate([best_vals, vals[order]])
            pts = np.concatenate([best_pts, block[order]])
            order = np.argsort(vals)[:top]
            best_vals, best_pts = vals[order], pts[order]
    return best_vals, best_pts


def gqd(
    rho: DensityMatrix,
    basis_angles: Mapping[str, tuple[float, float]],
    method: str = "pinched",
) -> float:
    """GQD integrand at fixed local bases (no minimization).

    ``pinched`` uses S(Phi(rho)) - S(rho) per subsystem/total; ``direct``
    evaluates the defining relative entropies and exists as a cross-check.
    """
    if method == "pinched":
        obj = _GqdObjective(rho)
        thetas, phis = _angles_for(rho, basis_angles)
        return float(obj.batch(thetas[None, :], phis[None, :])[0])
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    total = relative_entropy(rho, pinch(rho, basis_angles))
    for lab in rho.labels:
        marg = partial_trace(rho, [lab])
        total -= relative_entropy(marg, pinch(marg, {lab: basis_angles[lab]}))
    return total


def gqd_min(
    rho: DensityMatrix,
    budget: str | Budget = "full",
    seed: int = 0,
) -> DiscordResult:
    """Global quantum discord: minimize the pinching objective over local bases.

    Strategy: a coarse joint grid for small systems, a symmetric tied-basis
    grid as warm start for larger ones, then multistart Nelder-Mead in the
    full 2N-dimensional angle space.
    """
    b = _resolve_budget(budget)
    n = rho.n_qubits
    if n < 2:
        raise StateError("GQD needs at least two subsystems")
    obj = _GqdObjective(rho)
    rng = np.random.default_rng(seed)

    starts: list[np.ndarray] = []
    # Symmetric grid: same basis on every party.  Cheap, and protocol-family
    # optima are symmetric, so this is an excellent warm start.
    sym = _joint_grid(1, b.sym_grid)
    sym_full = np.concatenate(
        [np.repeat(sym[:, :1], n, axis=1), np.repeat(sym[:, 1:], n, axis=1)], axis=1
    )
    _, sym_best = _grid_minimum(obj, sym_full, n, max(2, b.nm_starts - 1))
    starts.extend(sym_best)

    # Joint tensor grid where the dimension allows it.
    if n <= b.joint_grid_max_qubits:
        pts = _joint_grid(n, b.grid_per_axis)
        _, best = _grid_minimum(obj, pts, n, b.nm_starts)
        starts.extend(best)
    elif n == 3 and b is FULL_BUDGET:
        pts = _joint_grid(n, FULL3_GRID)
        _, best = _grid_minimum(obj, pts, n, b.nm_starts)
        starts.extend(best)

    for _ in range(b.random_starts):
        starts.append(
            np.concatenate([rng.uniform(0, math.pi, n), rng.uniform(0, 2 * math.pi, n)])
        )

    best_val = math.inf
    best_x = starts[0]
    converged = True
    for x0 in starts:
        res = _refine(obj.point, np.asarray(x0, dtype=float), b)
        converged = converged and bool(res.success)
        if res.fun < best_val:
            best_val = float(res.fun)
            best_x = np.asarray(res.x)

    thetas, phis = _normalize_angles(best_x, n)
    basis = {lab: (float(t), float(p)) for lab, t, p in zip(rho.labels, thetas, phis)}
    return DiscordResult(
        value=max(best_val, 0.0),
        basis=basis,
        evaluations=obj.evaluations,
        converged=converged,
    )


# --------------------------------------------------------------------------
# Asymmetric discord
# --------------------------------------------------------------------------


class _DiscordObjective:
    """Conditional-entropy term of the asymmetric discord, measured qubit last."""

    def __init__(self, rho: DensityMatrix, measured: str):
        if measured not in rho.labels:
            raise StateError(f"unknown label {measured!r}")
        ax = rho.axis(measured)
        n = rho.n_qubits
        t = rho.tensor_view()
        t = np.moveaxis(t, (ax, ax + n), (n - 1, 2 * n - 1))
        da = 2 ** (n - 1)
        self.r = t.reshape(da, 2, da, 2)
        self.da = da
        self.evaluations = 0

    def batch(self, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
        thetas = np.atleast_1d(thetas)
        self.evaluations += thetas.shape[0]
        cols = _basis_columns(thetas, np.atleast_1d(phis))  # (B, 2, 2)
        total = np.zeros(thetas.shape[0])
        for outcome in (0, 1):
            v = cols[:, outcome, :]
            m = np.einsum("bx,axcy,by->bac", v.conj(), self.r, v)
            p = np.clip(np.real(np.trace(m, axis1=1, axis2=2)), 0.0, 1.0)
            vals = np.linalg.eigvalsh((m + np.conj(np.swapaxes(m, 1, 2))) / 2)
            # p * S(m/p) = H(eigs) - (-p log2 p): expand to avoid dividing by ~0.
            h_raw = _shannon(vals, axis=1)
            plogp = np.where(p > EIGENVALUE_FLOOR, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
            total += h_raw + plogp
        return total

    def point(self, x: np.ndarray) -> float:
        return float(self.batch(np.array([x[0]]), np.array([x[1]]))[0])


def conditional_entropy_min(
    rho: DensityMatrix, measured: str, budget: str | Budget = "full", seed: int = 0
) -> tuple[float, tuple[float, float], int, bool]:
    """min over rank-1 projective bases on ``measured`` of sum_j p_j S(rho_j)."""
    b = _resolve_budget(budget)
    obj = _DiscordObjective(rho, measured)
    rng = np.random.default_rng(seed)
    g = max(b.grid_per_axis, 13)
    tgrid, pgrid = np.meshgrid(_theta_grid(g), _phi_grid(g), indexing="ij")
    vals = obj.batch(tgrid.ravel(), pgrid.ravel())
    order = np.argsort(vals)[: b.nm_starts]
    starts = [np.array([tgrid.ravel()[i], pgrid.ravel()[i]]) for i in order]
    for _ in range(b.random_starts):
        starts.append(np.array([rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)]))
    best_val, best_x, ok = math.inf, starts[0], True
    for x0 in starts:
        res = _refine(obj.point, x0, b)
        ok = ok and bool(res.success)
        if res.fun < best_val:
            best_val, best_x = float(res.fun), np.asarray(res.x)
    thetas, phis = _normalize_angles(np.array([best_x[0], best_x[1]]), 1)
    return best_val, (float(thetas[0]), float(phis[0])), obj.evaluations, ok


def discord_asym(
    rho: DensityMatrix,
    unmeasured: str | Sequence[str],
    measured: str,
    budget: str | Budget = "full",
    seed: int = 0,
) -> DiscordResult:
    """Quantum discord D_{A|B}: conditioning by projective measurement on B.

    ``measured`` must be a single qubit; ``unmeasured`` may be one label or a
    list covering the rest of the state.
    """
    a_labels = (unmeasured,) if isinstance(unmeasured, str) else tuple(unmeasured)
    expected = set(a_labels) | {measured}
    if expected != set(rho.labels) or measured in a_labels:
        raise StateError(
            f"partition ({a_labels}, {measured}) does not cover labels {rho.labels}"
        )
    s_b = entropy(partial_trace(rho, [measured]))
    s_ab = entropy(rho)
    cond, angles, evals, ok = conditional_entropy_min(rho, measured, budget, seed)
    value = max(s_b - s_ab + cond, 0.0)
    return DiscordResult(
        value=value,
        basis={measured: angles},
        evaluations=evals,
        converged=ok,
    )
