"""The Delta-restricted transfer operator and the periodic subsystem data.

For an irreducible sub-alphabet Delta of period m this computes P_Delta,
the eigenfunctions h_0..h_{m-1} of the restricted operator on the whole
space, the measures nu_j on the block-recoded components, the coupling
constants d_j (``L_Delta h_j = d_j h_{j+1}``) and the residue weights
alpha_j(k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import config
from .errors import ConvergenceError, PreconditionError
from .sft import (
    BlockModel,
    CyclicDecomposition,
    SftModel,
    block_recode,
    is_irreducible,
    period,
    require_primitive,
    restrict,
    submodel,
)
from .transfer import (
    CylindricalPotential,
    GibbsMeasure,
    PerronData,
    TransferMatrix,
    block_potential,
    build_transfer,
    check_normalized,
    conformal_measure,
    equilibrium,
    perron,
)


@dataclass(frozen=True, eq=False)
class RestrictedTransfer:
    """``L_Delta psi = L(psi * chi_Delta)`` where chi_Delta tests the first symbol.

    ``matrix`` is W with the rows of states whose first symbol lies outside
    Delta set to zero; the operator acts by its transpose.
    """

    transfer: TransferMatrix
    delta: tuple[int, ...]
    mask: np.ndarray
    matrix: np.ndarray

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix.T @ psi

    def power_apply(self, psi: np.ndarray, n: int, scale: float = 1.0) -> np.ndarray:
        x = np.asarray(psi, float)
        action = self.matrix.T * scale
        for _ in range(n):
            x = action @ x
        return x


def restricted_transfer(transfer: TransferMatrix, delta: Iterable[int]) -> RestrictedTransfer:
    delta = tuple(sorted(set(int(s) for s in delta)))
    mask = np.isin(transfer.first_symbols(), delta)
    matrix = transfer.weights * mask[:, None]
    matrix.setflags(write=False)
    return RestrictedTransfer(transfer, delta, mask, matrix)


@dataclass(frozen=True)
class ZSupport:
    """Z_{Delta_j}: symbols with a predecessor in Delta_{j-1}; ``union`` is Z_Delta."""

    classes: tuple[np.ndarray, ...]
    union: np.ndarray

    def on_states(self, states: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
        first = np.array([u[0] for u in states])
        per_class = np.array([c[first] for c in self.classes])
        return per_class, self.union[first]


def _delta_classes(model: SftModel, delta: Iterable, root=None):
    sub = restrict(model, delta)
    if not is_irreducible(sub.matrix):
        raise PreconditionError(
            f"A_Delta on {list(sub.symbols)} is reducible; only irreducible subsystems are supported"
        )
    local_root = None if root is None else sub.index(root)
    decomposition = period(sub, local_root)
    symbol_class = np.full(model.size, -1)
    for i, label in enumerate(sub.symbols):
        symbol_class[model.index(label)] = decomposition.class_of[i]
    return sub, decomposition, symbol_class


def _z_from_classes(model: SftModel, symbol_class: np.ndarray, m: int) -> ZSupport:
    classes = []
    for j in range(m):
        prev = symbol_class == (j - 1) % m
        classes.append(model.matrix[prev].any(axis=0))
    return ZSupport(tuple(classes), np.logical_or.reduce(classes))


def z_support(model: SftModel, delta: Iterable, root=None) -> ZSupport:
    _, decomposition, symbol_class = _delta_classes(model, delta, root)
    return _z_from_classes(model, symbol_class, decomposition.period)


@dataclass(frozen=True, eq=False)
class BlockComponent:
    """The aperiodic component Delta^(m)_j of the m-block model."""

    members: tuple[int, ...]
    model: SftModel
    transfer: TransferMatrix
    perron: PerronData


@dataclass(frozen=True, eq=False)
class SubsystemAnalysis:
    model: SftModel
    potential: CylindricalPotential
    transfer: TransferMatrix
    measure: GibbsMeasure
    delta: tuple[int, ...]
    decomposition: CyclicDecomposition
    symbol_class: np.ndarray
    restricted: RestrictedTransfer
    delta_transfer: TransferMatrix
    delta_perron: PerronData
    p_delta: float
    h: np.ndarray
    d: np.ndarray
    alpha: np.ndarray
    block: BlockModel
    block_potential: CylindricalPotential
    components: tuple[BlockComponent, ...]
    nu: tuple[GibbsMeasure, ...]
    nu_marginals: np.ndarray
    z: ZSupport
    h_iterations: tuple[int, ...] = field(default=())

    @property
    def m(self) -> int:
        return self.decomposition.period

    @property
    def h_delta(self) -> np.ndarray:
        return self.h.sum(axis=0)

    @cached_property
    def z_masks(self) -> np.ndarray:
        return self.z.on_states(self.transfer.states)[0]

    @cached_property
    def z_union(self) -> np.ndarray:
        return self.z.on_states(self.transfer.states)[1]

    @cached_property
    def h_integrals(self) -> np.ndarray:
        return self.h @ self.measure.state_measures

    @property
    def py_mass(self) -> float:
        return float(self.h_delta @ self.measure.state_measures)

    def classes_labels(self) -> list[list[str]]:
        return [[self.model.symbols[i] for i in range(self.model.size) if self.symbol_class[i] == j]
                for j in range(self.m)]

    def w_classes(self) -> np.ndarray:
        """w_j from the Perron data of phi_Delta, placed on the full state space."""
        pd = self.delta_perron
        sub = self.delta_transfer.model
        to_full = [self.model.index(s) for s in sub.symbols]
        out = np.zeros_like(self.h)
        state_class = np.array([self.symbol_class[to_full[u[0]]] for u in self.delta_transfer.states])
        for j in range(self.m):
            sel = state_class == j
            scale = pd.right[sel].sum() / (pd.left[sel] @ pd.right[sel])
            for i in np.flatnonzero(sel):
                full = tuple(to_full[s] for s in self.delta_transfer.states[i])
                out[j, self.transfer.index[full]] = pd.left[i] * scale
        return out

    def invariants(self) -> dict[str, float]:
        """Residuals of the structural identities (all should be ~0)."""
        m = self.m
        h = self.h
        coupling = max(
            np.abs(self.restricted.apply(h[j]) - self.d[j] * h[(j + 1) % m]).max() for j in range(m)
        )
        product = abs(math.exp(np.log(self.d).sum() - m * self.p_delta) - 1.0)
        alpha_zero = float(np.abs(self.alpha[:, 0] - 1.0).max())
        support = int(np.sum((h > 0) != self.z_masks))
        delta_states = np.array([all(self.symbol_class[s] >= 0 for s in u) for u in self.transfer.states])
        w = self.w_classes()
        w_match = float(np.abs(h[:, delta_states] - w[:, delta_states]).max())
        hd = self.h_delta
        eigen_m = float(
            np.abs(self.restricted.power_apply(hd, m, math.exp(-self.p_delta)) - hd).max()
        )
        return {
            "coupling": float(coupling),
            "product": float(product),
            "alpha_zero": alpha_zero,
            "support_mismatches": float(support),
            "w_match": w_match,
            "eigen_m": eigen_m,
        }


def _iterate_to_fixed_point(action: np.ndarray, seed: np.ndarray, tol: float, max_steps: int):
    x = seed
    for step in range(1, max_steps + 1):
        y = action @ x
        if np.abs(y - x).max() <= tol * np.abs(y).max():
            return y, step
        x = y
    raise ConvergenceError(f"eigenfunction iteration did not converge in {max_steps} steps")


def _block_components(model, potential, transfer, symbol_class, m, tol):
    block = block_recode(model, m)
    bpot = block_potential(potential, block)
    components = []
    for j in range(m):
        members = tuple(
            b for b, word in enumerate(block.block_symbols)
            if all(symbol_class[word[s]] == (j + s) % m for s in range(m))
        )
        comp_model = submodel(block.model, members)
        comp_transfer = build_transfer(comp_model, bpot.on_submodel(comp_model))
        components.append(BlockComponent(members, comp_model, comp_transfer, perron(comp_transfer, tol=tol)))
    return block, bpot, tuple(components)


def _marginal_on_states(measure: GibbsMeasure, component: BlockComponent, block: BlockModel,
                        transfer: TransferMatrix) -> np.ndarray:
    k1 = transfer.order - 1
    out = np.zeros(len(transfer.states))
    for i, state in enumerate(measure.transfer.states):
        flat = block.flatten([component.members[b] for b in state])
        out[transfer.index[flat[:k1]]] += measure.state_measures[i]
    return out


def analyze(
    model: SftModel,
    potential: CylindricalPotential,
    delta: Iterable,
    tol: float = config.CHECK_TOL,
    root=None,
    h_tol: float = config.EIGENFUNCTION_TOL,
    max_steps: int = config.EIGENFUNCTION_MAX_STEPS,
    perron_tol: float = config.PERRON_TOL,
) -> SubsystemAnalysis:
    """Full periodic-subsystem analysis for a normalized potential.

    ``delta`` holds symbol labels; ``root`` (a label in Delta) selects the
    symbol placed in cyclic class 0, defaulting to the lowest-index one.
    """
    require_primitive(model)
    transfer = build_transfer(model, potential)
    if not check_normalized(transfer, tol):
        raise PreconditionError("potential is not normalized (L 1 != 1); normalize it first")
    sub, decomposition, symbol_class = _delta_classes(model, delta, root)
    m = decomposition.period
    delta_idx = tuple(int(i) for i in np.flatnonzero(symbol_class >= 0))

    delta_transfer = build_transfer(sub, potential.on_submodel(sub))
    delta_perron = perron(delta_transfer, tol=perron_tol)
    p_delta = delta_perron.log_eigenvalue

    measure = equilibrium(transfer, perron(transfer, tol=perron_tol))
    restricted = restricted_transfer(transfer, delta_idx)

    step = np.linalg.matrix_power(restricted.matrix.T, m) * math.exp(-m * p_delta)
    first = transfer.first_symbols()
    h_rows, steps = [], []
    for j in range(m):
        seed = (symbol_class[first] == j).astype(float)
        hj, n_steps = _iterate_to_fixed_point(step, seed, h_tol, max_steps)
        h_rows.append(hj)
        steps.append(n_steps)
    h = np.array(h_rows)

    block, bpot, components = _block_components(model, potential, transfer, symbol_class, m, perron_tol)
    nu = tuple(conformal_measure(c.transfer, c.perron) for c in components)
    nu_marginals = np.array(
        [_marginal_on_states(nu[j], components[j], block, transfer) for j in range(m)]
    )

    escape_one = restricted.apply(np.ones(len(transfer.states)))
    d = np.array([nu_marginals[(j + 1) % m] @ escape_one for j in range(m)])
    log_d = np.log(d)
    alpha = np.ones((m, m))
    for j in range(m):
        for k in range(1, m):
            alpha[j, k] = math.exp(sum(log_d[(j + s) % m] for s in range(k)) - k * p_delta)

    z = _z_from_classes(model, symbol_class, m)
    if not measure.state_measures[z.on_states(transfer.states)[1]].sum() > 0:
        raise PreconditionError("Z_Delta has zero measure")

    return SubsystemAnalysis(
        model=model,
        potential=potential,
        transfer=transfer,
        measure=measure,
        delta=delta_idx,
        decomposition=decomposition,
        symbol_class=symbol_class,
        restricted=restricted,
        delta_transfer=delta_transfer,
        delta_perron=delta_perron,
        p_delta=p_delta,
        h=h,
        d=d,
        alpha=alpha,
        block=block,
        block_potential=bpot,
        components=components,
        nu=nu,
        nu_marginals=nu_marginals,
        z=z,
        h_iterations=tuple(steps),
    )


def py_measure(analysis: SubsystemAnalysis, measure: GibbsMeasure, word: Sequence[int]) -> float:
    """Pianigiani-Yorke measure of the cylinder C[word]: the integral of h_Delta over it."""
    word = tuple(int(s) for s in word)
    transfer = analysis.transfer
    k1 = transfer.order - 1
    model = analysis.model
    if not all(0 <= s < model.size for s in word) or not model.is_admissible(word):
        return 0.0
    hd = analysis.h_delta
    if len(word) >= k1:
        return float(hd[transfer.state_of(word)] * measure.measure(word))
    return float(sum(
        hd[i] * measure.state_measures[i]
        for i, u in enumerate(transfer.states)
        if u[: len(word)] == word
    ))


@dataclass(frozen=True)
class BlockEquivalenceReport:
    h_deviation: tuple[float, ...]
    block_iterations: tuple[int, ...]
    coupling_residual: float
    product_residual: float
    block_pressure_deviation: float

    @property
    def max_h_deviation(self) -> float:
        return max(self.h_deviation)

    def passed(self, tol: float) -> bool:
        return max(self.max_h_deviation, self.coupling_residual, self.product_residual,
                   self.block_pressure_deviation) <= tol


def verify_block_equivalence(
    analysis: SubsystemAnalysis,
    tol: float = config.EIGENFUNCTION_TOL,
    max_steps: int = config.EIGENFUNCTION_MAX_STEPS,
) -> BlockEquivalenceReport:
    """Recompute each h_j by iterating L_{Delta^(m)_j} from 1 on the block model.

    Block-state vectors are read back on the original states through the
    block identification and compared against the direct computation.
    """
    m = analysis.m
    block = analysis.block
    bpot = analysis.block_potential
    block_transfer = build_transfer(block.model, bpot)
    k1 = analysis.transfer.order - 1
    to_state = np.array([
        analysis.transfer.index[block.flatten(s)[:k1]] for s in block_transfer.states
    ])
    first_block = block_transfer.first_symbols()
    scale = math.exp(-m * analysis.p_delta)
    deviations, iterations = [], []
    for j, comp in enumerate(analysis.components):
        mask = np.isin(first_block, comp.members)
        action = (block_transfer.weights * mask[:, None]).T * scale
        hb, n_steps = _iterate_to_fixed_point(action, np.ones(len(first_block)), tol, max_steps)
        deviations.append(float(np.abs(hb - analysis.h[j][to_state]).max()))
        iterations.append(n_steps)
    inv = analysis.invariants()
    pressure_dev = max(abs(c.perron.log_eigenvalue - m * analysis.p_delta) for c in analysis.components)
    return BlockEquivalenceReport(
        h_deviation=tuple(deviations),
        block_iterations=tuple(iterations),
        coupling_residual=inv["coupling"],
        product_residual=inv["product"],
        block_pressure_deviation=float(pressure_dev),
    )
