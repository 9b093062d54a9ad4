"""Locally constant potentials and the transfer operator as a finite matrix.

A k-cylindrical potential acts on (k-1)-cylindrical functions, i.e. on
vectors indexed by admissible (k-1)-words ("states").  The weight matrix
``W[u, v] = exp(phi(u + v[-1]))`` for overlapping states, and the operator
acts by the transpose: ``(L psi)(v) = sum_u W[u, v] psi(u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from . import config
from .errors import ConvergenceError, InvalidModelError, PreconditionError
from .sft import BlockModel, SftModel, Word, admissible_words, cyclic_classes, is_irreducible


class CylindricalPotential:
    """Real potential depending on the first ``order`` symbols (log scale).

    ``values`` maps admissible words of length ``order`` (as index tuples)
    to finite reals. A potential depending on one symbol is stored with
    ``order=2``.
    """

    __slots__ = ("model", "order", "values")

    def __init__(self, model: SftModel, order: int, values: Mapping[Sequence[int], float]):
        if order < 2:
            raise InvalidModelError("potential order must be at least 2")
        table: dict[Word, float] = {}
        for word, value in values.items():
            word = tuple(int(s) for s in word)
            if len(word) != order:
                raise InvalidModelError(f"potential word {word} does not have length {order}")
            if not all(0 <= s < model.size for s in word) or not model.is_admissible(word):
                raise InvalidModelError(f"potential word {model.decode(word)} is not admissible")
            value = float(value)
            if not math.isfinite(value):
                raise InvalidModelError(f"potential value for {model.decode(word)} is not finite")
            table[word] = value
        self.model = model
        self.order = order
        self.values = table

    @classmethod
    def from_function(cls, model: SftModel, order: int, fn: Callable[[Word], float]):
        return cls(model, order, {w: fn(w) for w in admissible_words(model, order)})

    @classmethod
    def constant(cls, model: SftModel, c: float = 0.0, order: int = 2):
        return cls.from_function(model, order, lambda w: c)

    def __call__(self, word: Sequence[int]) -> float:
        return self.values[tuple(word)]

    def birkhoff(self, word: Sequence[int]) -> float:
        """Sum of the potential over all full windows of ``word``."""
        k = self.order
        return sum(self.values[tuple(word[t:t + k])] for t in range(len(word) - k + 1))

    def on_submodel(self, sub: SftModel) -> "CylindricalPotential":
        """Restriction to a model whose labels are a subset of ours (phi_Delta)."""
        to_parent = [self.model.index(s) for s in sub.symbols]
        values = {}
        for word in admissible_words(sub, self.order):
            values[word] = self.values[tuple(to_parent[s] for s in word)]
        return CylindricalPotential(sub, self.order, values)

    def __repr__(self):
        return f"CylindricalPotential(order={self.order}, entries={len(self.values)})"


def block_potential(potential: CylindricalPotential, block: BlockModel) -> CylindricalPotential:
    """The Birkhoff sum S_m(phi) as a potential on the m-block model."""
    m = block.block_length
    k = potential.order
    order = max(2, -(-(m + k - 1) // m))

    def value(blocks: Word) -> float:
        flat = block.flatten(blocks)
        return sum(potential.values[flat[t:t + k]] for t in range(m))

    return CylindricalPotential.from_function(block.model, order, value)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    model: SftModel
    potential: CylindricalPotential
    states: tuple[Word, ...]
    weights: np.ndarray
    index: dict

    @property
    def order(self) -> int:
        return self.potential.order

    def state_of(self, word: Sequence[int]) -> int:
        return self.index[tuple(word[: self.order - 1])]

    def first_symbols(self) -> np.ndarray:
        return np.array([u[0] for u in self.states])

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.weights.T @ psi


def build_transfer(model: SftModel, potential: CylindricalPotential) -> TransferMatrix:
    k = potential.order
    if potential.model != model:
        raise InvalidModelError("potential is defined on a different model")
    states = tuple(admissible_words(model, k - 1))
    index = {u: i for i, u in enumerate(states)}
    weights = np.zeros((len(states), len(states)))
    for i, u in enumerate(states):
        for s in np.flatnonzero(model.matrix[u[-1]]):
            word = u + (int(s),)
            try:
                value = potential.values[word]
            except KeyError:
                raise InvalidModelError(
                    f"missing potential value for admissible word {model.decode(word)}"
                ) from None
            weights[i, index[word[1:]]] = math.exp(value)
    weights.setflags(write=False)
    return TransferMatrix(model, potential, states, weights, index)


apply_transfer = TransferMatrix.apply


@dataclass(frozen=True)
class PerronData:
    """Dominant eigenvalue and positive eigenvectors of a weight matrix.

    ``right`` satisfies ``W r = lambda r`` with ``sum(r) == 1``; ``left``
    satisfies ``l W = lambda l`` with ``<l, r> == 1``.
    """

    eigenvalue: float
    log_eigenvalue: float
    right: np.ndarray
    left: np.ndarray
    period: int
    iterations: int
    residual: float


def power_iteration(matrix: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    """Perron vector of a primitive nonnegative matrix, sup-norm normalized.

    Returns ``(x, lam, iterations)`` where ``||M x - lam x||_inf <= tol * lam``.
    Once the tolerance is met the iteration continues down to round-off,
    keeping the best iterate; it stops after a run of steps without
    improvement (the residual need not decrease monotonically when the
    subdominant eigenvalues are complex).
    """
    x = np.ones(matrix.shape[0])
    for it in range(1, max_iter + 1):
        y = matrix @ x
        lam = y.max()
        if not lam > 0:
            raise PreconditionError("matrix has no positive dominant eigenvalue")
        y /= lam
        diff = np.abs(y - x).max()
        if diff <= tol:
            break
        x = y
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    best = (diff, y, lam)
    stale, extra = 0, 0
    while extra < max(it, 50) and stale < 25 and best[0] > 0:
        x = y
        y = matrix @ x
        lam = y.max()
        y /= lam
        diff = np.abs(y - x).max()
        extra += 1
        if diff < best[0]:
            best, stale = (diff, y, lam), 0
        else:
            stale += 1
    _, x, lam = best
    return x, float(lam), it + extra


def _residual(matrix, lam, right, left) -> float:
    r = np.abs(matrix @ right - lam * right).max() / (lam * np.abs(right).max())
    l = np.abs(left @ matrix - lam * left).max() / (lam * np.abs(left).max())
    return float(max(r, l))


def perron(
    transfer: TransferMatrix | np.ndarray,
    tol: float = config.PERRON_TOL,
    max_iter: int = config.PERRON_MAX_ITER,
) -> PerronData:
    """Perron eigendata of an irreducible nonnegative matrix.

    The eigenvalue is the two-sided Rayleigh quotient ``l W r / l r`` of the
    iterated vectors, accurate to roughly the square of the vector error.
    Periodic zero patterns are handled through the m-th power restricted to
    cyclic class 0, which is primitive; the eigenvectors on the other
    classes are recovered by propagating along the cyclic structure.
    """
    w = transfer.weights if isinstance(transfer, TransferMatrix) else np.asarray(transfer, float)
    if np.any(w < 0):
        raise PreconditionError("weight matrix has negative entries")
    adj = w > 0
    if not is_irreducible(adj):
        raise PreconditionError("weight matrix is reducible")
    decomposition = cyclic_classes(adj)
    p = decomposition.period
    if p == 1:
        right, lam, it_r = power_iteration(w, tol, max_iter)
        left, _, it_l = power_iteration(w.T, tol, max_iter)
        lam = float(left @ w @ right / (left @ right))
        log_lam = math.log(lam)
    else:
        c0 = list(decomposition.classes[0])
        block = np.linalg.matrix_power(w, p)[np.ix_(c0, c0)]
        r0, mu, it_r = power_iteration(block, tol, max_iter)
        l0, _, it_l = power_iteration(block.T, tol, max_iter)
        mu = float(l0 @ block @ r0 / (l0 @ r0))
        log_lam = math.log(mu) / p
        lam = math.exp(log_lam)
        classes = [list(c) for c in decomposition.classes]
        right = np.zeros(w.shape[0])
        left = np.zeros(w.shape[0])
        right[c0] = r0
        left[c0] = l0
        for s in range(p - 1, 0, -1):
            nxt = classes[(s + 1) % p]
            right[classes[s]] = w[np.ix_(classes[s], nxt)] @ right[nxt] / lam
        for s in range(0, p - 1):
            left[classes[s + 1]] = left[classes[s]] @ w[np.ix_(classes[s], classes[s + 1])] / lam
    right = right / right.sum()
    left = left / (left @ right)
    if not (np.all(right > 0) and np.all(left > 0)):
        raise ConvergenceError("Perron eigenvectors are not strictly positive")
    return PerronData(
        eigenvalue=lam,
        log_eigenvalue=log_lam,
        right=right,
        left=left,
        period=p,
        iterations=max(it_r, it_l),
        residual=_residual(w, lam, right, left),
    )


def pressure(perron_data: PerronData) -> float:
    return perron_data.log_eigenvalue


def normalize(potential: CylindricalPotential, tol: float = config.PERRON_TOL) -> CylindricalPotential:
    """Cohomologous normalized potential ``phi - P + log w - log w o S``.

    ``w`` is the positive eigenfunction of the transfer operator, which in
    matrix form is the left Perron vector of ``W``.
    """
    transfer = build_transfer(potential.model, potential)
    data = perron(transfer, tol=tol)
    log_w = np.log(data.left)
    index = transfer.index
    values = {
        word: value - data.log_eigenvalue + log_w[index[word[:-1]]] - log_w[index[word[1:]]]
        for word, value in potential.values.items()
    }
    return CylindricalPotential(potential.model, potential.order, values)


def check_normalized(potential: CylindricalPotential | TransferMatrix, tol: float = config.CHECK_TOL) -> bool:
    """True iff ``L 1 = 1`` on every state (all column sums of W within tol of 1)."""
    if isinstance(potential, CylindricalPotential):
        potential = build_transfer(potential.model, potential)
    return bool(np.all(np.abs(potential.weights.sum(axis=0) - 1.0) <= tol))


@dataclass(frozen=True, eq=False)
class GibbsMeasure:
    """Cylinder evaluator built from Perron data.

    With ``conformal=False`` this is the equilibrium state
    ``mu[u_0..u_n] = l_{u_0} W(u_0,u_1)...W(u_{n-1},u_n) r_{u_n} / (lambda^n <l,r>)``.
    With ``conformal=True`` the left vector is replaced by ones, which gives
    the probability eigenmeasure of the dual operator (``L* nu = lambda nu``).
    For a normalized potential the two coincide.
    """

    transfer: TransferMatrix
    perron: PerronData
    conformal: bool = False

    @cached_property
    def _log_left(self) -> np.ndarray:
        if self.conformal:
            return np.zeros(len(self.transfer.states))
        return np.log(self.perron.left)

    @cached_property
    def _log_norm(self) -> float:
        if self.conformal:
            return math.log(self.perron.right.sum())
        return math.log(self.perron.left @ self.perron.right)

    @cached_property
    def state_measures(self) -> np.ndarray:
        """Measure of each state cylinder (sums to 1)."""
        return np.exp(self._log_left + np.log(self.perron.right) - self._log_norm)

    @cached_property
    def edge_measures(self) -> np.ndarray:
        """``E[u, v]`` is the measure of the k-word ``u + v[-1]`` (zero off edges)."""
        left = np.exp(self._log_left)
        w = self.transfer.weights
        return left[:, None] * w * self.perron.right[None, :] / (
            self.perron.eigenvalue * math.exp(self._log_norm)
        )

    def log_measure(self, word: Sequence[int]) -> float:
        word = tuple(int(s) for s in word)
        model = self.transfer.model
        if not all(0 <= s < model.size for s in word) or not model.is_admissible(word):
            return -math.inf
        k1 = self.transfer.order - 1
        n = len(word)
        if n < k1:
            mass = sum(
                self.state_measures[i]
                for i, u in enumerate(self.transfer.states)
                if u[:n] == word
            )
            return math.log(mass) if mass > 0 else -math.inf
        index = self.transfer.index
        w = self.transfer.weights
        states = [index[word[t:t + k1]] for t in range(n - k1 + 1)]
        total = self._log_left[states[0]] + math.log(self.perron.right[states[-1]])
        for a, b in zip(states, states[1:]):
            total += math.log(w[a, b])
        return total - (len(states) - 1) * self.perron.log_eigenvalue - self._log_norm

    def measure(self, word: Sequence[int]) -> float:
        return math.exp(self.log_measure(word))


def equilibrium(transfer: TransferMatrix, perron_data: PerronData | None = None) -> GibbsMeasure:
    return GibbsMeasure(transfer, perron_data or perron(transfer))


def conformal_measure(transfer: TransferMatrix, perron_data: PerronData | None = None) -> GibbsMeasure:
    return GibbsMeasure(transfer, perron_data or perron(transfer), conformal=True)


def integrate(measure: GibbsMeasure, psi) -> float:
    """Integral of a state function (vector over the transfer's states)."""
    return float(np.asarray(psi, float) @ measure.state_measures)


def potential_integral(measure: GibbsMeasure, potential: CylindricalPotential | None = None) -> float:
    """Sum over admissible k-words of ``mu[w] * phi(w)``."""
    transfer = measure.transfer
    potential = potential or transfer.potential
    edges = measure.edge_measures
    total = 0.0
    for i, u in enumerate(transfer.states):
        for j in np.flatnonzero(transfer.weights[i]):
            total += edges[i, j] * potential.values[u + (transfer.states[j][-1],)]
    return total


def entropy(measure: GibbsMeasure, potential: CylindricalPotential | None = None) -> float:
    """Measure-theoretic entropy from ``P = h + int phi``."""
    return pressure(measure.perron) - potential_integral(measure, potential)
