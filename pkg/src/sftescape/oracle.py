"""Brute-force reference computations used to cross-check the matrix routes.

Everything here works word by word from the potential table and the 0/1
matrix; nothing goes through the transfer matrix or its powers.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from . import config
from .sft import SftModel, admissible_words, count_words, submodel
from .transfer import CylindricalPotential, GibbsMeasure


def _delta_model(model: SftModel, delta: Iterable | None) -> tuple[SftModel, list[int]]:
    if delta is None:
        return model, list(range(model.size))
    idx = sorted({model.index(s) for s in delta})
    return submodel(model, idx), idx


def _guarded_words(model: SftModel, n: int, limit: int):
    count = count_words(model, n)
    if count > limit:
        raise ValueError(f"{count} words of length {n} exceed the enumeration limit {limit}")
    return admissible_words(model, n)


def brute_mu_delta_n(model: SftModel, measure: GibbsMeasure, delta: Iterable, n: int,
                     limit: int = config.ENUMERATION_LIMIT) -> float:
    """Sum of cylinder measures over all Delta-admissible words of length n."""
    sub, idx = _delta_model(model, delta)
    return math.fsum(
        measure.measure([idx[s] for s in word]) for word in _guarded_words(sub, n, limit)
    )


def brute_apply(model: SftModel, potential: CylindricalPotential, psi, x_word: Sequence[int]) -> float:
    """(L psi)(x) as a direct sum over the preimages i.x of a point x.

    ``x_word`` is any admissible word of length >= k-1 describing x; ``psi``
    is a callable on words of length k-1 or a mapping from them.
    """
    k = potential.order
    x = tuple(x_word)
    if len(x) < k - 1:
        raise ValueError(f"x_word must have at least {k - 1} symbols")
    value = psi if callable(psi) else (lambda u: psi[tuple(u)])
    total = 0.0
    for i in range(model.size):
        if model.matrix[i, x[0]]:
            y = (i,) + x
            total += math.exp(potential.values[y[:k]]) * value(y[: k - 1])
    return total


def finite_pressure_estimate(model: SftModel, potential: CylindricalPotential, n: int,
                             delta: Iterable | None = None, step: int | None = None,
                             limit: int = config.ENUMERATION_LIMIT) -> float:
    """Pressure estimate from the partition sum Z_n = sum_w exp(S_n phi(w)).

    The sum runs over admissible words carrying n full windows of the
    potential (length n + k - 1), restricted to Delta if given. Without
    ``step`` this returns ``log(Z_n) / n``; with ``step`` it returns the
    ratio estimate ``log(Z_{n+step} / Z_n) / step``, which converges
    geometrically (exactly, for a periodic orbit and step a multiple of the
    period).
    """
    sub, idx = _delta_model(model, delta)
    pot = potential if delta is None else potential.on_submodel(sub)
    k = pot.order

    def log_z(length: int) -> float:
        terms = [pot.birkhoff(w) for w in _guarded_words(sub, length + k - 1, limit)]
        top = max(terms)
        return top + math.log(math.fsum(math.exp(t - top) for t in terms))

    if step is None:
        return log_z(n) / n
    return (log_z(n + step) - log_z(n)) / step


def markov_entropy(measure: GibbsMeasure) -> float:
    """Entropy of the (k-1)-step Markov measure from its k-word and (k-1)-word masses.

    ``h = -sum_w mu[w] log(mu[w] / mu[w without its last symbol])``.
    """
    transfer = measure.transfer
    k = transfer.order
    total = 0.0
    for w in admissible_words(transfer.model, k):
        mass = measure.measure(w)
        if mass > 0:
            total -= mass * math.log(mass / measure.measure(w[:-1]))
    return total


def brute_potential_integral(measure: GibbsMeasure, potential: CylindricalPotential) -> float:
    return math.fsum(
        measure.measure(w) * v for w, v in potential.values.items()
    )


def numpy_perron(matrix: np.ndarray) -> tuple[float, float]:
    """Dominant eigenvalue and second-largest modulus via a dense eigensolver."""
    eig = np.linalg.eigvals(np.asarray(matrix, float))
    mods = np.sort(np.abs(eig))[::-1]
    return float(mods[0]), float(mods[1]) if len(mods) > 1 else 0.0
