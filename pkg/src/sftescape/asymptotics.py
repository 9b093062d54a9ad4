"""Exact mu(Delta_n), the scaled sequence, and residue-class limit checks.

``mu(Delta_n) = int L_Delta^n(1) dmu`` is computed by iterating the
restricted operator; the predicted limits come from the subsystem data.
The two routes share no code beyond the transfer matrix itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from .subsystem import SubsystemAnalysis
from .transfer import GibbsMeasure


def _scaled_iterates(analysis: SubsystemAnalysis, psi: np.ndarray, n_max: int):
    """Yield ``e^{-n P_Delta} L_Delta^n psi`` for n = 0..n_max."""
    action = analysis.restricted.matrix.T * math.exp(-analysis.p_delta)
    x = np.asarray(psi, float)
    yield x
    for _ in range(n_max):
        x = action @ x
        yield x


def mu_delta_n(analysis: SubsystemAnalysis, measure: GibbsMeasure, n: int) -> float:
    """Measure of the set of points whose first n symbols lie in Delta."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.ones(len(analysis.transfer.states))
    for _ in range(n):
        x = analysis.restricted.apply(x)
    return float(x @ measure.state_measures)


def residue_limits(analysis: SubsystemAnalysis) -> np.ndarray:
    """Predicted limit of the scaled sequence along each residue class k mod m."""
    m = analysis.m
    ints = analysis.h_integrals
    return np.array([
        sum(analysis.alpha[j, k] * ints[(j + k) % m] for j in range(m)) for k in range(m)
    ])


def classify_spread(spread: float) -> str:
    if spread > config.NONCONVERGENCE_THRESHOLD:
        return "non-convergent"
    if spread > config.INDETERMINATE_THRESHOLD:
        return "indeterminate"
    return "convergent"


@dataclass(frozen=True)
class AsymptoticsReport:
    n: np.ndarray
    log_mu: np.ndarray
    scaled: np.ndarray
    residue: np.ndarray
    predicted: np.ndarray
    abs_error: np.ndarray
    residue_limits: np.ndarray
    spread: float
    converges_overall: bool
    verdict: str

    @property
    def mu(self) -> np.ndarray:
        return np.exp(self.log_mu)

    def residue_errors(self, k: int) -> np.ndarray:
        return self.abs_error[self.residue == k]

    def rows(self):
        for i in range(len(self.n)):
            yield (int(self.n[i]), float(self.mu[i]), float(self.scaled[i]), int(self.residue[i]),
                   float(self.predicted[i]), float(self.abs_error[i]))


def report(
    analysis: SubsystemAnalysis,
    measure: GibbsMeasure | None = None,
    n_max: int = 40,
    tol: float = config.INDETERMINATE_THRESHOLD,
) -> AsymptoticsReport:
    """Scaled sequence for n = 0..n_max against the per-residue predicted limits.

    ``converges_overall`` is ``spread <= tol`` where spread is the range of
    the residue-class limits.
    """
    m = analysis.m
    if n_max < m:
        raise ValueError(f"n_max={n_max} is smaller than the period m={m}")
    measure = measure or analysis.measure
    weights = measure.state_measures
    ones = np.ones(len(analysis.transfer.states))
    scaled = np.array([x @ weights for x in _scaled_iterates(analysis, ones, n_max)])
    n = np.arange(n_max + 1)
    with np.errstate(divide="ignore"):
        log_mu = np.log(scaled) + n * analysis.p_delta
    limits = residue_limits(analysis)
    residue = n % m
    predicted = limits[residue]
    spread = float(limits.max() - limits.min())
    return AsymptoticsReport(
        n=n,
        log_mu=log_mu,
        scaled=scaled,
        residue=residue,
        predicted=predicted,
        abs_error=np.abs(scaled - predicted),
        residue_limits=limits,
        spread=spread,
        converges_overall=spread <= tol,
        verdict=classify_spread(spread),
    )


def theorem_gap(analysis: SubsystemAnalysis, psi, n: int) -> float:
    """Sup-norm distance between e^{-nP} L_Delta^n psi and its periodic asymptotic form."""
    m = analysis.m
    psi = np.asarray(psi, float)
    x = psi
    action = analysis.restricted.matrix.T * math.exp(-analysis.p_delta)
    for _ in range(n):
        x = action @ x
    k = n % m
    target = sum(
        analysis.alpha[j, k] * analysis.h[(j + k) % m] * (analysis.nu_marginals[j] @ psi)
        for j in range(m)
    )
    return float(np.abs(x - target).max())


def theorem_gaps(analysis: SubsystemAnalysis, psi, n_max: int) -> np.ndarray:
    """theorem_gap for n = 0..n_max in one sweep."""
    m = analysis.m
    psi = np.asarray(psi, float)
    coeffs = analysis.nu_marginals @ psi
    targets = [
        sum(analysis.alpha[j, k] * analysis.h[(j + k) % m] * coeffs[j] for j in range(m))
        for k in range(m)
    ]
    return np.array([
        np.abs(x - targets[n % m]).max()
        for n, x in enumerate(_scaled_iterates(analysis, psi, n_max))
    ])
