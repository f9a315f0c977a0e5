"""Composite error mitigation for measured expectation values.

The stack has a fixed order and each stage consumes the previous one's
output: per-qubit readout correction is applied to every measured
distribution, zero-noise extrapolation fits readout-corrected
expectations across CNOT folding factors, and reference-state rescaling
or reference-state ZNE adjusts only the final converged result.

Readout calibration prepares the all-zeros and all-ones register states
through the noisy device and reads per-qubit marginals, so each qubit
gets an estimated 2x2 confusion matrix.  Correction solves the per-qubit
linear system on the observed distribution by least squares, which may
produce a quasi-distribution (entries outside [0,1]); expectations are
taken directly on it.

ZNE fits f(m) = a * exp(-g m) + c by damped Gauss-Newton on the raw
values (the offset c rules out a log-domain fit), initialized from a
log-linear regression on differences against the largest factor, with g
constrained nonnegative.  If the fit fails to converge the extrapolation
falls back to a linear fit through the two smallest factors and the
result is flagged.
"""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass

import numpy as np

from .circuits import Circuit, x
from .pauli import DenseState, PauliSum
from .simulator import (
    MeasurementGroup,
    NoiseModel,
    ShotResult,
    as_seed_sequence,
    basis_probabilities,
    evolve,
    group_expectation,
    qwc_groups,
    sample_counts,
)

_MIN_CALIBRATION_SHOTS = 1000
_CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class ZneSeries:
    """Expectation values measured at odd CNOT folding factors."""

    factors: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.factors) != len(self.values):
            raise ValueError("factors and values differ in length")
        if any(m < 1 or m % 2 == 0 for m in self.factors):
            raise ValueError("folding factors must be odd and positive")
        if any(b <= a for a, b in zip(self.factors, self.factors[1:])):
            raise ValueError("folding factors must be strictly increasing")
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError("series values must be finite")


@dataclass(frozen=True)
class ZneFit:
    """Fitted decay f(m) = a*exp(-g m) + c with the zero-noise value.

    When fallback is set the fit did not converge; extrapolated comes
    from a linear fit through the two smallest factors and (a, g, c)
    encode only that limit (a = extrapolated, g = c = 0)."""

    a: float
    g: float
    c: float
    rms: float
    extrapolated: float
    fallback: bool = False


@dataclass(frozen=True)
class MitigatedEstimate:
    """Per-stage values for one converged result.  Stages that were not
    requested stay None; flags record any fit fallbacks."""

    raw: float
    readout_corrected: float | None = None
    zne: float | None = None
    rs: float | None = None
    rzne: float | None = None
    uncertainty: float | None = None
    flags: tuple[str, ...] = ()


# -- readout ------------------------------------------------------------------


def calibrate_readout(
    n_qubits: int, noise: NoiseModel, shots: int, seed
) -> tuple[np.ndarray, ...]:
    """Estimate per-qubit confusion matrices by preparing the all-zeros
    and all-ones register states through the noisy device and reading
    per-qubit marginals.  Rows are renormalized counts."""
    if shots < _MIN_CALIBRATION_SHOTS:
        raise ValueError(f"calibration needs at least {_MIN_CALIBRATION_SHOTS} shots")
    z_basis = MeasurementGroup(n_qubits, 0, (1 << n_qubits) - 1, ())
    seeds = as_seed_sequence(seed).spawn(2)
    rows: list[list[np.ndarray]] = [[], []]
    for level, child in zip((0, 1), seeds):
        gates = tuple(x(q) for q in range(n_qubits)) if level else ()
        state = evolve(Circuit(n_qubits=n_qubits, gates=gates), noise)
        result = sample_counts(z_basis, state, shots, noise, child)
        marg = np.zeros((n_qubits, 2))
        for bits, k in result.counts.items():
            for q, ch in enumerate(bits):
                marg[q, int(ch)] += k
        rows[level] = [marg[q] / marg[q].sum() for q in range(n_qubits)]
    mats = []
    for q in range(n_qubits):
        m = np.vstack([rows[0][q], rows[1][q]])
        # det = 1 - p01 - p10 for a confusion matrix; near-zero means the
        # readout carries no state information.  The margin leaves room
        # for sampling noise on a genuinely 50/50 channel.
        if abs(np.linalg.det(m)) < 0.05:
            raise ValueError(f"readout calibration for qubit {q} is degenerate")
        mats.append(m)
    return tuple(mats)


@dataclass(frozen=True)
class ReadoutCorrection:
    """Readout-corrected outcome quasi-distribution (indexed like the
    dense basis) and the worst per-qubit confusion condition number."""

    quasi_probs: np.ndarray
    condition_number: float


def correct_readout(result: ShotResult, calibration) -> ReadoutCorrection:
    """Invert the per-qubit confusion system on an observed distribution
    by least squares.  The output may be a quasi-distribution."""
    n = len(next(iter(result.counts)))
    probs = np.zeros(1 << n)
    for bits, k in result.counts.items():
        probs[int(bits, 2)] = k / result.shots
    return _correct_distribution(probs, n, calibration)


@functools.lru_cache(maxsize=64)
def _inverse_transposes(key: tuple[tuple[float, ...], ...]) -> tuple[np.ndarray, float]:
    """Per-qubit inv(C^T) stacked with the worst condition number, keyed
    by matrix entries so repeated corrections reuse the factorization."""
    mats = [np.array(entries, dtype=float).reshape(2, 2) for entries in key]
    cond = max(float(np.linalg.cond(m)) for m in mats)
    if cond > _CONDITION_LIMIT:
        raise ValueError(f"readout calibration is ill-conditioned ({cond:.3g})")
    inv = np.stack([np.linalg.inv(m.T) for m in mats])
    inv.setflags(write=False)
    return inv, cond


def _correct_distribution(probs: np.ndarray, n: int, calibration) -> ReadoutCorrection:
    mats = list(calibration)
    if len(mats) == 1:
        mats = mats * n
    if len(mats) != n:
        raise ValueError("calibration does not cover the register")
    key = tuple(tuple(np.asarray(m, dtype=float).ravel().tolist()) for m in mats)
    inv, cond = _inverse_transposes(key)
    quasi = probs.reshape((2,) * n)
    for q in range(n):
        # observed = true @ C along this axis, so true = observed @ inv(C^T)^T
        moved = np.moveaxis(quasi, q, -1)
        solved = moved.reshape(-1, 2) @ inv[q].T
        quasi = np.moveaxis(solved.reshape(moved.shape), -1, q)
    return ReadoutCorrection(quasi_probs=quasi.reshape(-1), condition_number=cond)


def readout_corrected_expectation(
    obs: PauliSum,
    state: DenseState,
    noise: NoiseModel,
    calibration,
    shots: int | None = None,
    seed=None,
) -> float:
    """Measured expectation with readout correction applied to every
    qubit-wise commuting group.  shots=None uses the exact confused
    distributions (no sampling noise)."""
    if shots is not None and seed is None:
        raise ValueError("sampling requires a seed")
    groups = qwc_groups(obs)
    acc = obs.coefficient(0, 0).real
    children = (
        as_seed_sequence(seed).spawn(len(groups)) if shots is not None else [None] * len(groups)
    )
    for group, child in zip(groups, children):
        if shots is None:
            probs = basis_probabilities(group, state, noise)
        else:
            res = sample_counts(group, state, shots, noise, child)
            probs = np.zeros(1 << group.n_qubits)
            for bits, k in res.counts.items():
                probs[int(bits, 2)] = k / res.shots
        corrected = _correct_distribution(probs, group.n_qubits, calibration)
        acc += group_expectation(group, corrected.quasi_probs)
    return acc


# -- zero-noise extrapolation --------------------------------------------------


def _loglinear_init(m: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Initial (a, g, c) from regressing log|y_i - y_last| on m_i."""
    diffs = y[:-1] - y[-1]
    keep = np.abs(diffs) > 1e-14
    if keep.sum() < 2:
        return 0.0, 0.0, float(np.mean(y))
    slope, intercept = np.polyfit(m[:-1][keep], np.log(np.abs(diffs[keep])), 1)
    g = max(-float(slope), 1e-9)
    a = float(np.sign(diffs[keep][0]) * np.exp(intercept))
    c = float(y[-1] - a * np.exp(-g * m[-1]))
    return a, g, c


def fit_zne(series: ZneSeries, max_iter: int = 500, step_tol: float = 1e-12) -> ZneFit:
    """Damped Gauss-Newton fit of a*exp(-g m) + c (g >= 0) to the series;
    falls back to linear extrapolation on the two smallest factors when
    the fit does not converge."""
    if len(series.factors) < 3:
        raise ValueError("extrapolation needs at least 3 folding factors")
    m = np.asarray(series.factors, dtype=float)
    y = np.asarray(series.values, dtype=float)

    theta = np.array(_loglinear_init(m, y))
    lam = 1e-3
    converged = False
    for _ in range(max_iter):
        a, g, c = theta
        decay = np.exp(-g * m)
        resid = a * decay + c - y
        jac = np.column_stack([decay, -a * m * decay, np.ones_like(m)])
        grad = jac.T @ resid
        hess = jac.T @ jac
        try:
            step = np.linalg.solve(hess + lam * np.eye(3), -grad)
        except np.linalg.LinAlgError:
            break
        new = theta + step
        new[1] = max(new[1], 0.0)
        a2, g2, c2 = new
        new_resid = a2 * np.exp(-g2 * m) + c2 - y
        if new_resid @ new_resid <= resid @ resid:
            theta, lam = new, max(lam * 0.3, 1e-12)
            if np.linalg.norm(step) < step_tol * (1.0 + np.linalg.norm(theta)):
                converged = True
                break
        else:
            lam *= 5.0
            if lam > 1e12:
                break

    a, g, c = (float(v) for v in theta)
    resid = a * np.exp(-g * m) + c - y
    rms = float(np.sqrt(np.mean(resid**2)))
    if converged and np.isfinite(rms) and np.isfinite(theta).all():
        return ZneFit(a=a, g=g, c=c, rms=rms, extrapolated=a + c)

    slope = (y[1] - y[0]) / (m[1] - m[0])
    intercept = float(y[0] - slope * m[0])
    lin_rms = float(np.sqrt(np.mean((intercept + slope * m[:2] - y[:2]) ** 2)))
    return ZneFit(a=intercept, g=0.0, c=0.0, rms=lin_rms, extrapolated=intercept, fallback=True)


def zne_extrapolate(series: ZneSeries) -> float:
    """Zero-noise value f(0) of the fitted decay."""
    return fit_zne(series).extrapolated


# -- reference-state rescaling -------------------------------------------------


def rs_rescale(noisy_value: float, reference_noisy: float, reference_exact: float) -> float:
    """Divide out the contraction ratio r = reference_noisy /
    reference_exact observed on a reference state."""
    if abs(reference_exact) < 1e-12:
        raise ValueError("exact reference expectation is zero; rescale a surrogate observable")
    r = reference_noisy / reference_exact
    if abs(r) < 1e-12:
        raise ValueError("noisy reference expectation vanished; rescaling is undefined")
    return noisy_value / r


def rzne_combine(
    ref_fit: ZneFit, vqe_fit: ZneFit, reference_exact: float, a_threshold: float = 1e-8
) -> tuple[float, bool]:
    """Reference-corrected zero-noise value: the reference decay places
    the true zero-noise point at r = (reference_exact - c_r)/a_r, and the
    target fit is evaluated there: a_e * r + c_e.

    Returns (value, fell_back); a degenerate reference fit (|a_r| below
    threshold or a fallback fit) yields the plain ZNE value, flagged."""
    if ref_fit.fallback or vqe_fit.fallback or abs(ref_fit.a) < a_threshold:
        return vqe_fit.extrapolated, True
    r = (reference_exact - ref_fit.c) / ref_fit.a
    return vqe_fit.a * r + vqe_fit.c, False


def report_json(
    estimate: MitigatedEstimate,
    vqe_fit: ZneFit | None = None,
    ref_fit: ZneFit | None = None,
    seed=None,
) -> str:
    """Mitigation report: per-stage values, fit parameters, residuals,
    and the sampling seed, as a JSON document."""
    doc = {
        "estimate": asdict(estimate),
        "vqe_fit": asdict(vqe_fit) if vqe_fit is not None else None,
        "reference_fit": asdict(ref_fit) if ref_fit is not None else None,
        "seed": seed,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
