"""Slowness-model estimation from measured propagation times.

Regularized linear inversion: solve

    (A^T A + eta * Sigma^-1) s_hat = A^T t

where A stacks the per-event ray rows, t stacks the measured arrival times,
and Sigma(i, j) = exp(-D_ij / S) is an exponential spatial covariance over
cell-center distances with smoothness length S.  The result is clamped to a
positive floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConfigMismatchError, DegenerateDataError, NumericalFailureError, ParameterError
from .field import FieldConfig, SlownessModel, unflatten
from .raytrace import RayMatrix

# Largest N solved by a direct SPD factorization; larger systems use CG.
_DIRECT_SOLVE_MAX_N = 2500
_CG_TOL = 1e-10
_JITTER = 1e-10

_precision_cache: dict[tuple, np.ndarray] = {}


@dataclass(frozen=True)
class TomoPrior:
    """Regularization weight, spatial smoothness, and output floor."""

    eta: float = 1e-3
    smoothness_km: float = 0.1
    sigma_s: float = 0.05
    clamp_min: float = 0.01

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ParameterError("eta must be positive")
        if self.smoothness_km <= 0:
            raise ParameterError("smoothness length must be positive")
        if self.clamp_min <= 0:
            raise ParameterError("clamp_min must be positive")


def default_prior(
    config: FieldConfig,
    xi: float | None = None,
    mean_time: float | None = None,
    sigma_s: float = 0.05,
) -> TomoPrior:
    """Prior with S = 2 cell widths and eta set from the noise level when known."""
    if xi is not None and mean_time is not None and xi > 0:
        eta = (xi * mean_time / sigma_s) ** 2
    else:
        eta = 1e-3
    return TomoPrior(
        eta=max(eta, 1e-8),
        smoothness_km=2.0 * config.cell_width,
        sigma_s=sigma_s,
    )


@dataclass
class TomoInput:
    """Stacked ray rows and measured times from L events."""

    A: scipy.sparse.csr_matrix  # (L*M, N)
    times: np.ndarray  # (L*M,)
    config: FieldConfig

    def __post_init__(self) -> None:
        if self.A.shape[0] != len(self.times):
            raise ConfigMismatchError("row counts of A and t disagree")
        if self.A.shape[1] != self.config.n_cells:
            raise ConfigMismatchError("A column count does not match the grid")


def stack_events(
    matrices: list[RayMatrix],
    measured_times: list[np.ndarray],
    config: FieldConfig,
) -> TomoInput:
    """Aggregate per-event ray matrices and time measurements."""
    if len(matrices) != len(measured_times) or not matrices:
        raise DegenerateDataError("need matching, non-empty event matrices and times")
    data, indices, indptr = [], [], [0]
    times = []
    for matrix, t in zip(matrices, measured_times):
        t = np.asarray(t, dtype=float)
        if len(t) != matrix.sensor_count:
            raise ConfigMismatchError("time vector length does not match sensor count")
        for row in matrix.rows:
            data.append(row.lengths)
            indices.append(row.cells)
            indptr.append(indptr[-1] + row.cells.size)
        times.append(t)
    A = scipy.sparse.csr_matrix(
        (
            np.concatenate(data) if data else np.empty(0),
            np.concatenate(indices) if indices else np.empty(0, dtype=np.int64),
            np.array(indptr),
        ),
        shape=(indptr.__len__() - 1, config.n_cells),
    )
    return TomoInput(A, np.concatenate(times), config)


def _spatial_precision(config: FieldConfig, smoothness_km: float) -> np.ndarray:
    """Inverse of the exponential covariance over cell centers, cached per grid."""
    key = (
        config.grid_w1,
        config.grid_w2,
        round(config.width_km, 12),
        round(config.height_km, 12),
        round(smoothness_km, 12),
    )
    cached = _precision_cache.get(key)
    if cached is not None:
        return cached
    centers = config.cell_centers()
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    cov = np.exp(-dist / smoothness_km)
    cov[np.diag_indices_from(cov)] += _JITTER
    try:
        factor = scipy.linalg.cho_factor(cov)
        precision = scipy.linalg.cho_solve(factor, np.eye(config.n_cells))
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"spatial covariance not positive definite (S={smoothness_km})"
        ) from exc
    if len(_precision_cache) > 4:
        _precision_cache.clear()
    _precision_cache[key] = precision
    return precision


def estimate_slowness(tomo_input: TomoInput, prior: TomoPrior) -> SlownessModel:
    """Solve the regularized normal equations and clamp to the slowness floor."""
    config = tomo_input.config
    n = config.n_cells
    precision = _spatial_precision(config, prior.smoothness_km)
    lhs = (tomo_input.A.T @ tomo_input.A).toarray() + prior.eta * precision
    rhs = tomo_input.A.T @ tomo_input.times
    if n <= _DIRECT_SOLVE_MAX_N:
        try:
            factor = scipy.linalg.cho_factor(lhs)
            solution = scipy.linalg.cho_solve(factor, rhs)
        except scipy.linalg.LinAlgError as exc:
            raise NumericalFailureError(
                "normal-equation system is singular or indefinite; "
                "eta may be too small for a rank-deficient ray coverage"
            ) from exc
    else:
        solution, info = scipy.sparse.linalg.cg(
            lhs, rhs, rtol=_CG_TOL, atol=0.0, maxiter=10 * n
        )
        if info != 0:
            raise NumericalFailureError(
                f"conjugate gradient did not converge (info={info})"
            )
    return unflatten(np.maximum(solution, prior.clamp_min), config)
