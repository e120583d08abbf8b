"""Dense least squares on top of a column-pivoted QR factorization.

The solver never forms normal equations: conditioning stays at kappa(X)
instead of kappa(X)^2, and the pivoted R factor doubles as a cheap,
deterministic rank detector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EmptyMatrix, LengthMismatch, NonFinite, RankDeficient

# Relative threshold on the pivoted R diagonal used for rank detection.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class DesignMatrix:
    """Immutable predictor matrix for a single fit.

    Parameters
    ----------
    values : ndarray, shape (n, k)
        One column per term.  Copied to float64 and frozen on construction.
    has_intercept : bool
        True when column 0 is the all-ones intercept column.
    """

    values: np.ndarray
    has_intercept: bool = False

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise EmptyMatrix(f"design matrix must be 2-d and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("design matrix contains NaN or infinite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @classmethod
    def with_intercept(cls, columns: np.ndarray) -> "DesignMatrix":
        """Prepend an intercept column to ``columns`` (shape (n, k))."""
        columns = np.asarray(columns, dtype=np.float64)
        if columns.ndim == 1:
            columns = columns[:, None]
        ones = np.ones((columns.shape[0], 1))
        return cls(np.hstack([ones, columns]), has_intercept=True)

    def predictors(self) -> np.ndarray:
        """The non-intercept columns."""
        return self.values[:, 1:] if self.has_intercept else self.values


@dataclass(frozen=True)
class QRFactorization:
    """Economic column-pivoted QR of a design matrix.

    ``x.values[:, pivot] == q @ r`` up to floating-point roundoff, and
    ``rank`` counts the diagonal entries of R above ``RANK_TOL`` relative to
    the leading one.
    """

    q: np.ndarray
    r: np.ndarray
    pivot: np.ndarray
    rank: int


@dataclass(frozen=True)
class LstSqSolution:
    coefficients: np.ndarray
    rank: int
    residual_sum_squares: float


def qr_factorize(x: DesignMatrix) -> QRFactorization:
    """Column-pivoted economic QR with a relative-diagonal rank estimate."""
    q, r, pivot = scipy.linalg.qr(x.values, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > RANK_TOL * diag[0]))
    return QRFactorization(q=q, r=r, pivot=pivot, rank=rank)


def _check_response(x: DesignMatrix, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise LengthMismatch(f"response must be 1-d, got shape {y.shape}")
    if y.shape[0] != x.n:
        raise LengthMismatch(f"response has {y.shape[0]} rows but the design has {x.n}")
    if not np.all(np.isfinite(y)):
        raise NonFinite("response contains NaN or infinite entries")
    return y


def _solve_from_factorization(fact: QRFactorization, x: DesignMatrix, y: np.ndarray) -> LstSqSolution:
    """Back-substitute a full-rank factorization; caller has checked the rank."""
    k = x.k
    rhs = fact.q.T @ y
    beta_pivoted = scipy.linalg.solve_triangular(fact.r[:k, :k], rhs[:k])
    coefficients = np.empty(k)
    coefficients[fact.pivot] = beta_pivoted
    residual = y - x.values @ coefficients
    return LstSqSolution(
        coefficients=coefficients,
        rank=fact.rank,
        residual_sum_squares=float(residual @ residual),
    )


def solve_least_squares(x: DesignMatrix, y: np.ndarray) -> LstSqSolution:
    """Minimize ||y - X b||_2 for a full-column-rank design.

    Parameters
    ----------
    x : DesignMatrix
        Design with n >= k.
    y : ndarray, shape (n,)
        Response vector.

    Returns
    -------
    LstSqSolution
        Coefficients in original column order, the detected rank, and the
        residual sum of squares computed from the explicit residual vector.

    Raises
    ------
    RankDeficient
        If the detected rank is below the column count.  A duplicated column
        is reported as an error, never silently resolved.
    NonFinite
        If the design or response contains NaN/inf.
    """
    y = _check_response(x, y)
    fact = qr_factorize(x)
    if fact.rank < x.k:
        raise RankDeficient(fact.rank)
    return _solve_from_factorization(fact, x, y)
