"""Computable bounds on deconvolution error caused by transfer-model mismatch.

The single-location reconstruction error is ``||E a||_2`` with
``E = I - B_tilde^-1 B``.  Because ``E`` is lower triangular, the norm of its
leading ``k`` rows applied to ``a`` is a lower bound on the full error, and
the leading entries of ``E``'s diagonal vector have closed forms in the
dominant transfer coefficients alone.  That gives cheap, data-available lower
bounds (k = 1 uses only ``b_0`` vs ``b~_0``); the spectral norm of ``E`` gives
the matching upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import laguerre, toeplitz
from .deconv import error_operator

__all__ = [
    "BoundReport",
    "dominant_error_coeffs",
    "lower_bound_k1",
    "lower_bound_k2",
    "upper_bound",
    "green_dominant_coeff",
    "compute_bounds",
]


@dataclass(frozen=True)
class BoundReport:
    """Lower/upper error bounds for one instance.

    ``relative`` records whether values are normalized by ``||a||_2``.
    For any single instance ``lower_k1 <= lower_k2 <= upper``.
    """

    lower_k1: float
    lower_k2: float
    upper: float
    relative: bool

    def __post_init__(self):
        for name in ("lower_k1", "lower_k2", "upper"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a nonnegative finite real, got {v!r}")


def dominant_error_coeffs(b0: float, b1: float, b0_tilde: float, b1_tilde: float):
    """Leading diagonal entries ``(e_0, e_1)`` of the error operator.

    Closed forms in the first two transfer coefficients (either Laguerre
    coefficients of the kernels or diagonal entries of the transfer matrices;
    the expressions are identical in both conventions):

        e_0 = 1 - b_0/b~_0
        e_1 = -(1/b~_0) * (b_1 - b~_1 * b_0/b~_0)
    """
    if b0_tilde == 0.0:
        raise ZeroDivisionError("b0_tilde must be nonzero")
    e0 = 1.0 - b0 / b0_tilde
    e1 = -(b1 - b1_tilde * (b0 / b0_tilde)) / b0_tilde
    return e0, e1


def lower_bound_k1(a0: float, b0: float, b0_tilde: float) -> float:
    """k=1 lower bound on the absolute error: ``|a_0| * |1 - b_0/b~_0|``.

    With ``a_0 = 1`` and unit input this is the relative-error bound that
    needs nothing but the two dominant transfer coefficients.
    """
    if b0_tilde == 0.0:
        raise ZeroDivisionError("b0_tilde must be nonzero")
    return abs(a0) * abs(1.0 - b0 / b0_tilde)


def lower_bound_k2(a0: float, a1: float, b0: float, b1: float,
                   b0_tilde: float, b1_tilde: float) -> float:
    """k=2 lower bound: norm of the first two components of ``E a``.

    Dominates the k=1 bound (it adds a nonnegative term) and never exceeds
    the true error (it drops the remaining N-2 components).
    """
    e0, e1 = dominant_error_coeffs(b0, b1, b0_tilde, b1_tilde)
    return float(np.hypot(a0 * e0, a0 * e1 + a1 * e0))


def upper_bound(pairs) -> float:
    """Spectral-norm upper bound on the relative error over M locations.

    ``pairs`` is a list of ``(model, truth)`` LTT pairs.  The stacked-system
    error operator is block diagonal with blocks ``I - model_l^-1 truth_l``,
    so its norm is the max of the per-block spectral norms.
    """
    if not pairs:
        raise ValueError("need at least one (model, truth) pair")
    return max(toeplitz.spectral_norm(error_operator(m, t)) for m, t in pairs)


def green_dominant_coeff(b, scale: float) -> float:
    """Dominant (n=0) Laguerre coefficient of a transfer function at scale T.

    Accepts a sampled :class:`~lagdeconv.laguerre.TimeSeries` or a callable
    and delegates to :func:`lagdeconv.laguerre.expand`; this is the quantity
    the k=1 bound needs from raw simulation output.
    """
    series = laguerre.expand(b, laguerre.LaguerreBasis(n_terms=1, scale=scale))
    return float(series.coeffs[0])


def compute_bounds(a, pairs, relative: bool = True) -> BoundReport:
    """Bundle the k=1/k=2 lower bounds and the spectral upper bound.

    The lower bounds use the first pair's dominant coefficients (diagonal
    entries of the transfer matrices); with several locations the stacked
    lower bound from location 0 remains valid for the averaged estimator
    only in the single-location case, so for M > 1 callers typically read
    just ``upper``.  Set ``relative=False`` for bounds on ``||a - a_hat||``
    instead of the ``||a||``-normalized error.
    """
    a = np.asarray(a, dtype=float)
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        raise ValueError("bounds undefined for zero-norm a")
    model0, truth0 = pairs[0]
    d_t, d_m = truth0.diag, model0.diag
    a1 = a[1] if a.size > 1 else 0.0
    b1 = d_t[1] if d_t.size > 1 else 0.0
    b1_tilde = d_m[1] if d_m.size > 1 else 0.0
    k1 = lower_bound_k1(a[0], d_t[0], d_m[0])
    k2 = lower_bound_k2(a[0], a1, d_t[0], b1, d_m[0], b1_tilde)
    up = upper_bound(pairs)
    if relative:
        return BoundReport(lower_k1=k1 / norm_a, lower_k2=k2 / norm_a, upper=up, relative=True)
    return BoundReport(lower_k1=k1, lower_k2=k2, upper=up * norm_a, relative=False)
