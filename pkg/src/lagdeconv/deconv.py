"""Recover input-signal coefficients from observed outputs through transfer models.

Given observed output coefficients ``c_l`` and interpretive transfer matrices
``B_tilde_l`` at one or more locations, the estimators here solve for the
input coefficient vector ``a``.  When the interpretive model differs from the
true transfer matrix ``B_l``, the single-location estimate satisfies

    a - a_hat = (I - B_tilde^-1 B) a,

so the error operator ``I - B_tilde^-1 B`` (itself lower-triangular Toeplitz)
carries the whole model-error story; the bounds module consumes it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import toeplitz
from .toeplitz import LTTMatrix

__all__ = [
    "Observation",
    "ObservationSet",
    "Estimate",
    "solve_single",
    "solve_multi_averaged",
    "solve_multi_lsq",
    "error_operator",
    "reconstruction_error",
    "averaged_error_diagnostics",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Observation:
    """One location's output coefficients and the transfer model used to invert them.

    ``truth`` optionally carries the exact transfer matrix in synthetic
    studies where it is known.
    """

    c: np.ndarray
    model: LTTMatrix
    truth: Optional[LTTMatrix] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).copy()
        if c.ndim != 1:
            raise ValueError("c must be a 1-D coefficient vector")
        if c.size != self.model.n:
            raise ValueError(f"length mismatch: c has {c.size}, model has {self.model.n}")
        if self.truth is not None and self.truth.n != self.model.n:
            raise ValueError("truth and model sizes differ")
        if not self.model.invertible:
            raise toeplitz.SingularMatrixError("observation model is singular")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class ObservationSet:
    """M >= 1 observations sharing a common coefficient length N."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(entries) < 1:
            raise ValueError("need at least one observation")
        n = entries[0].model.n
        for e in entries:
            if not isinstance(e, Observation):
                raise TypeError("entries must be Observation instances")
            if e.model.n != n:
                raise ValueError("all observations must share N")
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return self.entries[0].model.n


@dataclass(frozen=True)
class Estimate:
    """Recovered input coefficients plus per-location data residuals.

    ``method`` is one of ``"single"``, ``"averaged"``, ``"least_squares"``.
    ``residuals[l] = ||c_l - model_l @ a_hat||_2``; zero (within roundoff)
    for an exact single-location solve.
    """

    a_hat: np.ndarray
    method: str
    residuals: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_hat, dtype=float).copy()
        r = np.asarray(self.residuals, dtype=float).copy()
        if self.method not in ("single", "averaged", "least_squares"):
            raise ValueError(f"unknown method {self.method!r}")
        if np.any(r < 0):
            raise ValueError("residuals must be nonnegative")
        a.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "a_hat", a)
        object.__setattr__(self, "residuals", r)


def _residuals(entries: Sequence[Observation], a_hat: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.norm(e.c - toeplitz.apply(e.model, a_hat)) for e in entries])


def solve_single(model: LTTMatrix, c) -> Estimate:
    """Exact single-location solve ``model @ a_hat = c`` (forward substitution)."""
    a_hat = toeplitz.solve(model, c)
    res = _residuals([Observation(c=c, model=model)], a_hat)
    return Estimate(a_hat=a_hat, method="single", residuals=res)


def solve_multi_averaged(obs: ObservationSet) -> Estimate:
    """Arithmetic mean of the M single-location solutions.

    For M = 1 this coincides with :func:`solve_single` (up to the method tag).
    """
    sols = [toeplitz.solve(e.model, e.c) for e in obs.entries]
    a_hat = np.mean(sols, axis=0)
    return Estimate(a_hat=a_hat, method="averaged", residuals=_residuals(obs.entries, a_hat))


def solve_multi_lsq(obs: ObservationSet) -> Estimate:
    """Least-squares estimate minimizing ``sum_l ||c_l - B_tilde_l a||_2^2``.

    Solves the normal equations ``(sum_l B_l^T B_l) a = sum_l B_l^T c_l``
    densely; N is small (tens) so this is cheap and the achieved objective is
    never worse than any other candidate's, the averaged estimate included.
    """
    n = obs.n
    gram = np.zeros((n, n))
    rhs = np.zeros(n)
    for e in obs.entries:
        dense = e.model.to_dense()
        gram += dense.T @ dense
        rhs += dense.T @ e.c
    try:
        a_hat = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise toeplitz.SingularMatrixError(f"normal matrix is singular: {exc}") from exc
    return Estimate(a_hat=a_hat, method="least_squares", residuals=_residuals(obs.entries, a_hat))


def error_operator(model: LTTMatrix, truth: LTTMatrix) -> LTTMatrix:
    """The model-error operator ``E = I - model^-1 @ truth`` (LTT).

    Its leading diagonal entries have closed forms in the two matrices'
    diagonal vectors ``d~ = model.diag``, ``d = truth.diag``:

        e_0 = 1 - d_0/d~_0,
        e_1 = -(1/d~_0) * (d_1 - d~_1 * d_0/d~_0),

    which the bounds module uses directly.  ``a - a_hat = E a`` for the
    single-location estimate.
    """
    if model.n != truth.n:
        raise ValueError(f"size mismatch: {model.n} != {truth.n}")
    prod = toeplitz.multiply(toeplitz.invert(model), truth)
    e = -prod.diag.copy()
    e[0] += 1.0
    return LTTMatrix(diag=e)


class ReconstructionError(NamedTuple):
    absolute: float
    relative: float


def reconstruction_error(a, a_hat) -> ReconstructionError:
    """Absolute and relative Euclidean error of a recovered coefficient vector."""
    a = np.asarray(a, dtype=float)
    a_hat = np.asarray(a_hat, dtype=float)
    if a.shape != a_hat.shape:
        raise ValueError("a and a_hat must have equal length")
    absolute = float(np.linalg.norm(a - a_hat))
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        raise ValueError("relative error undefined for zero-norm a")
    return ReconstructionError(absolute=absolute, relative=absolute / norm_a)


def averaged_error_diagnostics(obs: ObservationSet, a) -> dict:
    """Diagnostics for the averaged estimator's error decomposition.

    Requires every entry to carry its ``truth`` matrix.  Returns the actual
    error ``||a - a_avg||`` together with the per-location error norms
    ``||E_l a||``, their arithmetic mean, and their root-mean-square.  When
    each ``c_l`` was generated as ``truth_l @ a``, the averaged estimate's
    error is the mean of the per-location error vectors, so the triangle
    inequality ``||a - a_avg|| <= mean_l ||E_l a||`` holds exactly; the two
    scalar aggregates generally differ from the actual error and from each
    other, so they are logged for inspection, never asserted.
    """
    a = np.asarray(a, dtype=float)
    if any(e.truth is None for e in obs.entries):
        raise ValueError("every observation needs a truth matrix for error diagnostics")
    per_loc = np.array([
        np.linalg.norm(toeplitz.apply(error_operator(e.model, e.truth), a))
        for e in obs.entries
    ])
    a_avg = solve_multi_averaged(obs).a_hat
    actual = float(np.linalg.norm(a - a_avg))
    out = {
        "actual": actual,
        "per_location": per_loc,
        "mean": float(np.mean(per_loc)),
        "rms": float(np.sqrt(np.mean(per_loc**2))),
    }
    log.debug(
        "averaged-estimator error %.6e vs per-location mean %.6e, rms %.6e",
        out["actual"], out["mean"], out["rms"],
    )
    return out
