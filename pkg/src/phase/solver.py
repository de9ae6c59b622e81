"""
Scalar variational problem of the edge-triangle model.

In the replica symmetric regime (alpha > -2) the limiting free energy is

    f(alpha, h) = sup_{0 <= u <= 1} g(u),  g(u) = alpha/6 u^3 + h/2 u - I(u)/2,

with I(u) = u ln u + (1 - u) ln(1 - u). Stationary points of g solve the
fixed-point equation sigma(alpha u^2 + h) = u. This module brackets and
refines those roots, classifies the phase of (alpha, h), traces the
first-order curve h = q(alpha) by equal-height bisection, and exposes the
Laplace constants, limiting variances, mixture weight and rate function that
the exact and sampling modules are checked against.
"""

import logging
import math
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import bisect, brentq, minimize_scalar
from scipy.special import expit, logit, xlogy

from src.core.exceptions import (
    ConvergenceError,
    DegenerateError,
    raise_domain_error,
    raise_regime_error,
)
from src.core.settings import get_settings

logger = logging.getLogger(__name__)

# Second-order critical point where the curve h = q(alpha) ends
ALPHA_C = 27.0 / 8.0
H_C = math.log(2.0) - 1.5
U_C = 2.0 / 3.0

# Below this the free energy is not given by the scalar problem
RS_ALPHA_FLOOR = -2.0

# Quartic coefficient of the rate function at the critical point
CRITICAL_QUARTIC = 81.0 / 64.0

# Search bracket for the curve tracer, widened if the lower end is not low enough
CURVE_BRACKET_WIDTH = 6.0
CURVE_MAX_WIDENINGS = 10

_BISECT_XTOL = 1e-15
# scipy rejects rtol below 4 eps
_BISECT_RTOL = 4.0 * np.finfo(float).eps


class ModelParams(BaseModel):
    """Triangle weight alpha and edge weight h."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(description="Triangle weight")
    h: float = Field(description="Edge weight")

    @property
    def replica_symmetric(self) -> bool:
        return self.alpha > RS_ALPHA_FLOOR

    def require_replica_symmetric(self, operation: str) -> None:
        if not self.replica_symmetric:
            logger.warning(f"{operation} rejected alpha={self.alpha} <= {RS_ALPHA_FLOOR}")
            raise_domain_error(
                f"{operation} requires alpha > {RS_ALPHA_FLOOR} (replica symmetric regime)",
                parameter="alpha",
                value=self.alpha,
            )

    @classmethod
    def critical_point(cls) -> "ModelParams":
        return cls(alpha=ALPHA_C, h=H_C)

    @classmethod
    def erdos_renyi(cls, p: float) -> "ModelParams":
        """Edge probability p with no triangle weight (alpha = 0, h = logit p)."""
        if not 0.0 < p < 1.0:
            raise_domain_error("edge probability must lie in (0, 1)", parameter="p", value=p)
        return cls(alpha=0.0, h=float(logit(p)))


class PointKind(str, Enum):
    LOCAL_MAX = "local_max"
    LOCAL_MIN = "local_min"
    DEGENERATE = "degenerate"


class Regime(str, Enum):
    UNIQUENESS = "uniqueness"
    ON_CRITICAL_CURVE = "on_critical_curve"
    CRITICAL_POINT = "critical_point"
    OUTSIDE_REPLICA_SYMMETRIC = "outside_replica_symmetric"


class StationaryPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    u: float = Field(gt=0.0, lt=1.0)
    objective: float
    second_derivative: float
    kind: PointKind


class LaplaceConstants(BaseModel):
    """
    Expansion constants of g around a maximizer u*:

        g(u* + x) = g(u*) - quadratic x^2 + cubic x^3 + ...            (c_i, k_i)
        g(u* + x) = g(u*) - quartic x^4 + quintic x^5 + ...            (critical point)

    quadratic equals (1 - 2 alpha u^2 (1 - u)) / (4 u (1 - u)); stiffness is the
    numerator 1 - 2 alpha u^2 (1 - u), which fixes the mixture weight.
    """

    model_config = ConfigDict(frozen=True)

    u: float
    quadratic: float
    cubic: float
    quartic: float
    quintic: float
    stiffness: float


class PhasePortrait(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: ModelParams
    regime: Regime
    maximizers: List[StationaryPoint] = Field(default_factory=list)
    free_energy: Optional[float] = None
    laplace_constants: List[LaplaceConstants] = Field(default_factory=list)
    variances: List[Optional[float]] = Field(default_factory=list)
    kappa: Optional[float] = None

    def maximizer(self, which: int = 0) -> StationaryPoint:
        if not 0 <= which < len(self.maximizers):
            raise_domain_error(
                f"maximizer index {which} out of range for {len(self.maximizers)} maximizer(s)",
                parameter="which",
                value=which,
            )
        return self.maximizers[which]


class TaylorCoefficients(BaseModel):
    """Coefficients of x^2..x^5 in rate_function(u* + x)."""

    model_config = ConfigDict(frozen=True)

    order2: float
    order3: float
    order4: float
    order5: float
    fitted: Optional[Tuple[float, float, float, float]] = None
    window: Optional[float] = None

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.order2, self.order3, self.order4, self.order5)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def binary_entropy(u):
    """I(u) = u ln u + (1 - u) ln(1 - u) with I(0) = I(1) = 0."""
    u = np.asarray(u, dtype=float)
    return xlogy(u, u) + xlogy(1.0 - u, 1.0 - u)


def _entropy_derivative(u: float, order: int) -> float:
    if order == 0:
        return float(binary_entropy(u))
    if order == 1:
        return math.log(u) - math.log1p(-u)
    # I^(k)(u) = (k-2)! [(-1)^k u^(1-k) + (1-u)^(1-k)] for k >= 2
    power = order - 1
    return math.factorial(order - 2) * ((-1) ** order / u**power + 1.0 / (1.0 - u) ** power)


def _polynomial_derivative(u: float, params: ModelParams, order: int) -> float:
    alpha, h = params.alpha, params.h
    if order == 0:
        return alpha / 6.0 * u**3 + h / 2.0 * u
    if order == 1:
        return alpha / 2.0 * u**2 + h / 2.0
    if order == 2:
        return alpha * u
    if order == 3:
        return alpha
    return 0.0


def objective(u, params: ModelParams):
    """g(u) = alpha/6 u^3 + h/2 u - I(u)/2 on [0, 1]; accepts scalars or arrays."""
    arr = np.asarray(u, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise_domain_error("objective is defined on [0, 1]", parameter="u")
    values = params.alpha / 6.0 * arr**3 + params.h / 2.0 * arr - 0.5 * binary_entropy(arr)
    return float(values) if values.ndim == 0 else values


def objective_derivative(u: float, params: ModelParams, order: int) -> float:
    """k-th derivative of the objective at an interior point, k = 0..5."""
    if not 0.0 < u < 1.0:
        raise_domain_error("derivatives are defined on (0, 1)", parameter="u", value=u)
    if not 0 <= order <= 5:
        raise_domain_error("derivative order must be 0..5", parameter="order", value=order)
    return _polynomial_derivative(u, params, order) - 0.5 * _entropy_derivative(u, order)


def _residual(u, alpha: float, h: float):
    return expit(alpha * u * u + h) - u


def fixed_point_residual(u: float, params: ModelParams) -> float:
    """sigma(alpha u^2 + h) - u, zero exactly at stationary points of the objective."""
    if not 0.0 < u < 1.0:
        raise_domain_error("fixed-point residual is defined on (0, 1)", parameter="u", value=u)
    return float(_residual(u, params.alpha, params.h))


def _second_derivative(u: float, alpha: float) -> float:
    return alpha * u - 1.0 / (2.0 * u * (1.0 - u))


def _third_derivative(u: float, alpha: float) -> float:
    return alpha - 0.5 * (-1.0 / u**2 + 1.0 / (1.0 - u) ** 2)


def stiffness(u: float, alpha: float) -> float:
    """1 - 2 alpha u^2 (1 - u); zero where g'' vanishes."""
    return 1.0 - 2.0 * alpha * u * u * (1.0 - u)


# ---------------------------------------------------------------------------
# Root isolation
# ---------------------------------------------------------------------------

def _bracketed_roots(alpha: float, h: float, grid: np.ndarray) -> List[float]:
    residuals = _residual(grid, alpha, h)
    if residuals[0] <= 0.0 or residuals[-1] >= 0.0:
        raise ConvergenceError(
            f"residual does not change sign across [0, 1] for alpha={alpha}, h={h}; "
            "parameters are beyond double precision",
            component="PhaseSolver",
            details={"alpha": alpha, "h": h},
        )

    roots = []
    signs = np.sign(residuals)
    exact = np.flatnonzero(signs == 0.0)
    roots.extend(float(grid[i]) for i in exact)

    changes = np.flatnonzero(signs[:-1] * signs[1:] < 0.0)
    for i in changes:
        root = bisect(
            _residual, grid[i], grid[i + 1], args=(alpha, h),
            xtol=_BISECT_XTOL, rtol=_BISECT_RTOL, maxiter=200,
        )
        roots.append(float(root))

    # Tangential roots: |residual| has an interior local minimum without a sign change
    magnitude = np.abs(residuals)
    interior = np.arange(1, len(grid) - 1)
    dips = interior[
        (magnitude[interior] < magnitude[interior - 1])
        & (magnitude[interior] <= magnitude[interior + 1])
        & (signs[interior - 1] == signs[interior])
        & (signs[interior + 1] == signs[interior])
    ]
    for i in dips:
        found = minimize_scalar(
            lambda x: abs(_residual(x, alpha, h)),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": 1e-14},
        )
        roots.append(float(found.x))

    return roots


def _polish_degenerate(u: float, params: ModelParams, tol: float, kind_tol: float) -> float:
    """Move a nearly degenerate root onto the exact zero of g''' or g''."""
    lo = max(u - 1e-3, 1e-12)
    hi = min(u + 1e-3, 1.0 - 1e-12)
    for derivative in (_third_derivative, _second_derivative):
        f_lo = derivative(lo, params.alpha)
        f_hi = derivative(hi, params.alpha)
        if f_lo * f_hi >= 0.0:
            continue
        candidate = brentq(derivative, lo, hi, args=(params.alpha,), xtol=1e-16, maxiter=200)
        if (abs(fixed_point_residual(candidate, params)) <= tol
                and abs(_second_derivative(candidate, params.alpha)) <= kind_tol):
            return float(candidate)
    return u


def _classify_point(u: float, params: ModelParams, kind_tol: float) -> StationaryPoint:
    second = _second_derivative(u, params.alpha)
    if abs(second) <= kind_tol:
        kind = PointKind.DEGENERATE
    elif second < 0.0:
        kind = PointKind.LOCAL_MAX
    else:
        kind = PointKind.LOCAL_MIN
    return StationaryPoint(u=u, objective=objective(u, params), second_derivative=second, kind=kind)


def find_stationary_points(
    params: ModelParams,
    tol: Optional[float] = None,
    grid_points: Optional[int] = None,
    kind_tol: Optional[float] = None,
) -> List[StationaryPoint]:
    """
    All roots of the fixed-point residual in (0, 1), sorted ascending.

    Sign changes on a uniform grid are refined by bisection; tangential
    roots (spinodal points and the critical point) are picked up as local
    minima of |residual| and refined by bounded minimisation. Roots whose
    g'' is within kind_tol of zero are polished onto the zero of g''' (or
    g'') so the critical point comes out exact rather than noise-limited.
    """
    params.require_replica_symmetric("find_stationary_points")
    settings = get_settings()
    tol = settings.solver_tol if tol is None else tol
    grid_points = settings.root_grid_points if grid_points is None else grid_points
    kind_tol = settings.degeneracy_atol if kind_tol is None else kind_tol
    if tol <= 0:
        raise_domain_error("tolerance must be positive", parameter="tol", value=tol)

    grid = np.linspace(0.0, 1.0, grid_points)
    candidates = sorted(_bracketed_roots(params.alpha, params.h, grid))

    points: List[StationaryPoint] = []
    for u in candidates:
        if not 0.0 < u < 1.0:
            continue
        if abs(fixed_point_residual(u, params)) > tol:
            continue
        if abs(_second_derivative(u, params.alpha)) <= kind_tol:
            u = _polish_degenerate(u, params, tol, kind_tol)
        if points and abs(points[-1].u - u) < 1e-9:
            continue
        points.append(_classify_point(u, params, kind_tol))

    if not 1 <= len(points) <= 3:
        raise ConvergenceError(
            f"found {len(points)} stationary points for {params}; expected 1 to 3",
            component="PhaseSolver",
            details={"alpha": params.alpha, "h": params.h, "roots": [p.u for p in points]},
        )
    return points


# ---------------------------------------------------------------------------
# Phase classification
# ---------------------------------------------------------------------------

def laplace_constants_at(u: float, params: ModelParams) -> LaplaceConstants:
    s = stiffness(u, params.alpha)
    return LaplaceConstants(
        u=u,
        quadratic=s / (4.0 * u * (1.0 - u)),
        cubic=objective_derivative(u, params, 3) / 6.0,
        quartic=-objective_derivative(u, params, 4) / 24.0,
        quintic=objective_derivative(u, params, 5) / 120.0,
        stiffness=s,
    )


def kappa_from_stiffness(stiffness_low: float, stiffness_high: float) -> float:
    """Weight D_1/(D_1 + D_2) of the lower maximizer, D_i proportional to s_i^(-1/2)."""
    if stiffness_low <= 0 or stiffness_high <= 0:
        raise_domain_error("stiffness values must be positive", parameter="stiffness")
    d_low = 1.0 / math.sqrt(stiffness_low)
    d_high = 1.0 / math.sqrt(stiffness_high)
    return d_low / (d_low + d_high)


def classify_phase(
    params: ModelParams,
    tol: Optional[float] = None,
    equal_height_rtol: Optional[float] = None,
    kind_tol: Optional[float] = None,
) -> PhasePortrait:
    """Regime, maximizers and derived constants of the scalar problem at (alpha, h)."""
    if not params.replica_symmetric:
        return PhasePortrait(params=params, regime=Regime.OUTSIDE_REPLICA_SYMMETRIC)

    settings = get_settings()
    equal_height_rtol = settings.equal_height_rtol if equal_height_rtol is None else equal_height_rtol
    kind_tol = settings.degeneracy_atol if kind_tol is None else kind_tol

    points = find_stationary_points(params, tol=tol, kind_tol=kind_tol)
    candidates = [p for p in points if p.kind != PointKind.LOCAL_MIN]
    top = max(p.objective for p in candidates)
    threshold = equal_height_rtol * max(1.0, abs(top))
    maximizers = [p for p in candidates if top - p.objective <= threshold]

    if len(maximizers) == 1 and maximizers[0].kind == PointKind.DEGENERATE:
        regime = Regime.CRITICAL_POINT
    elif len(maximizers) == 2:
        regime = Regime.ON_CRITICAL_CURVE
    else:
        regime = Regime.UNIQUENESS

    constants = [laplace_constants_at(p.u, params) for p in maximizers]
    variances = [
        None if p.kind == PointKind.DEGENERATE else p.u * (1.0 - p.u) / c.stiffness
        for p, c in zip(maximizers, constants)
    ]
    kappa = None
    if regime == Regime.ON_CRITICAL_CURVE:
        kappa = kappa_from_stiffness(constants[0].stiffness, constants[1].stiffness)

    return PhasePortrait(
        params=params,
        regime=regime,
        maximizers=maximizers,
        free_energy=top,
        laplace_constants=constants,
        variances=variances,
        kappa=kappa,
    )


def free_energy(params: ModelParams) -> float:
    """Supremum of the objective over [0, 1]."""
    params.require_replica_symmetric("free_energy")
    return max(p.objective for p in find_stationary_points(params))


def free_energy_gradient(params: ModelParams) -> Tuple[float, float]:
    """(d f/d alpha, d f/d h) = (u*^3 / 6, u*/2) at a unique maximizer."""
    portrait = classify_phase(params)
    if portrait.regime not in (Regime.UNIQUENESS, Regime.CRITICAL_POINT):
        raise_regime_error(
            "free energy is differentiable only with a unique maximizer",
            regime=portrait.regime.value,
            operation="free_energy_gradient",
        )
    u = portrait.maximizers[0].u
    return u**3 / 6.0, u / 2.0


# ---------------------------------------------------------------------------
# Critical curve
# ---------------------------------------------------------------------------

def _height_gap(h: float, alpha: float, tol: float, grid_points: int, kind_tol: float) -> float:
    """g(u_high) - g(u_low) when both maxima exist; +-1 when only one does."""
    points = find_stationary_points(ModelParams(alpha=alpha, h=h), tol=tol,
                                    grid_points=grid_points, kind_tol=kind_tol)
    maxima = [p for p in points if p.kind != PointKind.LOCAL_MIN]
    if len(maxima) >= 2:
        return maxima[-1].objective - maxima[0].objective
    return -1.0 if maxima[0].u < U_C else 1.0


def critical_curve_h(alpha: float, tol: Optional[float] = None) -> float:
    """
    h = q(alpha) on the first-order curve, by bisection in h on the sign of
    g(u_high) - g(u_low). Only defined for alpha > 27/8.
    """
    if not alpha > ALPHA_C:
        logger.warning(f"critical_curve_h rejected alpha={alpha} <= 27/8")
        raise_domain_error("the critical curve exists only for alpha > 27/8",
                           parameter="alpha", value=alpha)
    settings = get_settings()
    tol = settings.solver_tol if tol is None else tol
    return _traced_curve_h(float(alpha), float(tol), settings.root_grid_points, settings.degeneracy_atol)


# Keyed on every setting the tracer reads
@lru_cache(maxsize=256)
def _traced_curve_h(alpha: float, tol: float, grid_points: int, kind_tol: float) -> float:
    args = (alpha, tol, grid_points, kind_tol)
    hi = H_C
    lo = H_C - CURVE_BRACKET_WIDTH
    for _ in range(CURVE_MAX_WIDENINGS):
        if _height_gap(lo, *args) < 0.0:
            break
        logger.warning(f"widening curve bracket below h={lo} for alpha={alpha}")
        lo -= CURVE_BRACKET_WIDTH
    else:
        raise ConvergenceError(
            f"could not bracket the critical curve for alpha={alpha}",
            component="PhaseSolver",
            details={"alpha": alpha, "lower": lo},
        )

    h = bisect(_height_gap, lo, hi, args=args, xtol=1e-14, rtol=_BISECT_RTOL, maxiter=300)
    gap = _height_gap(h, *args)
    if abs(gap) > tol:
        raise ConvergenceError(
            f"equal-height condition not met at alpha={alpha}: gap={gap:.3e}",
            component="PhaseSolver",
            details={"alpha": alpha, "h": h, "gap": gap},
        )
    logger.info(f"critical curve: q({alpha}) = {h:.12f} (gap {gap:.2e})")
    return float(h)


# ---------------------------------------------------------------------------
# Derived quantities
# ---------------------------------------------------------------------------

def limiting_variance(portrait: PhasePortrait, which: int = 0) -> float:
    """v_i = u_i (1 - u_i) / (1 - 2 alpha u_i^2 (1 - u_i))."""
    point = portrait.maximizer(which)
    s = stiffness(point.u, portrait.params.alpha)
    if point.kind == PointKind.DEGENERATE or s <= get_settings().degeneracy_atol:
        raise DegenerateError(
            "limiting variance diverges where g'' vanishes",
            component="PhaseSolver",
            details={"u": point.u, "alpha": portrait.params.alpha, "stiffness": s},
        )
    return point.u * (1.0 - point.u) / s


def edge_density_susceptibility(params: ModelParams, which: int = 0, step: float = 1e-5) -> float:
    """d u*/d h by central differences in h; equals the limiting variance."""
    def maximizer_at(h: float) -> float:
        return classify_phase(ModelParams(alpha=params.alpha, h=h)).maximizer(which).u

    return (maximizer_at(params.h + step) - maximizer_at(params.h - step)) / (2.0 * step)


def mixture_weight_kappa(portrait: PhasePortrait) -> float:
    if portrait.regime != Regime.ON_CRITICAL_CURVE:
        raise_regime_error(
            "mixture weight is defined only on the critical curve",
            regime=portrait.regime.value,
            operation="mixture_weight_kappa",
        )
    low, high = portrait.laplace_constants
    return kappa_from_stiffness(low.stiffness, high.stiffness)


def rate_function(x, params: ModelParams):
    """f - g(x): nonnegative on [0, 1], zero at the maximizers."""
    params.require_replica_symmetric("rate_function")
    return free_energy(params) - objective(x, params)


def _fitted_taylor(params: ModelParams, u: float, f: float, window: float) -> Tuple[float, ...]:
    offsets = window * np.cos(np.linspace(0.0, np.pi, 65))
    values = f - objective(u + offsets, params)
    series = np.polynomial.Polynomial.fit(offsets, values, deg=12).convert()
    coef = np.zeros(6)
    coef[: min(6, len(series.coef))] = series.coef[:6]
    return tuple(float(c) for c in coef[2:6])


def rate_taylor_coefficients(
    params: ModelParams, which: int = 0, window: Optional[float] = 0.05
) -> TaylorCoefficients:
    """
    Analytic Taylor coefficients (orders 2..5) of the rate function at a
    maximizer: order k equals -g^(k)(u*)/k!. When window is given, a
    degree-12 Chebyshev-node fit of the rate function on [u* - window,
    u* + window] is attached as a numerical cross-check.
    """
    portrait = classify_phase(params)
    if portrait.regime == Regime.OUTSIDE_REPLICA_SYMMETRIC:
        params.require_replica_symmetric("rate_taylor_coefficients")
    point = portrait.maximizer(which)
    u = point.u

    coefficients = [
        -objective_derivative(u, params, k) / math.factorial(k) for k in range(2, 6)
    ]
    if portrait.regime == Regime.CRITICAL_POINT:
        coefficients[0] = 0.0
        coefficients[1] = 0.0

    fitted = None
    if window is not None:
        if window <= 0:
            raise_domain_error("window must be positive", parameter="window", value=window)
        usable = min(window, 0.5 * min(u, 1.0 - u))
        if usable < window:
            logger.info(f"Taylor window shrunk from {window} to {usable} near the boundary")
        fitted = _fitted_taylor(params, u, portrait.free_energy, usable)
        window = usable

    return TaylorCoefficients(
        order2=coefficients[0],
        order3=coefficients[1],
        order4=coefficients[2],
        order5=coefficients[3],
        fitted=fitted,
        window=window,
    )


if __name__ == "__main__":
    from src.core.logging_config import setup_logging

    setup_logging()
    for alpha, h in [(0.0, 0.0), (1.0, 0.0), (ALPHA_C, H_C)]:
        portrait = classify_phase(ModelParams(alpha=alpha, h=h))
        logger.info(f"({alpha}, {h}): {portrait.regime.value}, "
                    f"u* = {[round(p.u, 6) for p in portrait.maximizers]}, f = {portrait.free_energy}")
    q4 = critical_curve_h(4.0)
    logger.info(f"q(4) = {q4}, kappa = {classify_phase(ModelParams(alpha=4.0, h=q4)).kappa}")
