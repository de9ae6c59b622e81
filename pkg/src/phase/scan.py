"""
Phase-diagram tables: a rectangular (alpha, h) grid plus the traced
critical curve h = q(alpha), starting at the critical point.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.settings import get_settings
from src.phase.solver import (
    ALPHA_C,
    H_C,
    ModelParams,
    PhasePortrait,
    classify_phase,
    critical_curve_h,
)

logger = logging.getLogger(__name__)

SCAN_COLUMNS = [
    "series", "alpha", "h", "regime", "u_low", "u_high",
    "free_energy", "variance_low", "variance_high", "kappa",
]


def _row(series: str, portrait: PhasePortrait) -> dict:
    us = [p.u for p in portrait.maximizers]
    variances = [math.nan if v is None else v for v in portrait.variances]
    return {
        "series": series,
        "alpha": portrait.params.alpha,
        "h": portrait.params.h,
        "regime": portrait.regime.value,
        "u_low": us[0] if us else math.nan,
        "u_high": us[-1] if len(us) > 1 else math.nan,
        "free_energy": math.nan if portrait.free_energy is None else portrait.free_energy,
        "variance_low": variances[0] if variances else math.nan,
        "variance_high": variances[-1] if len(variances) > 1 else math.nan,
        "kappa": math.nan if portrait.kappa is None else portrait.kappa,
    }


def _grid_row(point: Tuple[float, float, Optional[float]]) -> dict:
    alpha, h, tol = point
    return _row("grid", classify_phase(ModelParams(alpha=alpha, h=h), tol=tol))


def curve_rows(alpha_max: float, points: int, alpha_min: float = ALPHA_C,
               tol: Optional[float] = None) -> List[dict]:
    """The critical point followed by `points` traced curve points up to alpha_max."""
    if alpha_max <= ALPHA_C:
        return []
    rows = [_row("critical_curve", classify_phase(ModelParams.critical_point(), tol=tol))]
    start = max(alpha_min, ALPHA_C)
    for alpha in np.linspace(start, alpha_max, points + 1):
        if alpha <= ALPHA_C:
            continue
        h = critical_curve_h(float(alpha), tol)
        rows.append(_row("critical_curve", classify_phase(ModelParams(alpha=float(alpha), h=h), tol=tol)))
    return rows


def phase_scan(
    alpha_values: Sequence[float],
    h_values: Sequence[float],
    tol: Optional[float] = None,
    curve_points: int = 20,
    max_workers: Optional[int] = None,
) -> pd.DataFrame:
    """Rows for every (alpha, h) in the grid, then the curve series when alpha goes past 27/8."""
    max_workers = get_settings().max_workers if max_workers is None else max_workers
    points = [(float(a), float(h), tol) for a in alpha_values for h in h_values]
    logger.info(f"phase scan: {len(points)} grid points, {max_workers} worker(s)")
    if max_workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_grid_row, points))
    else:
        rows = [_grid_row(p) for p in points]

    alphas = list(alpha_values)
    if alphas and max(alphas) > ALPHA_C and curve_points > 0:
        rows.extend(curve_rows(max(alphas), curve_points, min(alphas), tol))
    return pd.DataFrame(rows, columns=SCAN_COLUMNS)


if __name__ == "__main__":
    from src.core.logging_config import setup_logging

    setup_logging()
    table = phase_scan(np.linspace(0.0, 5.0, 6), np.linspace(-2.0, 0.0, 5), curve_points=5)
    logger.info(f"\n{table.to_string()}")
    logger.info(f"curve endpoint: ({ALPHA_C}, {H_C:.6f})")
