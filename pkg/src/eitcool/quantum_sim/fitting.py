"""Exponential-relaxation fits of mean phonon number traces."""
from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares

log = logging.getLogger(__name__)


class FitResult(NamedTuple):
    w_fit: float
    n_s_fit: float
    n0_fit: float
    residual: float  # rms of the fit residuals
    converged: bool
    message: str = ""


def _model(theta, t):
    w, n_s, n0 = theta
    return n_s + (n0 - n_s) * np.exp(-w * t)


def fit_cooling(t_grid, n_mean, rel_threshold: float = 1e-2) -> FitResult:
    """Least-squares fit of ``n(t) = n_s + (n0 - n_s) exp(-W t)``.

    Constant data returns ``W = 0`` with ``n_s = n0``.  A fit whose rms
    residual exceeds ``rel_threshold`` times the data range, or whose time
    span covers fewer than two e-foldings, is flagged ``converged=False``
    and logged.
    """
    t = np.asarray(t_grid, dtype=float)
    y = np.asarray(n_mean, dtype=float)
    if t.shape != y.shape or t.size < 5:
        raise ValueError("need at least 5 samples of matching shape")
    t = t - t[0]
    span = np.ptp(y)
    if span <= 1e-12 * max(1.0, np.abs(y).max()):
        return FitResult(0.0, float(y[0]), float(y[0]), 0.0, True, "constant data")

    # start from a log-linear estimate of the rate
    tail = y[-1]
    lead = np.abs(y - tail)
    usable = lead > 0.05 * span
    if usable.sum() >= 2:
        slope = np.polyfit(t[usable], np.log(lead[usable]), 1)[0]
        w0 = max(-slope, 1.0 / t[-1])
    else:
        w0 = 3.0 / t[-1]
    scale = 1.0 / t[-1]
    res = least_squares(
        lambda th: _model((th[0] * scale, th[1], th[2]), t) - y,
        x0=[w0 / scale, tail, y[0]],
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        method="lm",
    )
    w, n_s, n0 = res.x[0] * scale, res.x[1], res.x[2]
    rms = float(np.sqrt(np.mean(res.fun**2)))
    messages = []
    if not res.success:
        messages.append(res.message)
    if rms > rel_threshold * span:
        messages.append(f"rms residual {rms:.3g} exceeds {rel_threshold:g} x data range")
    if w * t[-1] < 2.0:
        messages.append(f"data span {w * t[-1]:.2g} e-foldings < 2")
    converged = not messages
    if not converged:
        log.warning("cooling fit: %s", "; ".join(messages))
    return FitResult(float(w), float(n_s), float(n0), rms, converged, "; ".join(messages))
