"""Weight profiles h on [0, pi] prescribing boundary decay of outer symbols.

A weight is a continuous strictly increasing function h with h(0) = 0,
evaluable together with its derivative and its inverse.  Three families are
supported:

* ``power``      h(t) = c * t**gamma              (c > 0, gamma > 0)
* ``log_power``  h(t) = log(e/t)**(-beta)         (beta > 0), near zero
* ``custom``     monotone piecewise-cubic interpolation of a table

The log-power formula is only monotone for t < e and blows up at t = e < pi,
so it is continued linearly (C^1) past t = 1; every integral criterion that
consumes these weights is dominated by the behaviour near t = 0, which the
formula region covers.

``admissibility_report`` measures the two regularity ratios h(2t)/h(t) and
t h'(t)/h(t) on a grid and classifies the shape (concave/convex) from second
divided differences.  A weight is flagged admissible when both ratio ranges
stay inside a band [1/C, C] and the shape is not mixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DomainError, InvalidParameter, NonMonotone

PI = np.pi

# Switch-over point of the log-power family to its linear continuation.
_LOG_POWER_KNEE = 1.0


@dataclass(frozen=True)
class WeightFunction:
    """An increasing weight h on [0, pi] with derivative and inverse."""

    family: str
    params: dict
    _h: Callable = field(repr=False)
    _dh: Callable = field(repr=False)
    _hinv: Callable = field(repr=False)
    breakpoints: tuple = ()  # interior kinks, used as quadrature panel edges

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-15) or np.any(t > PI + 1e-12):
            raise DomainError("weight evaluated outside [0, pi]")
        return self._h(np.clip(t, 0.0, PI))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0) or np.any(t > PI + 1e-12):
            raise DomainError("weight derivative evaluated outside (0, pi]")
        return self._dh(np.minimum(t, PI))

    def inverse(self, y):
        """Inverse of h on [0, h(pi)]; values above h(pi) clamp to pi."""
        y = np.asarray(y, dtype=float)
        if np.any(y < -1e-15):
            raise DomainError("weight inverse of a negative value")
        top = float(self._h(np.asarray(PI)))
        return self._hinv(np.clip(y, 0.0, top))

    @property
    def h_max(self) -> float:
        return float(self._h(np.asarray(PI)))

    def to_dict(self) -> dict:
        return {"family": self.family, **self.params}


def _power_weight(c: float, gamma: float) -> WeightFunction:
    if not (c > 0 and gamma > 0):
        raise InvalidParameter("power weight needs c > 0 and gamma > 0")

    def h(t):
        return c * np.power(t, gamma)

    def dh(t):
        return c * gamma * np.power(t, gamma - 1.0)

    def hinv(y):
        return np.power(y / c, 1.0 / gamma)

    return WeightFunction("power", {"c": c, "gamma": gamma}, h, dh, hinv)


def _log_power_weight(beta: float) -> WeightFunction:
    if not beta > 0:
        raise InvalidParameter("log-power weight needs beta > 0")
    knee = _LOG_POWER_KNEE  # formula below is h(t) = (1 - log t)^(-beta)
    h_knee = 1.0            # value at the knee
    slope = beta            # h'(1) = beta, so the continuation is C^1

    def h(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        low = t < knee
        with np.errstate(divide="ignore"):
            out[low] = np.where(
                t[low] > 0.0, np.power(1.0 - np.log(t[low]), -beta), 0.0
            )
        out[~low] = h_knee + slope * (t[~low] - knee)
        return out

    def dh(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        low = t < knee
        out[low] = beta * np.power(1.0 - np.log(t[low]), -beta - 1.0) / t[low]
        out[~low] = slope
        return out

    def hinv(y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        low = y < h_knee
        with np.errstate(divide="ignore"):
            out[low] = np.where(
                y[low] > 0.0, np.exp(1.0 - np.power(y[low], -1.0 / beta)), 0.0
            )
        out[~low] = knee + (y[~low] - h_knee) / slope
        return out

    return WeightFunction("log_power", {"beta": beta}, h, dh, hinv,
                          breakpoints=(knee,))


def _custom_weight(table) -> WeightFunction:
    pts = np.asarray(table, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise InvalidParameter("custom table must be a list of (t, h) pairs")
    t, v = pts[:, 0], pts[:, 1]
    if np.any(np.diff(t) <= 0):
        raise InvalidParameter("custom table abscissae must increase")
    if abs(t[0]) > 1e-12 or abs(v[0]) > 1e-12:
        raise InvalidParameter("custom table must start at (0, 0)")
    if t[-1] < PI - 1e-9:
        raise InvalidParameter("custom table must cover [0, pi]")
    if np.any(np.diff(v) <= 0):
        raise NonMonotone("custom table values must strictly increase")
    interp = PchipInterpolator(t, v, extrapolate=False)
    dinterp = interp.derivative()

    def h(x):
        return interp(np.minimum(x, t[-1]))

    def dh(x):
        return np.maximum(dinterp(np.minimum(x, t[-1])), 0.0)

    def hinv(y):
        y = np.asarray(y, dtype=float)
        flat = np.ravel(y)
        out = np.empty_like(flat)
        for i, yy in enumerate(flat):
            if yy <= 0.0:
                out[i] = 0.0
            elif yy >= v[-1]:
                out[i] = t[-1]
            else:
                out[i] = brentq(lambda s: float(interp(s)) - yy, 0.0, t[-1],
                                xtol=1e-14, rtol=1e-14)
        return out.reshape(np.shape(y))

    return WeightFunction("custom", {"table": pts.tolist()}, h, dh, hinv,
                          breakpoints=tuple(t[1:-1]))


_FAMILIES = {
    "power": lambda p: _power_weight(p["c"], p["gamma"]),
    "log_power": lambda p: _log_power_weight(p["beta"]),
    "custom": lambda p: _custom_weight(p["table"]),
}


def make_weight(family: str, **params) -> WeightFunction:
    """Construct a weight from a family name and its parameters.

    ``make_weight("power", c=1.0, gamma=1.0)`` is the identity weight;
    ``make_weight("log_power", beta=2.0)`` the slowly increasing example;
    ``make_weight("custom", table=[(0, 0), (pi, 1)])`` interpolates a table.
    """
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise InvalidParameter(f"unknown weight family {family!r}") from None
    return builder(params)


def weight_from_dict(data: dict) -> WeightFunction:
    data = dict(data)
    family = data.pop("family")
    return make_weight(family, **data)


@dataclass(frozen=True)
class AdmissibilityReport:
    doubling_ratio_range: tuple
    slope_ratio_range: tuple
    shape: str                # "concave" | "convex" | "both" | "neither"
    admissible: bool
    band: float
    grid: np.ndarray
    doubling_ratios: np.ndarray
    slope_ratios: np.ndarray


def admissibility_report(h: WeightFunction, grid, *, band: float = 10.0
                         ) -> AdmissibilityReport:
    """Measure h(2t)/h(t), t h'(t)/h(t) and the shape of h on a grid.

    The grid must contain at least 16 points of (0, pi/2] so that 2t stays
    inside the domain.  ``admissible`` is True iff both ratio ranges lie in
    [1/band, band] and the shape classification is not "neither".
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size < 16:
        raise DomainError("admissibility grid needs at least 16 points")
    if grid[0] <= 0.0 or grid[-1] > PI / 2 + 1e-12:
        raise DomainError("admissibility grid must lie in (0, pi/2]")

    ht = h(grid)
    doubling = h(2.0 * grid) / ht
    slope = grid * h.derivative(grid) / ht

    # Shape from second divided differences: 2*h[t0,t1,t2].
    t0, t1, t2 = grid[:-2], grid[1:-1], grid[2:]
    dd = 2.0 * ((h(t2) - h(t1)) / (t2 - t1) - (h(t1) - h(t0)) / (t1 - t0)) \
        / (t2 - t0)
    scale = max(np.max(np.abs(dd)), h.h_max / PI ** 2)
    thr = 1e-7 * scale
    if np.all(np.abs(dd) <= thr):
        shape = "both"
    elif np.all(dd <= thr):
        shape = "concave"
    elif np.all(dd >= -thr):
        shape = "convex"
    else:
        shape = "neither"

    ranges = [(float(np.min(r)), float(np.max(r))) for r in (doubling, slope)]
    ok = shape != "neither" and all(
        lo >= 1.0 / band - 1e-12 and hi <= band + 1e-12 for lo, hi in ranges
    )
    return AdmissibilityReport(
        doubling_ratio_range=ranges[0],
        slope_ratio_range=ranges[1],
        shape=shape,
        admissible=bool(ok),
        band=band,
        grid=grid,
        doubling_ratios=doubling,
        slope_ratios=slope,
    )
