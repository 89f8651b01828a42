"""Boundary level sets, pull-back measures on dyadic boxes, and diagnostics.

The level-set profile s -> |E(s)| = |{theta : |phi(e^i theta)| >= s}| has two
routes: an exact one for outer symbols (where the super-level set is a
neighborhood of the contact set and arc arithmetic is exact) and a
boundary-sampling route with bisection-refined crossings, used for the other
variants and as an independent cross-check.

The pull-back measure m_phi assigns to a Borel subset of the closed disc the
normalized measure of the boundary angles whose trace lands in it.  Dyadic
Carleson boxes W(n, j) cover the outermost ring of width 2^-n; samples with
modulus >= 1 are assigned to the box of their argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary_sets import TWO_PI, neighborhood_measure
from .criteria import conjugate_function
from .errors import InvalidParameter, ResolutionExceeded
from .symbols import OuterSymbol, PolynomialSymbol, ScaledRotationSymbol, Symbol

_CROSSING_RESOLUTION = TWO_PI * 1e-6
_MAX_CROSSINGS = 4096


@dataclass(frozen=True)
class LevelSetProfile:
    """Sampled level-set measures |E(s)| at sorted levels s."""

    s: np.ndarray
    measure: np.ndarray
    method: str          # "exact-arc" | "boundary-sampling"
    resolution: float    # angular resolution of the sampling route, 0 if exact

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        m = np.asarray(self.measure, dtype=float)
        if np.any(np.diff(s) < 0):
            raise InvalidParameter("levels must be sorted")
        if np.any((m < -1e-12) | (m > 1.0 + 1e-12)):
            raise InvalidParameter("measures must lie in [0, 1]")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "measure", np.clip(m, 0.0, 1.0))

    def rows(self):
        return list(zip(self.s.tolist(), self.measure.tolist()))


def level_set_profile(phi: Symbol, s_grid, method: str = "auto"
                      ) -> LevelSetProfile:
    """Measure of the boundary super-level sets of |phi| at each level.

    For outer symbols the exact route inverts the weight:
    |E(s)| = |K_t| with t = h^-1(log(1/s)).  ``method`` may force
    "boundary-sampling" to cross-check the exact route.
    """
    s = np.asarray(s_grid, dtype=float)
    if np.any((s < 0.0) | (s >= 1.0)):
        raise InvalidParameter("levels must lie in [0, 1)")
    if np.any(np.diff(s) < 0):
        raise InvalidParameter("level grid must be sorted")

    if method not in ("auto", "exact-arc", "boundary-sampling"):
        raise InvalidParameter(f"unknown method {method!r}")
    use_exact = isinstance(phi, OuterSymbol) and method != "boundary-sampling"
    if method == "exact-arc" and not isinstance(phi, OuterSymbol):
        raise InvalidParameter("exact-arc route requires an outer symbol")

    if use_exact:
        with np.errstate(divide="ignore"):
            levels = np.where(s > 0.0, np.log(1.0 / np.where(s > 0, s, 1.0)),
                              np.inf)
        t = np.where(np.isinf(levels), np.pi, phi.weight.inverse(
            np.minimum(levels, phi.weight.h_max)))
        t = np.where(levels >= phi.weight.h_max, np.pi, t)
        meas = np.asarray([neighborhood_measure(phi.contact_set, tt)
                           for tt in np.atleast_1d(t)], dtype=float)
        return LevelSetProfile(s, meas, "exact-arc", 0.0)

    meas = _sampled_level_measures(phi, s)
    return LevelSetProfile(s, meas, "boundary-sampling", _CROSSING_RESOLUTION)


def _sampled_level_measures(phi: Symbol, s: np.ndarray) -> np.ndarray:
    base = 1 << 13
    theta = np.arange(base) * (TWO_PI / base)
    mod = np.asarray(phi.boundary_modulus(theta), dtype=float)
    out = np.empty(len(s))
    for i, level in enumerate(s):
        above = mod >= level
        flips = np.nonzero(above != np.roll(above, -1))[0]
        if len(flips) > _MAX_CROSSINGS:
            raise ResolutionExceeded("too many level crossings to refine")
        if len(flips) == 0:
            out[i] = 1.0 if above[0] else 0.0
            continue
        # bisect each crossing inside its grid cell
        lo = theta[flips]
        hi = lo + TWO_PI / base
        for _ in range(int(np.ceil(np.log2(TWO_PI / base / _CROSSING_RESOLUTION)))):
            mid = 0.5 * (lo + hi)
            mid_above = np.asarray(phi.boundary_modulus(mid)) >= level
            same_as_left = mid_above == above[flips]
            lo = np.where(same_as_left, mid, lo)
            hi = np.where(same_as_left, hi, mid)
        cross = np.sort(0.5 * (lo + hi) % TWO_PI)
        # integrate the indicator between consecutive crossings
        segs = np.concatenate([cross, [cross[0] + TWO_PI]])
        mids = 0.5 * (segs[:-1] + segs[1:])
        inside = np.asarray(phi.boundary_modulus(mids)) >= level
        out[i] = float(np.sum(np.diff(segs)[inside]) / TWO_PI)
    return out


# ---------------------------------------------------------------------------
# boundary trace and dyadic boxes
# ---------------------------------------------------------------------------

def boundary_trace(phi: Symbol, theta, *, tol: float = 2e-6):
    """(modulus, argument) of the boundary values of phi at angles theta.

    Outer symbols get their argument from the principal-value conjugate of
    the exponent trace (with a sign flip); polynomials and rotations are
    evaluated directly on the circle.
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(phi, ScaledRotationSymbol):
        return (np.full(theta.shape, phi.s),
                np.mod(phi.angle + theta, TWO_PI))
    if isinstance(phi, PolynomialSymbol):
        vals = phi.boundary_values(theta)
        return np.abs(vals), np.mod(np.angle(vals), TWO_PI)
    if isinstance(phi, OuterSymbol):
        mod = phi.boundary_modulus(theta)
        arg = -conjugate_function(phi.trace, theta, tol=tol)
        return mod, np.mod(arg, TWO_PI)
    raise InvalidParameter(f"unsupported symbol variant {phi.variant!r}")


@dataclass(frozen=True)
class DyadicGrid:
    """Level-n dyadic decomposition of the disc into 2^n angular sectors.

    Ring boxes R(n, j) live in the annulus 1 - 2^-n <= r < 1 - 2^-(n+1);
    Carleson boxes W(n, j) extend from 1 - 2^-n to the boundary.  Both use
    angular sectors [2 pi j / 2^n, 2 pi (j+1) / 2^n).
    """

    level: int

    @property
    def n_boxes(self) -> int:
        return 1 << self.level

    @property
    def inner_radius(self) -> float:
        return 1.0 - 2.0 ** (-self.level)

    def sector_of(self, angles) -> np.ndarray:
        width = TWO_PI / self.n_boxes
        j = np.floor(np.mod(angles, TWO_PI) / width).astype(int)
        return np.minimum(j, self.n_boxes - 1)

    def ring_mask(self, radii) -> np.ndarray:
        return (radii >= self.inner_radius) & (radii < 1.0 - 2.0 ** (-self.level - 1))

    def carleson_mask(self, radii) -> np.ndarray:
        return radii >= self.inner_radius


def pullback_box_measures(phi: Symbol, level: int, *, grid_size: int | None = None,
                          trace_tol: float = 2e-6) -> np.ndarray:
    """m_phi of every Carleson box W(level, j), j = 0..2^level - 1.

    The boundary trace is sampled on an equispaced grid of
    max(2^(level+6), 2^12) angles (modulus-one samples bin by argument) and
    each sample is assigned to its box; measures are counts over grid size.
    """
    if level > 14:
        raise InvalidParameter("box level capped at 14")
    grid = DyadicGrid(level)
    m = grid_size or max(1 << (level + 6), 1 << 12)
    theta = np.arange(m) * (TWO_PI / m)
    mod, arg = boundary_trace(phi, theta, tol=trace_tol)
    in_ring = mod >= grid.inner_radius
    sectors = grid.sector_of(arg[in_ring])
    # resolution guard: wildly oscillating traces would alias the boxes
    changes = np.count_nonzero(np.diff(sectors)) if len(sectors) else 0
    if changes > m // 2:
        raise ResolutionExceeded("trace crosses box boundaries faster than the grid")
    counts = np.bincount(sectors, minlength=grid.n_boxes)
    return counts / float(m)


def compactness_diagnostic(phi: Symbol, h_list, *, zeta_grid: int = 1 << 10,
                           trace_grid: int = 1 << 14):
    """sup_zeta m_phi(W(zeta, h)) / h for each window size h.

    A sequence decreasing toward zero suggests compactness on the Hardy
    space; a ratio bounded below suggests the opposite.  Returns a list of
    (h, sup ratio) pairs.
    """
    h_arr = np.asarray(h_list, dtype=float)
    if np.any((h_arr <= 0) | (h_arr > 0.25)):
        raise InvalidParameter("window sizes must lie in (0, 1/4]")
    theta = np.arange(trace_grid) * (TWO_PI / trace_grid)
    mod, arg = boundary_trace(phi, theta)
    zetas = np.arange(zeta_grid) * (TWO_PI / zeta_grid)
    rows = []
    for h in sorted(h_arr, reverse=True):
        sel = np.sort(arg[mod >= 1.0 - h])
        if len(sel) == 0:
            rows.append((float(h), 0.0))
            continue
        # count trace samples within angular distance h of each window center
        ext = np.concatenate([sel, sel + TWO_PI])
        lo = np.searchsorted(ext, zetas - h)
        hi = np.searchsorted(ext, zetas + h, side="right")
        lo2 = np.searchsorted(ext, zetas + TWO_PI - h)
        hi2 = np.searchsorted(ext, zetas + TWO_PI + h, side="right")
        counts = np.maximum(hi - lo, hi2 - lo2)
        sup_measure = counts.max() / float(trace_grid)
        rows.append((float(h), float(sup_measure / h)))
    return rows
