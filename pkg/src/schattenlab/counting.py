"""Counting functions of a symbol and their area measures.

For alpha in [0, 1] the generalized counting function sums (1-|w|)^alpha
over the preimages w of a point, and its area measure mu(Omega) integrates
it over a region.  Two routes are implemented:

* change of variables (default): mu(Omega) equals
  (1/(1+alpha)) * Integral 1_Omega(phi(z)) |phi'(z)|^2 dA_alpha(z),
  estimated by stratified Monte Carlo.  This needs no root finding and
  works for every symbol variant.
* root counting (oracle, polynomials only): companion-matrix roots of
  phi(w) = z with multiplicity clustering.

Dyadic Luecking-type sums aggregate box measures level by level with the
weight 2^((2+alpha) n p / 2); their growth exponent across levels is the
divergence diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary_sets import TWO_PI
from .errors import InvalidParameter, NonFiniteIntegrand, RootFindingFailed
from .levelsets import DyadicGrid, pullback_box_measures
from .quadrature import fit_dyadic_exponent, growth_flags
from .sampling import StratifiedSample, sample_disc_alpha
from .symbols import PolynomialSymbol, Symbol

_MAX_DEGREE = 64


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Measurable region of the closed disc for counting-measure queries."""

    kind: str                 # "disc" | "ring_box" | "carleson_box"
    level: int = 0
    index: int = 0

    @staticmethod
    def disc() -> "Region":
        return Region("disc")

    @staticmethod
    def ring_box(level: int, index: int) -> "Region":
        return Region("ring_box", level, index)

    @staticmethod
    def carleson_box(level: int, index: int) -> "Region":
        return Region("carleson_box", level, index)

    def indicator(self, w: np.ndarray) -> np.ndarray:
        r = np.abs(w)
        if self.kind == "disc":
            return np.ones(w.shape, dtype=bool)
        grid = DyadicGrid(self.level)
        if self.kind == "ring_box":
            mask = grid.ring_mask(r)
        elif self.kind == "carleson_box":
            mask = grid.carleson_mask(r)
        else:
            raise InvalidParameter(f"unknown region kind {self.kind!r}")
        return mask & (grid.sector_of(np.angle(w)) == self.index)

    def describe(self) -> str:
        if self.kind == "disc":
            return "disc"
        return f"{self.kind}(n={self.level}, j={self.index})"


@dataclass(frozen=True)
class CountingMeasureReport:
    alpha: float
    region: str
    value: float
    stderr: float
    method: str
    samples: int
    seed: int | None = None

    def rows(self):
        return [(self.region, self.value, self.stderr, self.samples)]


# ---------------------------------------------------------------------------
# change-of-variables route
# ---------------------------------------------------------------------------

def _transported_sample(phi: Symbol, alpha: float, samples: int, seed: int,
                        annuli: int = 16):
    sample = sample_disc_alpha(alpha, samples, seed, annuli=annuli)
    vals, ders = phi.eval_many(sample.z)
    jac = np.abs(ders) ** 2
    if not np.all(np.isfinite(jac)):
        raise NonFiniteIntegrand("|phi'|^2 overflowed inside the disc")
    return sample, vals, jac


def counting_measure(phi: Symbol, alpha: float, region: Region, *,
                     samples: int = 1_000_000, seed: int = 0,
                     annuli: int = 16) -> CountingMeasureReport:
    """Monte Carlo estimate of the counting-function area measure of a region.

    Fixed seed recorded in the report; identical seeds reproduce identical
    estimates.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameter("alpha must lie in [0, 1]")
    sample, vals, jac = _transported_sample(phi, alpha, samples, seed, annuli)
    integrand = jac * region.indicator(vals)
    total, err = sample.estimate(integrand)
    scale = 1.0 / (1.0 + alpha)
    return CountingMeasureReport(alpha=alpha, region=region.describe(),
                                 value=scale * total, stderr=scale * err,
                                 method="change-of-variables",
                                 samples=len(sample.z), seed=seed)


# ---------------------------------------------------------------------------
# root-counting oracle
# ---------------------------------------------------------------------------

def nevanlinna_counting(phi: PolynomialSymbol, alpha: float, z: complex,
                        *, cluster_tol: float = 1e-8) -> float:
    """Sum of (1-|w|)^alpha over the interior preimages w of z under phi.

    Companion-matrix root finding; the cluster tolerance merges numerically
    split multiple roots (each root contributes once per multiplicity,
    which the clustering preserves by construction).
    """
    if not isinstance(phi, PolynomialSymbol):
        raise InvalidParameter("root counting requires a polynomial symbol")
    if phi.degree < 1:
        raise InvalidParameter("polynomial degree must be >= 1")
    if phi.degree > _MAX_DEGREE:
        raise RootFindingFailed(f"degree > {_MAX_DEGREE} rejected")
    if abs(z) >= 1.0:
        raise InvalidParameter("counting function defined for |z| < 1")
    c = phi.coefficients.astype(complex).copy()
    c[0] -= z
    roots = np.roots(c[::-1])
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailed("companion matrix produced non-finite roots")
    # cluster_tol only matters for diagnostics; the sum already counts
    # multiplicity because np.roots repeats multiple roots.
    inside = roots[np.abs(roots) < 1.0 - cluster_tol * 0.0 - 0.0]
    inside = inside[np.abs(inside) < 1.0]
    return float(np.sum((1.0 - np.abs(inside)) ** alpha))


def counting_measure_by_roots(phi: PolynomialSymbol, alpha: float,
                              region: Region, *, radial_order: int = 24,
                              angular_order: int = 24) -> float:
    """Quadrature of the counting function over a box or the whole disc.

    Oracle route for polynomial symbols: tensor Gauss rule in (r, theta)
    over the region with N evaluated by root counting at every node.
    """
    if region.kind == "disc":
        r0, r1, t0, t1 = 0.0, 1.0 - 1e-7, 0.0, TWO_PI
    else:
        grid = DyadicGrid(region.level)
        r0 = grid.inner_radius
        r1 = 1.0 - 2.0 ** (-region.level - 1) if region.kind == "ring_box" \
            else 1.0 - 1e-7
        width = TWO_PI / grid.n_boxes
        t0, t1 = region.index * width, (region.index + 1) * width
    xr, wr = np.polynomial.legendre.leggauss(radial_order)
    xt, wt = np.polynomial.legendre.leggauss(angular_order)
    r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * xr
    t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xt
    wr = 0.5 * (r1 - r0) * wr
    wt = 0.5 * (t1 - t0) * wt
    total = 0.0
    for ri, wri in zip(r, wr):
        for ti, wti in zip(t, wt):
            n_val = nevanlinna_counting(phi, alpha, ri * np.exp(1j * ti))
            total += wri * wti * n_val * ri
    return total / np.pi  # normalized area measure


# ---------------------------------------------------------------------------
# dyadic Luecking-type sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LueckingSums:
    alpha: float
    p: float
    levels: np.ndarray
    sums: np.ndarray              # ring-box route (Monte Carlo)
    stderr: np.ndarray
    hardy_sums: np.ndarray | None  # Carleson-box route, alpha = 1 only
    growth_exponent: float | None
    convergent: bool
    divergent: bool
    seed: int | None
    diagnostic_refused: bool = False

    def flagged(self) -> str:
        if self.diagnostic_refused:
            return "refused"
        if self.convergent:
            return "convergent"
        if self.divergent:
            return "divergent"
        return "inconclusive"


def luecking_sums(phi: Symbol, alpha: float, p: float, n_max: int, *,
                  samples: int = 1_000_000, seed: int = 0,
                  stderr_budget: float = 0.10) -> LueckingSums:
    """Per-level dyadic sums 2^((2+alpha)np/2) Sum_j mu(R(n,j))^(p/2).

    The growth exponent rho fitted over the last four levels classifies the
    tail: convergent when rho < -0.1, divergent when rho > 0.1, otherwise
    inconclusive.  When alpha = 1 the Carleson-box variant
    2^(np/2) Sum_j m_phi(W(n,j))^(p/2) is computed as well (deterministic,
    from the boundary trace) and is used for the classification, since it
    carries no Monte Carlo noise.  The Monte Carlo route refuses the
    diagnostic when standard errors exceed ``stderr_budget`` of the level
    sums in the fitted window.
    """
    if p < 2:
        raise InvalidParameter("p must be >= 2")
    if n_max > 12:
        raise InvalidParameter("levels capped at 12")
    sample, vals, jac = _transported_sample(phi, alpha, samples, seed)
    radii = np.abs(vals)
    angles = np.angle(vals)
    scale = 1.0 / (1.0 + alpha)

    levels = np.arange(n_max + 1)
    sums = np.zeros(len(levels))
    errs = np.zeros(len(levels))
    for n in levels:
        grid = DyadicGrid(int(n))
        mask = grid.ring_mask(radii)
        sectors = grid.sector_of(angles)
        weight = 2.0 ** ((2.0 + alpha) * n * p / 2.0)
        box_vals = np.zeros(grid.n_boxes)
        box_errs = np.zeros(grid.n_boxes)
        if np.any(mask):
            contrib = sample.weights * jac * mask
            box_vals = scale * np.bincount(sectors, weights=contrib,
                                           minlength=grid.n_boxes)
            # crude per-box delta-method error from the pooled variance
            sq = np.bincount(sectors, weights=contrib ** 2,
                             minlength=grid.n_boxes)
            box_errs = scale * np.sqrt(np.maximum(sq, 0.0))
        powered = box_vals ** (p / 2.0)
        sums[n] = weight * float(np.sum(powered))
        grad = (p / 2.0) * np.where(box_vals > 0, box_vals ** (p / 2.0 - 1.0), 0.0)
        errs[n] = weight * float(np.sqrt(np.sum((grad * box_errs) ** 2)))

    hardy = None
    if abs(alpha - 1.0) < 1e-12:
        hardy = np.array([
            2.0 ** (n * p / 2.0)
            * float(np.sum(pullback_box_measures(phi, int(n)) ** (p / 2.0)))
            for n in levels
        ])

    basis = hardy if hardy is not None else sums
    rho = fit_dyadic_exponent(levels, basis)
    convergent, divergent = growth_flags(rho)

    refused = False
    if hardy is None:
        window = sums[-4:]
        werr = errs[-4:]
        live = window > 0
        if np.any(live) and np.any(werr[live] > stderr_budget * window[live]):
            refused = True
            convergent = divergent = False
    return LueckingSums(alpha=alpha, p=p, levels=levels, sums=sums,
                        stderr=errs, hardy_sums=hardy, growth_exponent=rho,
                        convergent=convergent, divergent=divergent,
                        seed=seed, diagnostic_refused=refused)
