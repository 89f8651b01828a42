"""Panel-based Gauss-Legendre quadrature and dyadic-shell improper integrals.

Two workhorses live here.

``adaptive_integral`` integrates a vectorized callable over a fixed panel
decomposition, doubling the panel count until two successive refinements
agree to the requested relative tolerance.  Panels graded geometrically
toward a singularity (``graded_edges``) make kernels such as the Herglotz
kernel, the conjugate-function kernel, and boundary blow-ups tractable.

``dyadic_shells`` evaluates an improper integral over (0, upper] shell by
shell, shell k covering (upper*2^-k, upper*2^-(k-1)].  Divergence is decided
by a ratio test on the trailing shells: the integral is flagged divergent
when the last ``window`` consecutive shell ratios all stay at or above
``threshold``.  With the default threshold 0.95 and depth 24 the decision
boundary of the trailing window sits exactly at the critical slowly
divergent integrand 1/(t log(1/t)); anything diverging at least that fast is
flagged, anything converging faster is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureNotConverged

# Divergence rule shared by every improper-integral criterion.
RATIO_THRESHOLD = 0.95
RATIO_WINDOW = 5
MIN_SHELLS = 12
DEFAULT_SHELL_DEPTH = 24


@lru_cache(maxsize=64)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_nodes(edges, order: int = 12):
    """Gauss-Legendre nodes/weights for the panels delimited by ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two panel edges")
    x, w = _leggauss(order)
    a = edges[:-1]
    h = np.diff(edges)
    nodes = a[:, None] + (x[None, :] + 1.0) * 0.5 * h[:, None]
    weights = 0.5 * h[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def split_edges(edges):
    """Insert the midpoint of every panel (halves each panel width)."""
    edges = np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(edges.size + mids.size)
    out[0::2] = edges
    out[1::2] = mids
    return out


def graded_edges(a: float, b: float, *, scale: float, toward: str = "left",
                 growth: float = 2.0, max_panels: int = 4000):
    """Panel edges on [a, b] graded geometrically toward one endpoint.

    The panel adjacent to the graded endpoint has width ``scale`` (clipped
    to the interval); successive panels grow by ``growth``.
    """
    length = b - a
    if length <= 0:
        raise ValueError("empty interval")
    scale = min(max(scale, length * 1e-18), length)
    offsets = [0.0, scale]
    while offsets[-1] < length:
        offsets.append(min(offsets[-1] * growth, length))
        if len(offsets) > max_panels:
            raise ValueError("grading produced too many panels")
    offsets = np.asarray(offsets)
    if toward == "left":
        return a + offsets
    if toward == "right":
        return b - offsets[::-1]
    raise ValueError("toward must be 'left' or 'right'")


def merge_breakpoints(edges, breakpoints):
    """Insert interior breakpoints (kinks of the integrand) as panel edges."""
    edges = np.asarray(edges, dtype=float)
    pts = [p for p in np.atleast_1d(np.asarray(breakpoints, dtype=float))
           if edges[0] < p < edges[-1]]
    if not pts:
        return edges
    out = np.unique(np.concatenate([edges, np.asarray(pts)]))
    return out


def adaptive_integral(f, edges, *, tol: float = 1e-9, order: int = 12,
                      max_refine: int = 12, abs_floor: float = 0.0,
                      what: str = "integral"):
    """Integrate ``f`` over the panels, doubling panels until converged.

    ``f`` must accept an ndarray of nodes and return values (real or
    complex) of the same shape.  Convergence means two successive
    refinements agree to ``tol`` relative (with ``abs_floor`` guarding the
    scale for integrals near zero).
    """
    edges = np.asarray(edges, dtype=float)
    prev = None
    for _ in range(max_refine + 1):
        nodes, weights = panel_nodes(edges, order)
        val = np.asarray(f(nodes)) @ weights
        if prev is not None:
            if abs(val - prev) <= tol * max(abs(val), abs_floor, 1e-300):
                return val
        prev = val
        edges = split_edges(edges)
    raise QuadratureNotConverged(
        f"{what}: no convergence to rel. tol {tol} after {max_refine} refinements"
    )


@dataclass(frozen=True)
class ShellIntegrals:
    """Per-shell values of an improper integral over (upper*2^-depth, upper]."""

    upper: float
    integrals: np.ndarray  # index k-1 holds shell (upper*2^-k, upper*2^-(k-1)]
    skipped: int = 0       # leading shells excluded by an upper cutoff

    @property
    def depth(self) -> int:
        return self.skipped + len(self.integrals)

    @property
    def cutoff_low(self) -> float:
        return self.upper * 2.0 ** (-self.depth)

    @property
    def cutoff_high(self) -> float:
        return self.upper * 2.0 ** (-self.skipped)

    @property
    def total(self) -> float:
        return float(np.sum(self.integrals))

    def cumulative(self):
        return np.cumsum(self.integrals)

    def divergent(self, *, threshold: float = RATIO_THRESHOLD,
                  window: int = RATIO_WINDOW) -> bool:
        return trailing_ratios_divergent(self.integrals, threshold=threshold,
                                         window=window)


def dyadic_shells(f, *, upper: float, depth: int = DEFAULT_SHELL_DEPTH,
                  skip: int = 0, order: int = 16, panels_per_shell: int = 4,
                  breakpoints=()) -> ShellIntegrals:
    """Integrate ``f`` over dyadic shells of (0, upper].

    Shell k (k = 1..depth) covers (upper*2^-k, upper*2^-(k-1)]; the first
    ``skip`` shells are omitted (used when the integrand is singular at the
    upper endpoint).  Each shell uses fixed-order Gauss panels, subdivided at
    any supplied breakpoints, which is plenty for the smooth-per-shell
    integrands handled here.
    """
    if depth < MIN_SHELLS:
        raise ValueError(f"need at least {MIN_SHELLS} shells")
    vals = []
    for k in range(skip + 1, depth + 1):
        lo = upper * 2.0 ** (-k)
        hi = upper * 2.0 ** (-(k - 1))
        edges = np.linspace(lo, hi, panels_per_shell + 1)
        edges = merge_breakpoints(edges, breakpoints)
        nodes, weights = panel_nodes(edges, order)
        vals.append(float(np.asarray(f(nodes)) @ weights))
    return ShellIntegrals(upper=upper, integrals=np.asarray(vals), skipped=skip)


def trailing_ratios_divergent(integrals, *, threshold: float = RATIO_THRESHOLD,
                              window: int = RATIO_WINDOW) -> bool:
    """Ratio test on the deepest shells.

    Divergent iff the last ``window`` consecutive shell-to-shell ratios all
    sit at or above ``threshold``.  Vanishing trailing shells (compactly
    supported integrands) are never divergent.
    """
    integrals = np.asarray(integrals, dtype=float)
    if len(integrals) < window + 1:
        return False
    tail = integrals[-(window + 1):]
    if np.any(tail <= 0.0):
        return False
    ratios = tail[1:] / tail[:-1]
    return bool(np.all(ratios >= threshold))


def fit_dyadic_exponent(levels, values, *, last: int = 4):
    """Least-squares slope of log2(values) against level over the tail.

    Returns the fitted exponent rho in values ~ 2^(rho*level), or None when
    fewer than two positive tail values exist.
    """
    levels = np.asarray(levels, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    levels, values = levels[keep], values[keep]
    if len(values) < 2:
        return None
    levels, values = levels[-last:], values[-last:]
    if len(values) < 2:
        return None
    slope = np.polyfit(levels, np.log2(values), 1)[0]
    return float(slope)


def growth_flags(rho, *, dead_zone: float = 0.1):
    """Map a fitted dyadic exponent to (convergent, divergent) flags.

    A ``None`` exponent (all-zero tail) counts as convergent; exponents
    inside the dead zone leave both flags False (inconclusive).
    """
    if rho is None:
        return True, False
    return bool(rho < -dead_zone), bool(rho > dead_zone)
