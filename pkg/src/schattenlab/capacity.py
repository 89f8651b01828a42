"""Fourier-side energies, equilibrium measures and capacities on the circle.

For a probability measure mu on the circle and 0 <= alpha < 1 the energy is

    I_alpha(mu) = Sum_{n>=1} |mu_hat(n)|^2 / n^(1-alpha),

and the capacity of a closed set is the reciprocal of the minimal energy
over probability measures supported on it.  Energies are always truncated
at an explicit n_max, which is the discretization of record: capacities are
labelled with it and never extrapolated.  Minimization runs projected
gradient descent with a fixed step on the probability simplex, which stays
robust when the optimal measure puts no mass on most nodes (thin sets).

alpha = 0 uses the same truncated kernel Sum cos(n t)/n, equivalent to the
classical logarithmic capacity up to normalization (no conversion constant
is applied).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import hyp2f1

from .boundary_sets import TWO_PI, BoundarySet
from .criteria import CriterionResult
from .errors import (InvalidParameter, MaxIterations, NonFiniteIntegrand,
                     RatioOutOfRange, RootIsolationFailed)
from .quadrature import (ShellIntegrals, adaptive_integral, fit_dyadic_exponent,
                         graded_edges, growth_flags, panel_nodes)
from .sampling import sample_disc_alpha
from .symbols import Symbol

_EQUILIBRIUM_WINDOW = 100     # stall window of the optimizer
_EQUILIBRIUM_STALL = 1e-10    # absolute energy decrease over the window


# ---------------------------------------------------------------------------
# measures and energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleMeasure:
    """Probability measure on a grid of circle nodes with cached spectrum."""

    nodes: np.ndarray
    weights: np.ndarray
    n_max: int
    fourier: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float) % TWO_PI
        w = np.asarray(self.weights, dtype=float)
        if nodes.shape != w.shape:
            raise InvalidParameter("nodes and weights must align")
        if np.any(w < -1e-14):
            raise InvalidParameter("weights must be nonnegative")
        w = np.maximum(w, 0.0)
        total = float(np.sum(w))
        if abs(total - 1.0) > 1e-12:
            raise InvalidParameter("weights must sum to one")
        fourier = self.fourier
        if fourier is None:
            n = np.arange(self.n_max + 1)
            fourier = np.exp(-1j * np.outer(n, nodes)) @ w
        fourier.setflags(write=False)
        nodes.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "fourier", fourier)

    def mu_hat(self, n) -> np.ndarray:
        return self.fourier[np.asarray(n, dtype=int)]

    def rows(self):
        return list(zip(self.nodes.tolist(), self.weights.tolist()))


def alpha_energy(mu: CircleMeasure, alpha: float, n_max: int | None = None):
    """Truncated energy partial sum and a log-log tail slope of its terms.

    A tail slope >= -1 means the term sequence alone already forces
    divergence of the full series (point masses: slope alpha - 1).
    """
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameter("energy defined for alpha in [0, 1)")
    n_max = mu.n_max if n_max is None else int(n_max)
    if n_max < 64:
        raise InvalidParameter("n_max must be at least 64")
    if n_max > mu.n_max:
        raise InvalidParameter("measure spectrum shorter than requested n_max")
    n = np.arange(1, n_max + 1, dtype=float)
    terms = np.abs(mu.mu_hat(np.arange(1, n_max + 1))) ** 2 * n ** (alpha - 1.0)
    partial = float(np.sum(terms))
    half = terms[n_max // 2:]
    idx = n[n_max // 2:]
    keep = half > 1e-300
    slope = None
    if np.count_nonzero(keep) >= 2:
        slope = float(np.polyfit(np.log(idx[keep]), np.log(half[keep]), 1)[0])
    return partial, slope


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based rule)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, len(v) + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0)[0][-1]
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


def _equilibrium_nodes(K: BoundarySet, m_nodes: int) -> np.ndarray:
    """Nodes on the arcs of K, spacing anchored at each arc start.

    Counts are proportional to arc length; point arcs get one node.  Equal
    per-arc spacing anchored at the start keeps node sets nested for nested
    same-anchor arcs, which makes capacity monotonicity exact at equal
    resolution.
    """
    if K.is_empty:
        raise InvalidParameter("equilibrium measure needs a nonempty set")
    if m_nodes > 4096:
        raise InvalidParameter("node count capped at 4096")
    lengths = K.arcs[:, 1] - K.arcs[:, 0]
    total = float(np.sum(lengths))
    nodes = []
    for (a, b), ln in zip(K.arcs, lengths):
        if ln <= 0:
            nodes.append(np.asarray([a]))
            continue
        cnt = max(1, int(round(m_nodes * ln / total))) if total > 0 else 1
        step = ln / cnt
        nodes.append(a + (np.arange(cnt) + 0.5) * step)
    return np.concatenate(nodes) % TWO_PI


@dataclass(frozen=True)
class EquilibriumInfo:
    energy: float
    iterations: int
    gradient_spread: float     # max-min of the potential on the support
    step: float


def equilibrium_measure(K: BoundarySet, alpha: float, m_nodes: int, *,
                        n_max: int = 512, max_iter: int = 400_000,
                        initial: np.ndarray | None = None,
                        support_tol: float = 1e-6):
    """Minimize the truncated energy over probability measures on K's nodes.

    Projected gradient descent with fixed step 1/(2 lambda_max) and simplex
    projection; terminates once the energy decrease over a 100-iteration
    window drops below 1e-10.  Returns (CircleMeasure, EquilibriumInfo).
    Raises MaxIterations with the best iterate attached if the stall rule
    never fires.
    """
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameter("alpha must lie in [0, 1)")
    theta = _equilibrium_nodes(K, m_nodes)
    m = len(theta)
    n = np.arange(1, n_max + 1, dtype=float)
    c = n ** (alpha - 1.0)
    # Gram matrix Q[j,k] = Sum_n c_n cos(n (theta_j - theta_k))
    V = np.exp(1j * np.outer(n, theta))
    Q = np.real(V.conj().T @ (c[:, None] * V))

    w = np.full(m, 1.0 / m) if initial is None else np.asarray(initial, float)
    w = project_to_simplex(w)

    # power iteration for the curvature bound
    x = np.full(m, 1.0 / np.sqrt(m))
    for _ in range(30):
        y = Q @ x
        nrm = np.linalg.norm(y)
        if nrm == 0:
            break
        x = y / nrm
    lam_max = float(x @ (Q @ x))
    step = 1.0 / (2.0 * max(lam_max, 1e-12))

    energy = float(w @ (Q @ w))
    window_best = energy
    iterations = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (Q @ w)
        w = project_to_simplex(w - step * grad)
        iterations = it
        if it % _EQUILIBRIUM_WINDOW == 0:
            energy = float(w @ (Q @ w))
            if window_best - energy < _EQUILIBRIUM_STALL:
                break
            window_best = min(window_best, energy)
    else:
        grad = 2.0 * (Q @ w)
        raise MaxIterations("equilibrium optimizer hit its iteration budget",
                            best=w, gradient_norm=float(np.linalg.norm(grad)))

    grad = 2.0 * (Q @ w)
    support = w > support_tol
    spread = float(np.max(grad[support]) - np.min(grad[support])) \
        if np.any(support) else 0.0
    energy = float(w @ (Q @ w))
    w = w / np.sum(w)
    measure = CircleMeasure(nodes=theta, weights=w, n_max=n_max)
    return measure, EquilibriumInfo(energy=energy, iterations=iterations,
                                    gradient_spread=spread, step=step)


@dataclass(frozen=True)
class CapacityEstimate:
    alpha: float
    n_max_list: tuple
    energies: tuple
    capacities: tuple
    iterations: tuple

    def final(self) -> float:
        return self.capacities[-1]

    def records(self):
        return [{"alpha": self.alpha, "n_max": n, "capacity": c,
                 "energy": e, "iterations": i}
                for n, c, e, i in zip(self.n_max_list, self.capacities,
                                      self.energies, self.iterations)]


def capacity_estimate(K: BoundarySet, alpha: float, *,
                      n_max_list=(256, 512, 1024), m_nodes: int = 256
                      ) -> CapacityEstimate:
    """1/(minimal truncated energy) of K at increasing spectral truncations.

    Energies are nondecreasing in n_max (the objectives are nested sums of
    nonnegative terms), so the capacity sequence decreases; each estimate is
    labelled by its n_max.  Warm starts reuse the previous minimizer.
    """
    energies, caps, iters = [], [], []
    warm = None
    for n_max in n_max_list:
        mu, info = equilibrium_measure(K, alpha, m_nodes, n_max=int(n_max),
                                       initial=warm)
        warm = mu.weights
        energies.append(info.energy)
        caps.append(np.inf if info.energy <= 0 else 1.0 / info.energy)
        iters.append(info.iterations)
    return CapacityEstimate(alpha=alpha, n_max_list=tuple(int(n) for n in n_max_list),
                            energies=tuple(energies), capacities=tuple(caps),
                            iterations=tuple(iters))


# ---------------------------------------------------------------------------
# integral test for vanishing contact-set capacity
# ---------------------------------------------------------------------------

def capacity_test_integral(phi: Symbol, alpha: float, *,
                           samples: int = 400_000, seed: int = 0,
                           annuli: int = 20) -> CriterionResult:
    """Monte Carlo of Integral |phi'|^2 dA_alpha / ((1-|phi|^2)^2 log(e/(1-|phi|^2))).

    Finiteness forces the contact set to have vanishing alpha-capacity.  The
    regularized logarithm log(e/x) keeps the integrand bounded at interior
    points where phi is small (the raw log(1/x) form would blow up at the
    zeros of phi, which the equivalent-series route never sees).  Divergence
    is diagnosed from the per-annulus partial sums.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter("capacity test defined for alpha in (0, 1)")
    sample = sample_disc_alpha(alpha, samples, seed, annuli=annuli)
    vals, ders = phi.eval_many(sample.z)
    one_minus = np.maximum(1.0 - np.abs(vals) ** 2, 1e-300)
    integrand = np.abs(ders) ** 2 / (one_minus ** 2 * np.log(np.e / one_minus))
    if not np.all(np.isfinite(integrand)):
        raise NonFiniteIntegrand("capacity-test integrand overflowed")

    n_strata = len(sample.stratum_mass)
    partials = np.empty(n_strata)
    for k in range(n_strata):
        sel = sample.stratum == k
        partials[k] = sample.stratum_mass[k] * float(np.mean(integrand[sel]))
    # exclude the capped catch-all stratum from the trend fit
    rho = fit_dyadic_exponent(np.arange(n_strata - 1), partials[:-1])
    convergent, divergent = growth_flags(rho)
    shells = ShellIntegrals(upper=1.0, integrals=partials)
    return CriterionResult(
        criterion="capacity-test", divergent=divergent,
        value=None if divergent else float(np.sum(partials)), shells=shells,
        params={"alpha": alpha, "samples": int(samples), "seed": int(seed),
                "growth_exponent": rho},
        inconclusive=not (convergent or divergent))


# ---------------------------------------------------------------------------
# proved-equivalence ratio checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceChecks:
    series_ratios: np.ndarray       # boundary series vs closed form
    kernel_ratios: dict             # (d, c, sigma) -> ratios over the z grid
    window: float

    def all_within_window(self) -> bool:
        lo, hi = 1.0 / self.window, self.window
        if np.any((self.series_ratios < lo) | (self.series_ratios > hi)):
            return False
        for ratios in self.kernel_ratios.values():
            if np.any((ratios < lo) | (ratios > hi)):
                return False
        return True


def kernel_equivalence_checks(*, k_range=range(1, 13),
                              kernel_params=((2.0, 0.0, 0.0), (1.0, 0.0, 1.0),
                                             (0.5, 0.5, 2.0)),
                              window: float = 50.0) -> EquivalenceChecks:
    """Numeric two-sided checks of proved kernel equivalences.

    (a) 1/((1-x^2)^2 log(e/(1-x^2))) against the power series
        Sum (1+n)/log(e(1+n)) x^(2n) on x = 1 - 2^-k.
    (b) Integral_D dA_c(w) / (|1-z conj(w)|^(2+c+d) log^sigma(e/(1-|w|^2)))
        against (1-|z|^2)^-d log^-sigma(e/(1-|z|^2)), using the exact
        angular mean 2F1(lam, lam; 1; |z w|^2), lam = (2+c+d)/2.

    Ratios outside [1/window, window] raise RatioOutOfRange: both sides are
    proved equivalent, so a violation is an implementation bug.
    """
    ks = np.asarray(list(k_range))
    xs = 1.0 - 2.0 ** (-ks.astype(float))

    series_ratios = np.empty(len(xs))
    for i, x in enumerate(xs):
        lhs = 1.0 / ((1.0 - x ** 2) ** 2 * np.log(np.e / (1.0 - x ** 2)))
        total, n0 = 0.0, 0
        block = 65536
        while True:
            n = np.arange(n0, n0 + block, dtype=float)
            terms = (1.0 + n) / np.log(np.e * (1.0 + n)) * x ** (2.0 * n)
            total += float(np.sum(terms))
            n0 += block
            if terms[-1] < 1e-16 * max(total, 1e-300):
                break
            if n0 > 5e7:
                raise RatioOutOfRange("series truncation did not close")
        series_ratios[i] = total / lhs

    kernel_ratios = {}
    for d, c, sigma in kernel_params:
        lam = (2.0 + c + d) / 2.0
        ratios = np.empty(len(xs))
        for i, r_z in enumerate(xs):
            edges = graded_edges(0.0, 1.0, scale=(1.0 - r_z) / 256.0,
                                 toward="right")

            def radial(rho):
                u2 = np.clip((r_z * rho) ** 2, 0.0, 1.0 - 1e-14)
                ang = hyp2f1(lam, lam, 1.0, u2)
                dens = (1.0 + c) * (1.0 - rho ** 2) ** c * 2.0 * rho
                reg = np.log(np.e / (1.0 - rho ** 2)) ** sigma
                return dens * ang / reg

            lhs = adaptive_integral(radial, edges, tol=1e-8, order=12,
                                    what="kernel equivalence integral")
            rhs = (1.0 - r_z ** 2) ** (-d) \
                / np.log(np.e / (1.0 - r_z ** 2)) ** sigma
            ratios[i] = lhs / rhs
        kernel_ratios[(d, c, sigma)] = ratios

    report = EquivalenceChecks(series_ratios=series_ratios,
                               kernel_ratios=kernel_ratios, window=window)
    if not report.all_within_window():
        raise RatioOutOfRange(
            "a proved two-sided equivalence left its numeric window "
            f"[1/{window}, {window}]; this is an implementation bug")
    return report


# ---------------------------------------------------------------------------
# capacitary weak-type inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeakTypeReport:
    alpha: float
    norm_sq: float
    rows: list                  # (t, set measure, capacity, cap*t^2/norm^2)
    constant: float             # max finite ratio over the tested pairs


def weak_type_check(coefficients, alpha: float, t_list, *,
                    n_max: int = 512, m_nodes: int = 128,
                    grid: int = 8192) -> WeakTypeReport:
    """Capacity of polynomial super-level sets against the norm bound.

    For a polynomial f with Dirichlet-scale norm ||f||, each threshold t
    produces the boundary set {|f| >= t}; its capacity estimate times
    t^2/||f||^2 must stay below one uniform constant.  Super-level sets
    covering the whole circle have infinite truncated capacity (the uniform
    measure has zero energy) and are excluded from the constant.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter("weak-type check defined for alpha in (0, 1)")
    coeffs = np.atleast_1d(np.asarray(coefficients, dtype=complex))
    n = np.arange(len(coeffs), dtype=float)
    norm_sq = float(np.sum((n + 1.0) ** (1.0 - alpha) * np.abs(coeffs) ** 2))

    theta = np.arange(grid) * (TWO_PI / grid)
    boundary = np.polyval(coeffs[::-1], np.exp(1j * theta))
    mod = np.abs(boundary)

    def superlevel_arcs(t):
        above = mod >= t
        if np.all(above):
            return BoundarySet.full_circle()
        if not np.any(above):
            return BoundarySet.empty()
        flips = np.nonzero(above != np.roll(above, -1))[0]
        if len(flips) % 2 != 0:
            raise RootIsolationFailed("odd crossing count")
        crossings = []
        for i in flips:
            a, b = theta[i], theta[i] + TWO_PI / grid
            fa = float(np.abs(np.polyval(coeffs[::-1], np.exp(1j * a)))) - t
            root = brentq(
                lambda x: float(np.abs(np.polyval(coeffs[::-1],
                                                  np.exp(1j * x)))) - t,
                a, b, xtol=1e-13)
            crossings.append((root, fa > 0))
        crossings.sort()
        arcs = []
        pts = [cr for cr, _ in crossings]
        for i, (cr, was_above) in enumerate(crossings):
            if was_above:
                continue  # segment after this crossing is above the level
            end = pts[(i + 1) % len(pts)]
            if end < cr:
                arcs.append([cr, TWO_PI])
                if end > 0:
                    arcs.append([0.0, end])
            else:
                arcs.append([cr, end])
        return BoundarySet(np.asarray(arcs))

    rows = []
    ratios = []
    for t in t_list:
        t_eff = float(t)
        for attempt in range(2):
            try:
                sl = superlevel_arcs(t_eff)
                break
            except RootIsolationFailed:
                if attempt == 1:
                    raise
                t_eff += 1e-9
        if sl.is_empty:
            rows.append((t_eff, 0.0, 0.0, 0.0))
            continue
        est = capacity_estimate(sl, alpha, n_max_list=(n_max,),
                                m_nodes=m_nodes)
        cap = est.final()
        ratio = cap * t_eff ** 2 / norm_sq
        rows.append((t_eff, sl.measure, cap, ratio))
        if np.isfinite(ratio):
            ratios.append(ratio)
    constant = float(max(ratios)) if ratios else 0.0
    return WeakTypeReport(alpha=alpha, norm_sq=norm_sq, rows=rows,
                          constant=constant)
