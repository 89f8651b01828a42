"""Truncated-matrix spectral oracles for composition and Toeplitz operators.

Spaces.  The scale of weighted Dirichlet spaces is fixed with the exact
sequence norm ||f||^2 = Sum (n+1)^(1-alpha) |f_hat(n)|^2 (alpha = 1 is the
Hardy space, alpha = 0 the Dirichlet space, constants included); membership
questions are insensitive to equivalent-norm changes, and the exact choice
makes every oracle deterministic.  Bergman spaces A_alpha carry the monomial
norms n! Gamma(2+alpha) / Gamma(n+2+alpha).

The composition matrix holds the expansions of the powers phi^n in the
orthonormal basis; powers are iterated coefficient convolutions at twice the
truncation length, with the discarded-weighted-tail mass tracked per column.
A spectral claim should only be exported from a matrix whose tail mass is
below threshold (the ``under_resolved`` flag).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .boundary_sets import TWO_PI
from .errors import (InvalidParameter, NoConvergence, QuadratureNotConverged,
                     UnderResolvedWarning)
from .levelsets import level_set_profile
from .quadrature import (ShellIntegrals, adaptive_integral,
                         fit_dyadic_exponent, graded_edges, growth_flags,
                         merge_breakpoints, split_edges)
from .sampling import (hyperbolic_annulus_mass, sample_disc_alpha,
                       sample_hyperbolic_annulus)
from .symbols import OuterSymbol, Symbol

TAIL_MASS_THRESHOLD = 1e-8


@dataclass(frozen=True)
class SpaceParams:
    """Parameters of the Dirichlet-scale space and the Bergman oracle space."""

    alpha: float = 1.0
    bergman_alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameter("alpha must lie in [0, 1]")
        if self.bergman_alpha <= -1.0:
            raise InvalidParameter("bergman_alpha must exceed -1")

    def dirichlet_weights(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return (n + 1.0) ** (1.0 - self.alpha)

    def bergman_norm_sq(self, n) -> np.ndarray:
        """||z^n||^2 in A_alpha."""
        n = np.asarray(n, dtype=float)
        a = self.bergman_alpha
        return np.exp(gammaln(n + 1.0) + gammaln(2.0 + a)
                      - gammaln(n + 2.0 + a))


# ---------------------------------------------------------------------------
# composition matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositionMatrix:
    matrix: np.ndarray
    alpha: float
    tail_mass: np.ndarray          # relative weighted tail per column
    under_resolved: bool
    column_norms_sq: np.ndarray    # Sum_{m<N} w_m |c_m(phi^n)|^2

    @property
    def truncation(self) -> int:
        return self.matrix.shape[0]


def composition_matrix(phi: Symbol, alpha: float, n_trunc: int, *,
                       taylor_tol: float = 1e-6) -> CompositionMatrix:
    """Matrix of f -> f(phi) on the weighted Dirichlet space, truncated.

    Column n holds phi^n expanded in the orthonormal monomials
    e_m = z^m / sqrt(w_m); powers are convolved at length 2N and the
    weighted mass falling beyond the truncation is reported per column.
    """
    if n_trunc < 2 or n_trunc & (n_trunc - 1) or n_trunc > 1024:
        raise InvalidParameter("truncation must be a power of two <= 1024")
    space = SpaceParams(alpha=alpha)
    two_n = 2 * n_trunc
    coeffs = np.asarray(phi.taylor_coefficients(two_n, tol=taylor_tol),
                        dtype=complex)
    w = space.dirichlet_weights(np.arange(two_n))
    sqrt_w = np.sqrt(w[:n_trunc])

    fft_len = 4 * n_trunc
    base_hat = np.fft.fft(coeffs, fft_len)
    current = np.zeros(two_n, dtype=complex)
    current[0] = 1.0

    matrix = np.empty((n_trunc, n_trunc), dtype=complex)
    tails = np.empty(n_trunc)
    col_norms = np.empty(n_trunc)
    for n in range(n_trunc):
        weighted = w * np.abs(current) ** 2
        head = float(np.sum(weighted[:n_trunc]))
        tail = float(np.sum(weighted[n_trunc:]))
        denom = head + tail
        tails[n] = tail / denom if denom > 0 else 0.0
        col_norms[n] = head
        matrix[:, n] = current[:n_trunc] * sqrt_w / sqrt_w[n]
        current = np.fft.ifft(np.fft.fft(current, fft_len) * base_hat)[:two_n]
    under = bool(np.max(tails) > TAIL_MASS_THRESHOLD)
    if under:
        warnings.warn("composition matrix under-resolved: weighted tail mass "
                      f"{np.max(tails):.2e}", UnderResolvedWarning,
                      stacklevel=2)
    return CompositionMatrix(matrix=matrix, alpha=alpha, tail_mass=tails,
                             under_resolved=under,
                             column_norms_sq=col_norms)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    truncation: int
    values: np.ndarray           # sorted nonincreasing
    decay_slope: float | None    # log-log fit over the resolved top half
    resolved: int = 0            # count of values above 1e-7 of the leading one
    schatten: dict = field(default_factory=dict)

    def rows(self):
        return list(enumerate(self.values.tolist()))


def singular_values(matrix, *, p_list=()) -> SpectralReport:
    """Singular values with the Frobenius cross-check.

    Accepts a raw matrix or a CompositionMatrix.  On LAPACK failure the
    matrix is rescaled by its Frobenius norm and retried once.
    """
    if isinstance(matrix, CompositionMatrix):
        matrix = matrix.matrix
    m = np.asarray(matrix)
    frob_sq = float(np.sum(np.abs(m) ** 2))
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError:
        scale = np.sqrt(frob_sq) or 1.0
        try:
            s = np.linalg.svd(m / scale, compute_uv=False) * scale
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("SVD failed even after rescaling") from exc
    s = np.sort(s)[::-1]
    if frob_sq > 0 and abs(float(np.sum(s ** 2)) - frob_sq) > 1e-8 * frob_sq:
        raise NoConvergence("singular values violate the Frobenius identity")

    # Fit the decay over the top half of the *resolved* spectrum: values
    # below 1e-7 of the leading one measure the truncation (or roundoff),
    # not the operator, and would corrupt the slope.
    slope = None
    resolved = int(np.count_nonzero(s > 1e-7 * s[0])) if len(s) and s[0] > 0 \
        else 0
    if resolved >= 8:
        lo, hi = max(1, resolved // 8), max(2, resolved // 2)
        idx = np.arange(lo, hi)
        slope = float(np.polyfit(np.log(idx + 1.0), np.log(s[idx]), 1)[0])
    report = SpectralReport(truncation=min(m.shape), values=s,
                            decay_slope=slope, resolved=resolved)
    for p in p_list:
        report.schatten[p] = float(np.sum(s ** p))
    return report


@dataclass(frozen=True)
class SchattenPartial:
    p: float
    truncations: tuple
    partial_sums: tuple
    classification: str      # "convergent" | "divergent" | "inconclusive"
    decay_slope: float | None


def schatten_partial(report: SpectralReport, p: float, n_list=None, *,
                     margin: float = 0.1) -> SchattenPartial:
    """Partial sums Sum_{n<N} s_n^p plus a decay-fit growth classification.

    The heuristic is binary: summable iff the log-log decay slope of the
    resolved spectrum sits below -(1 + margin)/p.  It is honest only when
    the spectrum is resolved at the truncation; compressions whose tails are
    truncation-limited should be classified through
    ``nested_schatten_growth`` instead.
    """
    if p <= 0:
        raise InvalidParameter("p must be positive")
    s = report.values
    if n_list is None:
        n_list = (len(s),)
    sums = tuple(float(np.sum(s[:n] ** p)) for n in n_list)
    slope = report.decay_slope
    if slope is None:
        # fewer than 8 resolved values: effectively finite rank at this
        # truncation, so every p-sum closes
        cls = "convergent" if report.resolved < 8 else "inconclusive"
    elif slope < -(1.0 + margin) / p:
        cls = "convergent"
    else:
        cls = "divergent"
    report.schatten[p] = sums[-1]
    return SchattenPartial(p=p, truncations=tuple(n_list), partial_sums=sums,
                           classification=cls, decay_slope=slope)


@dataclass(frozen=True)
class NestedSchattenGrowth:
    p: float
    levels: tuple                # nested truncations, powers of two
    sums: tuple                  # Sum s_k(block N)^p per level
    increments: tuple
    divergent: bool

    @property
    def classification(self) -> str:
        return "divergent" if self.divergent else "convergent"


def nested_schatten_growth(matrix, p: float, levels=None
                           ) -> NestedSchattenGrowth:
    """Growth of Schatten partial sums across nested matrix truncations.

    The top-left N-block of a composition matrix is exactly the level-N
    compression, so the increment of Sum s_k^p from one block to the next
    plays the role of a dyadic level sum.  The shared ratio rule applies:
    divergent when the trailing increment ratios all stay at or above the
    threshold (slowly growing partial sums), convergent otherwise.  This is
    the right diagnostic when the deep spectrum of a single block is
    truncation-limited and a value-decay fit would see the cutoff instead of
    the operator.
    """
    from .quadrature import RATIO_THRESHOLD

    if isinstance(matrix, CompositionMatrix):
        matrix = matrix.matrix
    m = np.asarray(matrix)
    size = min(m.shape)
    if levels is None:
        levels, n = [], 32
        while n <= size:
            levels.append(n)
            n *= 2
    levels = tuple(int(n) for n in levels)
    if len(levels) < 3 or levels[-1] > size:
        raise InvalidParameter("need at least three nested levels inside the matrix")
    sums = []
    for n in levels:
        s = np.linalg.svd(m[:n, :n], compute_uv=False)
        sums.append(float(np.sum(s ** p)))
    inc = np.diff(np.asarray(sums))
    inc = np.maximum(inc, 0.0)
    ratios = inc[1:] / np.maximum(inc[:-1], 1e-300)
    window = min(4, len(ratios))
    divergent = bool(np.all(ratios[-window:] >= RATIO_THRESHOLD)) \
        and bool(np.all(inc[-window:] > 0))
    return NestedSchattenGrowth(p=p, levels=levels, sums=tuple(sums),
                                increments=tuple(inc.tolist()),
                                divergent=divergent)


# ---------------------------------------------------------------------------
# Hilbert-Schmidt norm on the Hardy space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HilbertSchmidtNorm:
    value: float               # sum of squared singular values, inf if divergent
    divergent: bool
    route: str
    shells: ShellIntegrals | None = None


def hilbert_schmidt_norm(phi: Symbol, *, tol: float = 1e-9
                         ) -> HilbertSchmidtNorm:
    """(1/2pi) Integral |d zeta| / (1 - |phi(zeta)|^2), or a divergence flag.

    Symbols whose boundary modulus reaches one are first screened through
    the level-set bound Integral |E(s)| (1-s)^-2 ds evaluated on dyadic
    shells; only integrands passing the ratio test are quadratured.
    """
    depth = 24
    s_grid = 1.0 - 2.0 ** (-np.arange(0, depth + 1, dtype=float))
    profile = level_set_profile(phi, s_grid)
    meas = profile.measure
    shells = []
    for k in range(1, depth + 1):
        block = 2.0 ** k  # Integral of (1-s)^-2 over the dyadic shell
        shells.append(meas[k - 1] * block * 0.5)
    sh = ShellIntegrals(upper=1.0, integrals=np.asarray(shells))
    if sh.divergent():
        return HilbertSchmidtNorm(value=np.inf, divergent=True,
                                  route="level-set bound", shells=sh)

    if isinstance(phi, OuterSymbol):
        anchors = phi.trace_kinks()
        edges = np.linspace(0.0, TWO_PI, 129)
        for a in anchors:
            for side in ("left", "right"):
                lo = a if side == "left" else max(a - 0.5, 0.0)
                hi = min(a + 0.5, TWO_PI) if side == "left" else a
                if hi - lo > 1e-9:
                    edges = merge_breakpoints(
                        edges, graded_edges(lo, hi, scale=1e-10,
                                            toward=side)[1:-1])
    else:
        edges = np.linspace(0.0, TWO_PI, 129)

    def integrand(theta):
        mod = np.asarray(phi.boundary_modulus(theta), dtype=float)
        return 1.0 / np.maximum(1.0 - mod ** 2, 1e-300)

    value = adaptive_integral(integrand, edges, tol=tol, order=12,
                              what="Hilbert-Schmidt boundary integral") / TWO_PI
    return HilbertSchmidtNorm(value=float(value), divergent=False,
                              route="boundary quadrature", shells=sh)


def hs_norm_series(phi: Symbol, *, tol: float = 1e-10,
                   max_terms: int = 4096) -> float:
    """Sum_n ||phi^n||_{H^2}^2 from Taylor coefficients (cross-check route).

    Converges geometrically when sup |phi| < 1 on the boundary; raises when
    the geometric tail cannot be bounded below ``tol``.
    """
    theta = np.arange(1 << 12) * (TWO_PI / (1 << 12))
    sup = float(np.max(phi.boundary_modulus(theta)))
    if sup >= 1.0 - 1e-12:
        raise QuadratureNotConverged(
            "series route needs sup |phi| < 1 on the boundary")
    length = 1 << 9
    coeffs = np.asarray(phi.taylor_coefficients(length), dtype=complex)
    total = 0.0
    current = np.zeros(2 * length, dtype=complex)
    current[0] = 1.0
    fft_len = 4 * length
    base_hat = np.fft.fft(coeffs, fft_len)
    for n in range(max_terms):
        norm_sq = float(np.sum(np.abs(current) ** 2))
        total += norm_sq
        if n > 0 and norm_sq / (1.0 - sup ** 2) < tol * total:
            return total
        current = np.fft.ifft(np.fft.fft(current, fft_len) * base_hat)[:2 * length]
    raise QuadratureNotConverged("power series tail did not close")


# ---------------------------------------------------------------------------
# Toeplitz operators and Berezin transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many point masses strictly inside the disc."""

    atoms: np.ndarray    # complex positions
    masses: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_1d(np.asarray(self.atoms, dtype=complex))
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if atoms.shape != masses.shape:
            raise InvalidParameter("atoms and masses must align")
        if np.any(masses <= 0):
            raise InvalidParameter("masses must be positive")
        if np.any(np.abs(atoms) >= 1.0):
            raise InvalidParameter("atoms must lie strictly inside the disc")
        atoms.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)


def toeplitz_matrix(mu: AtomicMeasure, bergman_alpha: float, n_trunc: int
                    ) -> np.ndarray:
    """Matrix of T_mu on A_alpha in the orthonormal monomial basis.

    Entry (m, n) = Sum_atoms mass * e_n(w) * conj(e_m(w)); positive
    semidefinite by construction.
    """
    if n_trunc > 1024:
        raise InvalidParameter("truncation capped at 1024")
    space = SpaceParams(bergman_alpha=bergman_alpha)
    n = np.arange(n_trunc)
    norms = np.sqrt(space.bergman_norm_sq(n))
    # E[j, n] = e_n(w_j)
    with np.errstate(divide="ignore"):
        logs = np.where(np.abs(mu.atoms[:, None]) > 0,
                        np.log(mu.atoms[:, None].astype(complex)), 0.0)
    E = np.exp(n[None, :] * logs) / norms[None, :]
    E[np.abs(mu.atoms) == 0.0, 1:] = 0.0
    E[np.abs(mu.atoms) == 0.0, 0] = 1.0 / norms[0]
    return (E.conj().T * mu.masses[None, :]) @ E


@dataclass(frozen=True)
class PullbackCountingMeasure:
    """Marker for the counting-function area measure of a symbol."""

    phi: Symbol
    alpha: float


def berezin_kernel(bergman_alpha: float, z: complex, w) -> np.ndarray:
    """(1-|z|^2)^(2+alpha) / |1 - conj(w) z|^(4+2 alpha)."""
    a = bergman_alpha
    w = np.asarray(w, dtype=complex)
    return ((1.0 - abs(z) ** 2) ** (2.0 + a)
            / np.abs(1.0 - np.conj(w) * z) ** (4.0 + 2.0 * a))


def berezin_transform(measure, bergman_alpha: float, z: complex, *,
                      samples: int = 200_000, seed: int = 0):
    """Berezin transform at z.

    Atomic measures evaluate exactly (returns a float); the counting-measure
    functional is estimated by the change-of-variables Monte Carlo route and
    returns (value, stderr).
    """
    if abs(z) >= 1.0:
        raise InvalidParameter("Berezin transform defined inside the disc")
    if isinstance(measure, AtomicMeasure):
        return float(np.sum(measure.masses
                            * berezin_kernel(bergman_alpha, z, measure.atoms)))
    if isinstance(measure, PullbackCountingMeasure):
        phi, alpha = measure.phi, measure.alpha
        sample = sample_disc_alpha(alpha, samples, seed)
        vals, ders = phi.eval_many(sample.z)
        integrand = (np.abs(ders) ** 2
                     * berezin_kernel(bergman_alpha, z, vals))
        total, err = sample.estimate(integrand)
        scale = 1.0 / (1.0 + alpha)
        return scale * total, scale * err
    raise InvalidParameter("measure must be atomic or a counting functional")


# ---------------------------------------------------------------------------
# hyperbolic L^(p/2) integral of the Berezin transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BerezinIntegralReport:
    alpha: float
    p: float
    estimate: float
    stderr: float
    annulus_partials: np.ndarray
    growth_exponent: float | None
    convergent: bool
    divergent: bool
    seed: int


def berezin_schatten_integral(phi: Symbol, alpha: float, p: float, *,
                              seed: int = 0, inner_samples: int = 1 << 17,
                              outer_per_annulus: int = 48, annuli: int = 12
                              ) -> BerezinIntegralReport:
    """Stratified estimate of Integral ((1+alpha) mu~(w))^(p/2) d lambda(w).

    The inner Berezin value at each outer point reuses one transported
    sample of the symbol; outer points are drawn annulus by annulus from the
    hyperbolic measure.  Per-annulus partial sums expose the divergence
    trend: the integrand must decay across dyadic annuli for the integral to
    exist, since the hyperbolic mass of annulus k grows like 2^k.
    """
    if p < 2:
        raise InvalidParameter("p must be >= 2")
    rng = np.random.default_rng(seed)
    sample = sample_disc_alpha(alpha, inner_samples, seed + 1)
    vals, ders = phi.eval_many(sample.z)
    jac = np.abs(ders) ** 2 * sample.weights

    partials = np.empty(annuli)
    variances = np.empty(annuli)
    for k in range(annuli):
        ws = sample_hyperbolic_annulus(k, outer_per_annulus, rng)
        mass = hyperbolic_annulus_mass(k)
        inner_vals = np.empty(len(ws))
        for i, w in enumerate(ws):
            inner_vals[i] = float(np.sum(
                jac * berezin_kernel(alpha, w, vals)))
        powered = inner_vals ** (p / 2.0)
        partials[k] = mass * float(np.mean(powered))
        variances[k] = mass ** 2 * float(np.var(powered, ddof=1)) / len(ws)
    rho = fit_dyadic_exponent(np.arange(annuli), partials)
    convergent, divergent = growth_flags(rho)
    return BerezinIntegralReport(
        alpha=alpha, p=p, estimate=float(np.sum(partials)),
        stderr=float(np.sqrt(np.sum(variances))),
        annulus_partials=partials, growth_exponent=rho,
        convergent=convergent, divergent=divergent, seed=seed)
