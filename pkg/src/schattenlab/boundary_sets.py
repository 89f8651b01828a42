"""Closed subsets of the unit circle as finite unions of angular arcs.

Arcs are closed intervals [a, b] of angles with 0 <= a <= b <= 2*pi, sorted
and with pairwise disjoint interiors; b = 2*pi is allowed and identifies the
endpoint with angle 0 (middle-removal constructions naturally produce an arc
ending at 2*pi).  Degenerate arcs a = b encode points.  All measures are
normalized so the full circle has mass 1.

Distance is arc-length distance on the circle.  The empty set uses the
convention d(theta, {}) = pi, the largest possible circle distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter

TWO_PI = 2.0 * np.pi


def _circular_distance(x, y):
    d = np.abs(x - y) % TWO_PI
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True)
class BoundarySet:
    """Sorted disjoint closed arcs of the circle plus generator metadata."""

    arcs: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    generator: str = "arc-union"
    analytic_hausdorff_dimension: float | None = None

    def __post_init__(self):
        arcs = np.asarray(self.arcs, dtype=float).reshape(-1, 2)
        if arcs.size:
            order = np.argsort(arcs[:, 0], kind="stable")
            arcs = arcs[order]
            if np.any(arcs[:, 0] < -1e-15) or np.any(arcs[:, 1] > TWO_PI + 1e-12):
                raise InvalidParameter("arc endpoints must lie in [0, 2*pi]")
            if np.any(arcs[:, 1] - arcs[:, 0] < -1e-15):
                raise InvalidParameter("arcs need a <= b")
            arcs = np.clip(arcs, 0.0, TWO_PI)
            if np.any(arcs[1:, 0] - arcs[:-1, 1] <= -1e-15):
                raise InvalidParameter("arcs must be pairwise disjoint")
            # Wrap check: last arc reaching 2*pi may only touch a first arc
            # starting at 0 in the single identified point.
            if arcs[-1, 1] >= TWO_PI and arcs[0, 0] <= 0.0:
                if arcs[-1, 1] - TWO_PI > -1e-15 and arcs[0, 1] > 0 \
                        and arcs[-1, 0] < TWO_PI and len(arcs) > 1:
                    pass  # touching at 0 == 2*pi is tolerated
        arcs.setflags(write=False)
        object.__setattr__(self, "arcs", arcs)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def empty() -> "BoundarySet":
        return BoundarySet(np.empty((0, 2)))

    @staticmethod
    def full_circle() -> "BoundarySet":
        return BoundarySet(np.array([[0.0, TWO_PI]]),
                           analytic_hausdorff_dimension=1.0)

    @staticmethod
    def point(angle: float) -> "BoundarySet":
        a = float(angle) % TWO_PI
        return BoundarySet(np.array([[a, a]]))

    @staticmethod
    def arc(start: float, length: float) -> "BoundarySet":
        if not 0.0 <= length <= TWO_PI:
            raise InvalidParameter("arc length must lie in [0, 2*pi]")
        a = float(start) % TWO_PI
        b = a + length
        if b <= TWO_PI:
            return BoundarySet(np.array([[a, b]]))
        return BoundarySet(np.array([[0.0, b - TWO_PI], [a, TWO_PI]]))

    # -- basic geometry ----------------------------------------------------

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def is_empty(self) -> bool:
        return self.n_arcs == 0

    @property
    def measure(self) -> float:
        """Normalized Lebesgue measure of the set."""
        if self.is_empty:
            return 0.0
        return float(np.sum(self.arcs[:, 1] - self.arcs[:, 0]) / TWO_PI)

    def distance(self, theta):
        """Arc-length distance from angle(s) theta to the set."""
        theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta)
        if self.is_empty:
            out = np.full_like(theta, np.pi)
            return float(out[0]) if scalar else out
        a, b = self.arcs[:, 0], self.arcs[:, 1]
        n = len(a)
        idx = np.searchsorted(a, theta, side="right") - 1
        cand = np.stack([(idx - 1) % n, idx % n, (idx + 1) % n])
        rel = (theta[None, :] - a[cand]) % TWO_PI
        inside = rel <= (b[cand] - a[cand]) + 1e-15
        d_end = np.minimum(_circular_distance(theta[None, :], a[cand]),
                           _circular_distance(theta[None, :], b[cand]))
        d = np.where(inside, 0.0, d_end).min(axis=0)
        return float(d[0]) if scalar else d

    def to_dict(self) -> dict:
        out = {"arcs": [[float(a), float(b)] for a, b in self.arcs]}
        if self.generator != "arc-union":
            out["generator"] = self.generator
        if self.analytic_hausdorff_dimension is not None:
            out["analytic_hausdorff_dimension"] = self.analytic_hausdorff_dimension
        return out

    @staticmethod
    def from_dict(data: dict) -> "BoundarySet":
        return BoundarySet(
            np.asarray(data["arcs"], dtype=float).reshape(-1, 2),
            generator=data.get("generator", "arc-union"),
            analytic_hausdorff_dimension=data.get("analytic_hausdorff_dimension"),
        )


def neighborhood_measure(K: BoundarySet, t) -> float | np.ndarray:
    """Normalized measure of the t-neighborhood K_t = {d(., K) <= t}.

    Exact arc arithmetic: every arc is dilated by t at both ends and the
    union is measured mod 2*pi.  For the empty set K_t is empty until
    t >= pi, when it is the whole circle.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameter("neighborhood radius must be >= 0")
    scalar = t.ndim == 0
    tv = np.atleast_1d(t)
    if K.is_empty:
        out = np.where(tv >= np.pi, 1.0, 0.0)
        return float(out[0]) if scalar else out

    a, b = K.arcs[:, 0], K.arcs[:, 1]
    out = np.empty_like(tv)
    for i, tt in enumerate(tv):
        # Endpoints stay sorted under equal dilation, so the uncovered part
        # is the sum of the positive gaps between consecutive dilated arcs.
        s = a - tt
        e = b + tt
        gaps = np.concatenate([s[1:] - e[:-1], [s[0] + TWO_PI - e[-1]]])
        uncovered = float(np.sum(np.maximum(gaps, 0.0)))
        out[i] = min(1.0, max(0.0, (TWO_PI - uncovered) / TWO_PI))
    return float(out[0]) if scalar else out


def make_cantor_set(level: int, ratio: float) -> BoundarySet:
    """Standard middle-removal set on the circle.

    Each construction step keeps the two end portions of every arc, each a
    ``ratio`` fraction of its length: 2**level arcs of length
    2*pi*ratio**level.  The attached dimension is the limit-object value
    log 2 / log(1/ratio) (1 for level 0, where nothing was removed).
    """
    if not (isinstance(level, (int, np.integer)) and level >= 0):
        raise InvalidParameter("cantor level must be a nonnegative integer")
    if not 0.0 < ratio < 0.5:
        raise InvalidParameter("cantor ratio must lie in (0, 1/2)")
    arcs = _iterate_middle_removal([ratio] * level)
    dim = 1.0 if level == 0 else float(np.log(2.0) / np.log(1.0 / ratio))
    return BoundarySet(arcs, generator=f"cantor(level={level}, ratio={ratio})",
                       analytic_hausdorff_dimension=dim)


def make_generalized_cantor_set(ratios, dimension: float | None = None
                                ) -> BoundarySet:
    """Middle-removal set with a per-level ratio sequence."""
    ratios = [float(r) for r in ratios]
    if any(not 0.0 < r < 0.5 for r in ratios):
        raise InvalidParameter("all ratios must lie in (0, 1/2)")
    arcs = _iterate_middle_removal(ratios)
    return BoundarySet(arcs,
                       generator=f"cantor(levels={len(ratios)}, variable ratios)",
                       analytic_hausdorff_dimension=dimension)


def _iterate_middle_removal(ratios) -> np.ndarray:
    arcs = np.array([[0.0, TWO_PI]])
    for r in ratios:
        length = (arcs[:, 1] - arcs[:, 0]) * r
        left = np.stack([arcs[:, 0], arcs[:, 0] + length], axis=1)
        right = np.stack([arcs[:, 1] - length, arcs[:, 1]], axis=1)
        arcs = np.concatenate([left, right])
        arcs = arcs[np.argsort(arcs[:, 0])]
    return arcs


def cantor_set_matching_measure(target, *, max_level: int = 24,
                                min_scale: float = 1e-7,
                                dimension: float | None = None
                                ) -> BoundarySet:
    """Generalized middle-removal set whose measure tracks ``target``.

    ``target(t)`` is a decreasing-to-zero prescription of the normalized
    measure the construction should have at scale t.  At each level the
    removal ratio is solved (by bisection) so that the total measure of the
    2^(l+1) arcs of the new length matches the target at that length.  The
    construction stops once arcs are shorter than ``min_scale`` or the
    bisection leaves (0, 1/2).
    """
    arcs = np.array([[0.0, TWO_PI]])
    measure = 1.0
    for _ in range(max_level):
        length = float(arcs[0, 1] - arcs[0, 0])
        if length <= min_scale:
            break

        def excess(r):
            return float(target(r * length)) - 2.0 * r * measure

        lo, hi = 1e-9, 0.5 - 1e-9
        if excess(lo) <= 0.0 or excess(hi) >= 0.0:
            break
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if excess(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        r = 0.5 * (lo + hi)
        cut = (arcs[:, 1] - arcs[:, 0]) * r
        left = np.stack([arcs[:, 0], arcs[:, 0] + cut], axis=1)
        right = np.stack([arcs[:, 1] - cut, arcs[:, 1]], axis=1)
        arcs = np.concatenate([left, right])
        arcs = arcs[np.argsort(arcs[:, 0])]
        measure *= 2.0 * r
    return BoundarySet(arcs, generator="cantor(measure-matched)",
                       analytic_hausdorff_dimension=dimension)
