"""Holomorphic self-maps of the unit disc: polynomial, outer, scaled rotation.

The interesting variant is the outer symbol with prescribed boundary decay:
given a weight h and a closed set K on the circle, it is

    f(z) = exp( -(1/2pi) Integral_T (zeta+z)/(zeta-z) h(d(zeta,K)) |dzeta| ),

with the boundary measure normalized to total mass one, so that the radial
limit has modulus exactly exp(-h(d(zeta,K))) almost everywhere.  Interior
values and derivatives come from panel quadrature of the kernel, graded
toward the near-singularity at arg z and refined until two successive panel
doublings agree.

Taylor coefficients are extracted by sampling on a circle of radius r < 1
and inverting the discrete Fourier transform, dividing mode k by r^k.  The
extraction radius balances aliasing (r^N) against amplified sample noise
(tol * r^-k); both are certified by recomputing with twice the sample count.
For the outer variant the samples on the uniform grid are evaluated through
the Fourier expansion of the kernel (a circular convolution), which is exact
for the same integral and fast for thousands of grid points.
"""

from __future__ import annotations

import numpy as np

from .boundary_sets import TWO_PI, BoundarySet
from .errors import (EvaluationTooCloseToBoundary, InvalidParameter,
                     QuadratureNotConverged)
from .quadrature import (adaptive_integral, graded_edges, merge_breakpoints,
                         panel_nodes, split_edges)
from .weights import WeightFunction, weight_from_dict

MAX_INTERIOR_RADIUS = 1.0 - 1e-12
SELF_MAP_SLACK = 1e-9
_SELF_MAP_GRID = 1 << 14

# Aliasing budget of the Taylor extraction radius: r**N = TAYLOR_RHO.  The
# classical 1e-14 target is unusable for N in the hundreds because sample
# noise is amplified by r**-k; 1e-6 balances the two error sources at the
# certified quadrature tolerance.
TAYLOR_RHO = 1e-6
TAYLOR_FLUSH = 1e-13


class Symbol:
    """Common surface of all symbol variants."""

    variant: str

    # -- evaluation --------------------------------------------------------

    def eval(self, z: complex, *, tol: float = 1e-9):
        """Value and derivative at an interior point |z| <= 1 - 1e-12."""
        z = complex(z)
        if abs(z) > MAX_INTERIOR_RADIUS:
            raise EvaluationTooCloseToBoundary(
                f"|z| = {abs(z)} exceeds {MAX_INTERIOR_RADIUS}")
        v, d = self._eval_many(np.asarray([z]), tol=tol)
        return complex(v[0]), complex(d[0])

    def eval_many(self, z, *, tol: float = 1e-9):
        """Vectorized interior evaluation; returns (values, derivatives)."""
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) > MAX_INTERIOR_RADIUS):
            raise EvaluationTooCloseToBoundary("some |z| exceed the cap")
        return self._eval_many(z.ravel(), tol=tol)

    def _eval_many(self, z, *, tol):
        raise NotImplementedError

    def boundary_modulus(self, theta):
        """|phi| of the boundary trace at angle(s) theta."""
        raise NotImplementedError

    # -- Taylor coefficients -----------------------------------------------

    def taylor_coefficients(self, n_coeffs: int, *, tol: float = 1e-6):
        """First ``n_coeffs`` Taylor coefficients (n_coeffs a power of two).

        Cached per instance; the fill is idempotent, so concurrent readers
        are safe.
        """
        if n_coeffs < 2 or n_coeffs & (n_coeffs - 1):
            raise InvalidParameter("n_coeffs must be a power of two >= 2")
        cache = self.__dict__.setdefault("_taylor_cache", {})
        if n_coeffs not in cache:
            coeffs = self._taylor(n_coeffs, tol=tol)
            coeffs[np.abs(coeffs) < TAYLOR_FLUSH] = 0.0
            coeffs.setflags(write=False)
            cache[n_coeffs] = coeffs
        return cache[n_coeffs]

    def _taylor(self, n_coeffs, *, tol):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "Symbol":
        variant = data["variant"]
        if variant == "polynomial":
            coeffs = np.asarray(
                [complex(re, im) for re, im in data["coefficients"]])
            return PolynomialSymbol(coeffs)
        if variant == "scaled_rotation":
            return ScaledRotationSymbol(data["s"], data.get("angle", 0.0))
        if variant == "outer":
            return OuterSymbol(weight_from_dict(data["weight"]),
                               BoundarySet.from_dict(data["set"]))
        raise InvalidParameter(f"unknown symbol variant {variant!r}")


class PolynomialSymbol(Symbol):
    """phi(z) = c_0 + c_1 z + ... + c_d z^d, validated as a self-map."""

    variant = "polynomial"

    def __init__(self, coefficients):
        c = np.atleast_1d(np.asarray(coefficients, dtype=complex))
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        theta = np.linspace(0.0, TWO_PI, _SELF_MAP_GRID, endpoint=False)
        sup = np.max(np.abs(np.polyval(c[::-1], np.exp(1j * theta))))
        if sup > 1.0 + SELF_MAP_SLACK:
            raise InvalidParameter(
                f"polynomial is not a self-map: sup |phi| = {sup:.6g} on the circle")
        c.setflags(write=False)
        self.coefficients = c

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def _eval_many(self, z, *, tol):
        c = self.coefficients
        vals = np.polyval(c[::-1], z)
        dc = c[1:] * np.arange(1, len(c))
        derivs = np.polyval(dc[::-1], z) if len(dc) else np.zeros_like(z)
        return vals, derivs

    def boundary_modulus(self, theta):
        z = np.exp(1j * np.asarray(theta, dtype=float))
        return np.abs(np.polyval(self.coefficients[::-1], z))

    def boundary_values(self, theta):
        z = np.exp(1j * np.asarray(theta, dtype=float))
        return np.polyval(self.coefficients[::-1], z)

    def _taylor(self, n_coeffs, *, tol):
        out = np.zeros(n_coeffs, dtype=complex)
        take = min(n_coeffs, len(self.coefficients))
        out[:take] = self.coefficients[:take]
        return out

    def to_dict(self):
        return {"variant": "polynomial",
                "coefficients": [[float(c.real), float(c.imag)]
                                 for c in self.coefficients]}


class ScaledRotationSymbol(Symbol):
    """phi(z) = s * exp(i*angle) * z with 0 <= s <= 1."""

    variant = "scaled_rotation"

    def __init__(self, s: float, angle: float = 0.0):
        if not 0.0 <= s <= 1.0:
            raise InvalidParameter("scale must lie in [0, 1]")
        self.s = float(s)
        self.angle = float(angle)

    @property
    def factor(self) -> complex:
        return self.s * np.exp(1j * self.angle)

    def _eval_many(self, z, *, tol):
        return self.factor * z, np.full_like(z, self.factor)

    def boundary_modulus(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.full(theta.shape, self.s)

    def _taylor(self, n_coeffs, *, tol):
        out = np.zeros(n_coeffs, dtype=complex)
        out[1] = self.factor
        return out

    def to_dict(self):
        return {"variant": "scaled_rotation", "s": self.s, "angle": self.angle}


class OuterSymbol(Symbol):
    """Outer function with boundary modulus exp(-h(d(., K)))."""

    variant = "outer"

    def __init__(self, weight: WeightFunction, contact_set: BoundarySet):
        self.weight = weight
        self.contact_set = contact_set

    # boundary trace of the exponent weight
    def trace(self, theta):
        return self.weight(self.contact_set.distance(theta))

    def trace_kinks(self):
        """Angles (absolute) where the boundary trace has corners.

        Corners of d(., K) sit at arc endpoints and at the midpoints of the
        gaps between consecutive arcs; additional weight breakpoints are
        handled by quadrature refinement.
        """
        K = self.contact_set
        if K.is_empty:
            return np.empty(0)
        pts = [K.arcs[:, 0], K.arcs[:, 1]]
        a, b = K.arcs[:, 0], K.arcs[:, 1]
        nxt = np.roll(a, -1).copy()
        nxt[-1] += TWO_PI
        pts.append(((b + nxt) / 2.0) % TWO_PI)
        return np.unique(np.concatenate(pts) % TWO_PI)

    def boundary_modulus(self, theta):
        return np.exp(-self.trace(theta))

    def _eval_many(self, z, *, tol):
        vals = np.empty(z.shape, dtype=complex)
        ders = np.empty(z.shape, dtype=complex)
        for i, zz in enumerate(z):
            vals[i], ders[i] = self._eval_point(zz, tol=tol)
        return vals, ders

    def _eval_point(self, z: complex, *, tol):
        if z == 0:
            exponent = adaptive_integral(
                lambda t: self.trace(t), np.linspace(0.0, TWO_PI, 65),
                tol=tol, order=12, what="outer trace mean") / TWO_PI
            dkernel = adaptive_integral(
                lambda t: 2.0 * np.exp(-1j * t) * self.trace(t),
                np.linspace(0.0, TWO_PI, 65), tol=tol, abs_floor=1.0,
                what="outer derivative kernel") / TWO_PI
            f0 = np.exp(-exponent)
            return f0, -dkernel * f0
        r = abs(z)
        theta = float(np.angle(z))
        delta = max(1.0 - r, 1e-9)
        half = graded_edges(0.0, np.pi, scale=delta / 2.0, toward="left")
        edges = np.concatenate([-half[::-1], half[1:]])
        kinks = (self.trace_kinks() - theta + np.pi) % TWO_PI - np.pi
        if 0 < kinks.size <= 128:
            edges = merge_breakpoints(edges, kinks)

        prev = None
        for _ in range(13):
            nodes, wts = panel_nodes(edges, 12)
            g = self.trace(theta + nodes)
            eiu = np.exp(1j * nodes)
            k0 = (eiu + r) / (eiu - r)
            k1 = 2.0 * eiu / (eiu - r) ** 2 * np.exp(-1j * theta)
            I0 = (g * k0) @ wts / TWO_PI
            I1 = (g * k1) @ wts / TWO_PI
            if prev is not None:
                ok0 = abs(I0 - prev[0]) <= tol * max(abs(I0), 1e-12)
                ok1 = abs(I1 - prev[1]) <= tol * max(abs(I1), 1e-12)
                if ok0 and ok1:
                    f = np.exp(-I0)
                    return f, -I1 * f
            prev = (I0, I1)
            edges = split_edges(edges)
        raise QuadratureNotConverged(
            f"outer evaluation at z = {z:.6g} did not reach tol {tol}")

    # -- spectral machinery for uniform-grid sampling ------------------------

    def _trace_spectrum(self, m_grid: int = 1 << 20):
        """rfft coefficients of the boundary trace on a dense uniform grid."""
        cache = self.__dict__.setdefault("_spectrum_cache", {})
        if m_grid not in cache:
            theta = np.arange(m_grid) * (TWO_PI / m_grid)
            g = self.trace(theta)
            ghat = np.fft.rfft(g) / m_grid
            ghat.setflags(write=False)
            cache[m_grid] = ghat
        return cache[m_grid]

    def sample_circle(self, r: float, m_samples: int):
        """Values of the symbol at r * exp(2*pi*i*j/m), j = 0..m-1.

        Uses the Fourier expansion of the kernel: on the radius-r circle the
        exponent is ghat(0) + 2*sum_k ghat(k) r^k e^(ik theta), a circular
        convolution evaluated exactly by folding the damped spectrum.
        """
        ghat = self._trace_spectrum()
        kmax = len(ghat) - 1
        k = np.arange(1, kmax + 1)
        damped = 2.0 * ghat[1:] * np.power(r, k)
        spectrum = np.zeros(m_samples, dtype=complex)
        spectrum[0] = ghat[0]
        np.add.at(spectrum, k % m_samples, damped)
        exponent = m_samples * np.fft.ifft(spectrum)
        return np.exp(-exponent)

    def _taylor(self, n_coeffs, *, tol):
        rho = TAYLOR_RHO
        r = rho ** (1.0 / n_coeffs)
        ks = np.arange(n_coeffs)

        def extract(m_samples):
            f = self.sample_circle(r, m_samples)
            d = np.fft.fft(f) / m_samples
            return d[:n_coeffs] / np.power(r, ks)

        first = extract(n_coeffs)
        second = extract(2 * n_coeffs)
        if np.max(np.abs(first - second)) > tol:
            raise QuadratureNotConverged(
                "Taylor extraction unstable under sample doubling")
        return second

    def to_dict(self):
        return {"variant": "outer", "weight": self.weight.to_dict(),
                "set": self.contact_set.to_dict()}
