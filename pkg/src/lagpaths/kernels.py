"""Closed symbolic algebra for the singular convolution kernels.

Every kernel used by the particle dynamics (and every spatial derivative of
it, to any order) is a finite sum of terms of the form

    coeff * pi**pi_pow * y**mono * |y|**(-rpow) * exp(-grate*|y|**2)

with exact rational ``coeff`` and ``grate``.  The class of such sums is
closed under partial differentiation, so arbitrary-order derivatives needed
by the bound verification and by the Faa di Bruno oracle are exact term
rewrites, never finite differences.  Pi is carried symbolically; floats only
appear in ``evaluate``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from .errors import SingularEvaluationError

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class KernelTerm:
    coeff: Fraction
    pi_pow: int
    mono: MultiIndex
    rpow: int
    grate: Fraction

    def key(self):
        return (self.mono, self.rpow, self.grate, self.pi_pow)

    def coeff_float(self) -> float:
        return float(self.coeff) * math.pi**self.pi_pow


def _canonical(terms: Iterable[KernelTerm]) -> tuple[KernelTerm, ...]:
    """Normal form: last-axis monomial power < 2, then merge equal keys.

    Monomials are reduced modulo the relation y_d**2 = |y|**2 - sum_{i<d} y_i**2,
    which makes representations unique; without it, equal expressions such as
    the strain entries written with '|y|**2' absorbed or expanded would not
    compare equal term by term.
    """
    work = list(terms)
    reduced: list[KernelTerm] = []
    while work:
        t = work.pop()
        if t.mono and t.mono[-1] >= 2:
            mono = list(t.mono)
            mono[-1] -= 2
            work.append(
                KernelTerm(t.coeff, t.pi_pow, tuple(mono), t.rpow - 2, t.grate)
            )
            for i in range(len(mono) - 1):
                other = list(mono)
                other[i] += 2
                work.append(
                    KernelTerm(-t.coeff, t.pi_pow, tuple(other), t.rpow, t.grate)
                )
        else:
            reduced.append(t)
    merged: dict[tuple, Fraction] = {}
    for t in reduced:
        merged[t.key()] = merged.get(t.key(), Fraction(0)) + t.coeff
    out = [
        KernelTerm(c, k[3], k[0], k[1], k[2])
        for k, c in sorted(merged.items())
        if c != 0
    ]
    return tuple(out)


@dataclass(frozen=True)
class ScalarKernel:
    """One scalar component: a canonical sum of KernelTerms over R^dim."""

    dim: int
    terms: tuple[KernelTerm, ...]

    @staticmethod
    def build(dim: int, terms: Iterable[KernelTerm]) -> "ScalarKernel":
        return ScalarKernel(dim, _canonical(terms))

    @staticmethod
    def zero(dim: int) -> "ScalarKernel":
        return ScalarKernel(dim, ())

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "ScalarKernel") -> "ScalarKernel":
        return ScalarKernel.build(self.dim, self.terms + other.terms)

    def __neg__(self) -> "ScalarKernel":
        return ScalarKernel(
            self.dim,
            tuple(
                KernelTerm(-t.coeff, t.pi_pow, t.mono, t.rpow, t.grate)
                for t in self.terms
            ),
        )

    def __sub__(self, other: "ScalarKernel") -> "ScalarKernel":
        return self + (-other)

    def derive(self, axis: int) -> "ScalarKernel":
        """Exact partial derivative along axis (0-based)."""
        new: list[KernelTerm] = []
        for t in self.terms:
            # monomial power rule
            if t.mono[axis] > 0:
                mono = list(t.mono)
                mono[axis] -= 1
                new.append(
                    KernelTerm(
                        t.coeff * t.mono[axis], t.pi_pow, tuple(mono), t.rpow, t.grate
                    )
                )
            # |y|**(-p) -> -p * y_axis * |y|**(-p-2)
            if t.rpow != 0:
                mono = list(t.mono)
                mono[axis] += 1
                new.append(
                    KernelTerm(
                        -t.coeff * t.rpow, t.pi_pow, tuple(mono), t.rpow + 2, t.grate
                    )
                )
            # exp(-q|y|**2) -> -2q * y_axis * exp(-q|y|**2)
            if t.grate != 0:
                mono = list(t.mono)
                mono[axis] += 1
                new.append(
                    KernelTerm(
                        -2 * t.grate * t.coeff, t.pi_pow, tuple(mono), t.rpow, t.grate
                    )
                )
        return ScalarKernel.build(self.dim, new)

    def derive_multi(self, alpha: MultiIndex) -> "ScalarKernel":
        out = self
        for axis, count in enumerate(alpha):
            for _ in range(count):
                out = out.derive(axis)
        return out

    def times_gaussian(self, rate: Fraction) -> "ScalarKernel":
        return ScalarKernel(
            self.dim,
            tuple(
                KernelTerm(t.coeff, t.pi_pow, t.mono, t.rpow, t.grate + rate)
                for t in self.terms
            ),
        )

    def scaled(self, factor: Fraction, pi_shift: int = 0) -> "ScalarKernel":
        return ScalarKernel.build(
            self.dim,
            (
                KernelTerm(t.coeff * factor, t.pi_pow + pi_shift, t.mono, t.rpow, t.grate)
                for t in self.terms
            ),
        )

    def evaluate(self, y: np.ndarray) -> np.ndarray | float:
        """Evaluate at y != 0; y has shape (..., dim).

        The scalar path sums terms with exact (fsum) compensation; the
        batched path accumulates in the fixed canonical term order.
        """
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.dim:
            raise ValueError(f"expected last axis {self.dim}, got {y.shape}")
        r2 = np.sum(y * y, axis=-1)
        if np.any(r2 == 0.0):
            raise SingularEvaluationError("kernel evaluated at y = 0")
        if y.ndim == 1:
            vals = []
            r = math.sqrt(float(r2))
            for t in self.terms:
                v = t.coeff_float()
                for i, e in enumerate(t.mono):
                    if e:
                        v *= float(y[i]) ** e
                if t.rpow:
                    v *= r ** (-t.rpow)
                if t.grate:
                    v *= math.exp(-float(t.grate) * r * r)
                vals.append(v)
            return math.fsum(vals)
        r = np.sqrt(r2)
        total = np.zeros(r2.shape)
        for t in self.terms:
            v = np.full(r2.shape, t.coeff_float())
            for i, e in enumerate(t.mono):
                if e:
                    v = v * y[..., i] ** e
            if t.rpow:
                v = v * r ** (-float(t.rpow))
            if t.grate:
                v = v * np.exp(-float(t.grate) * r2)
            total += v
        return total


@dataclass(frozen=True)
class KernelExpr:
    """A scalar-, vector-, or matrix-shaped bundle of ScalarKernels."""

    dim: int
    shape: tuple[int, ...]
    comps: tuple[ScalarKernel, ...]

    @staticmethod
    def scalar(comp: ScalarKernel) -> "KernelExpr":
        return KernelExpr(comp.dim, (), (comp,))

    @staticmethod
    def vector(comps: list[ScalarKernel]) -> "KernelExpr":
        return KernelExpr(comps[0].dim, (len(comps),), tuple(comps))

    @staticmethod
    def matrix(rows: list[list[ScalarKernel]]) -> "KernelExpr":
        comps = tuple(itertools.chain.from_iterable(rows))
        return KernelExpr(rows[0][0].dim, (len(rows), len(rows[0])), comps)

    @staticmethod
    def from_array(dim: int, arr: np.ndarray) -> "KernelExpr":
        return KernelExpr(dim, arr.shape, tuple(arr.reshape(-1)))

    def as_array(self) -> np.ndarray:
        out = np.empty(self.shape, dtype=object)
        out.reshape(-1)[:] = self.comps
        return out

    def component(self, *idx: int) -> ScalarKernel:
        flat = 0
        for i, n in zip(idx, self.shape):
            flat = flat * n + i
        return self.comps[flat]

    def derive(self, axis: int) -> "KernelExpr":
        return KernelExpr(
            self.dim, self.shape, tuple(c.derive(axis) for c in self.comps)
        )

    def derive_multi(self, alpha: MultiIndex) -> "KernelExpr":
        return KernelExpr(
            self.dim, self.shape, tuple(c.derive_multi(alpha) for c in self.comps)
        )

    def __add__(self, other: "KernelExpr") -> "KernelExpr":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return KernelExpr(
            self.dim,
            self.shape,
            tuple(a + b for a, b in zip(self.comps, other.comps)),
        )

    def __sub__(self, other: "KernelExpr") -> "KernelExpr":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return KernelExpr(
            self.dim,
            self.shape,
            tuple(a - b for a, b in zip(self.comps, other.comps)),
        )

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def times_gaussian(self, rate: Fraction) -> "KernelExpr":
        return KernelExpr(
            self.dim, self.shape, tuple(c.times_gaussian(rate) for c in self.comps)
        )

    def evaluate(self, y: np.ndarray):
        """Evaluate all components; returns shape (*batch, *self.shape)."""
        y = np.asarray(y, dtype=float)
        vals = [c.evaluate(y) for c in self.comps]
        if not self.shape:
            return vals[0]
        if y.ndim == 1:
            return np.array(vals).reshape(self.shape)
        batch = y.shape[:-1]
        return np.stack(vals, axis=-1).reshape(batch + self.shape)


def perp_grad(expr: KernelExpr) -> KernelExpr:
    """Rotated gradient (-d/dy2, d/dy1) of a scalar 2D expression."""
    if expr.shape != () or expr.dim != 2:
        raise ValueError("perp_grad needs a scalar 2D expression")
    s = expr.comps[0]
    return KernelExpr.vector([-s.derive(1), s.derive(0)])


class KernelCatalogEntry(NamedTuple):
    model: str
    velocity_kernel: KernelExpr
    gradient_kernel: KernelExpr
    singularity_order: int
    gradient_singularity_order: int


def _t(coeff, pi_pow, mono, rpow, grate=Fraction(0)) -> KernelTerm:
    return KernelTerm(Fraction(coeff), pi_pow, tuple(mono), rpow, Fraction(grate))


def _sq(dim, *terms) -> ScalarKernel:
    return ScalarKernel.build(dim, terms)


MODEL_TAGS = ("sqg", "euler2d", "ipm", "boussinesq2d", "euler3d")


def normalize_model_tag(tag: str) -> str:
    t = tag.strip().lower().replace("-", "").replace("_", "")
    aliases = {
        "sqg": "sqg",
        "euler2d": "euler2d",
        "2deuler": "euler2d",
        "ipm": "ipm",
        "boussinesq": "boussinesq2d",
        "boussinesq2d": "boussinesq2d",
        "euler3d": "euler3d",
        "3deuler": "euler3d",
    }
    if t not in aliases:
        raise ValueError(f"unknown model tag {tag!r}; expected one of {MODEL_TAGS}")
    return aliases[t]


def sqg_velocity_kernel() -> KernelExpr:
    """Perp Riesz kernel y_perp / (2 pi |y|^3)."""
    return KernelExpr.vector(
        [
            _sq(2, _t(Fraction(-1, 2), -1, (0, 1), 3)),
            _sq(2, _t(Fraction(1, 2), -1, (1, 0), 3)),
        ]
    )


def biot_savart_2d_kernel() -> KernelExpr:
    """2D Biot-Savart kernel y_perp / (2 pi |y|^2)."""
    return KernelExpr.vector(
        [
            _sq(2, _t(Fraction(-1, 2), -1, (0, 1), 2)),
            _sq(2, _t(Fraction(1, 2), -1, (1, 0), 2)),
        ]
    )


def strain_2d_kernel() -> KernelExpr:
    """Symmetric traceless 2x2 strain kernel of the 2D Biot-Savart law.

    Entries [[2 y1 y2, y2^2 - y1^2], [y2^2 - y1^2, -2 y1 y2]] / (2 pi |y|^4);
    identical to the full gradient of the Biot-Savart kernel away from 0.
    """
    half = Fraction(1, 2)
    e11 = _sq(2, _t(2 * half, -1, (1, 1), 4))
    e12 = _sq(2, _t(half, -1, (0, 2), 4), _t(-half, -1, (2, 0), 4))
    e22 = _sq(2, _t(-2 * half, -1, (1, 1), 4))
    return KernelExpr.matrix([[e11, e12], [e12, e22]])


def biot_savart_3d_kernel() -> KernelExpr:
    """Radial factor y / (4 pi |y|^3) of the 3D Biot-Savart law.

    The velocity is the cross product of the vorticity vector with this
    kernel: u(x) = sum w * omega x K(x - y).
    """
    q = Fraction(1, 4)
    return KernelExpr.vector(
        [
            _sq(3, _t(q, -1, (1, 0, 0), 3)),
            _sq(3, _t(q, -1, (0, 1, 0), 3)),
            _sq(3, _t(q, -1, (0, 0, 1), 3)),
        ]
    )


def strain_3d_kernel() -> KernelExpr:
    """Rank-3 strain kernel: component [i, j, m] multiplies vorticity omega_m.

    S_ij(x) = (3 / 8 pi) * ((x cross omega)_i x_j + (x cross omega)_j x_i) / |x|^5,
    expanded over the basis vectors e_m.
    """
    c = Fraction(3, 8)
    # (x cross e_m)_i as monomial coefficients: cross[m][i] = (sign, mono axis)
    cross = {
        (0, 1): (1, 2),  # (x X e_1)_2 = +x3
        (0, 2): (-1, 1),  # (x X e_1)_3 = -x2
        (1, 0): (-1, 2),
        (1, 2): (1, 0),
        (2, 0): (1, 1),
        (2, 1): (-1, 0),
    }
    comps = np.empty((3, 3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            for m in range(3):
                terms = []
                if (m, i) in cross:
                    sgn, axis = cross[(m, i)]
                    mono = [0, 0, 0]
                    mono[axis] += 1
                    mono[j] += 1
                    terms.append(_t(sgn * c, -1, mono, 5))
                if (m, j) in cross:
                    sgn, axis = cross[(m, j)]
                    mono = [0, 0, 0]
                    mono[axis] += 1
                    mono[i] += 1
                    terms.append(_t(sgn * c, -1, mono, 5))
                comps[i, j, m] = ScalarKernel.build(3, terms)
    return KernelExpr.from_array(3, comps)


@lru_cache(maxsize=None)
def catalog(model: str) -> KernelCatalogEntry:
    """Velocity and gradient kernels of one model, in exact form."""
    tag = normalize_model_tag(model)
    if tag == "sqg":
        return KernelCatalogEntry(tag, sqg_velocity_kernel(), sqg_velocity_kernel(), -2, -2)
    if tag in ("euler2d", "ipm", "boussinesq2d"):
        return KernelCatalogEntry(
            tag, biot_savart_2d_kernel(), strain_2d_kernel(), -1, -2
        )
    if tag == "euler3d":
        return KernelCatalogEntry(
            tag, biot_savart_3d_kernel(), strain_3d_kernel(), -2, -3
        )
    raise AssertionError(tag)


def split_gaussian(expr: KernelExpr) -> tuple[KernelExpr, KernelExpr]:
    """Split into expr * exp(-|y|^2) and expr * (1 - exp(-|y|^2)).

    The outer part is represented as the two term groups, so inner + outer
    reproduces expr identically after canonical cancellation.
    """
    for c in expr.comps:
        if any(t.grate != 0 for t in c.terms):
            raise ValueError("split_gaussian expects a Gaussian-free expression")
    inner = expr.times_gaussian(Fraction(1))
    outer = expr - inner
    return inner, outer


def decompose_kin(model: str = "sqg") -> tuple[KernelExpr, KernelExpr]:
    """Stream-function split of the Gaussian-localized perp-Riesz kernel.

    Returns (k1, k2) with k1 = -exp(-|y|^2) / (2 pi |y|) scalar and
    k2 = -y_perp exp(-|y|^2) / (pi |y|), so that perp_grad(k1) + k2 equals
    the localized kernel exactly in the term algebra.
    """
    tag = normalize_model_tag(model)
    if tag != "sqg":
        raise ValueError("the stream-function split is provided for the sqg kernel")
    k1 = KernelExpr.scalar(_sq(2, _t(Fraction(-1, 2), -1, (0, 0), 1, 1)))
    k2 = KernelExpr.vector(
        [
            _sq(2, _t(1, -1, (0, 1), 1, 1)),
            _sq(2, _t(-1, -1, (1, 0), 1, 1)),
        ]
    )
    return k1, k2


def regularize(expr: KernelExpr, delta: float) -> KernelExpr:
    """Multiply by the analytic cutoff (1 - exp(-|y|^2 / delta^2))."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    rate = Fraction(1) / (Fraction(delta) * Fraction(delta))
    return expr - expr.times_gaussian(rate)


def bound_samples(
    n: int, dim: int, seed: int, rmin: float = 1e-3, rmax: float = 10.0
) -> np.ndarray:
    """Log-uniform radii in [rmin, rmax] with uniformly random directions."""
    rng = np.random.default_rng(seed)
    radii = np.exp(rng.uniform(np.log(rmin), np.log(rmax), size=n))
    vecs = rng.normal(size=(n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs * radii[:, None]


def verify_derivative_bound(
    expr: KernelExpr,
    c_k: float,
    power_offset: int,
    max_order: int,
    samples: np.ndarray,
    gaussian_decay: bool = True,
) -> dict:
    """Worst-case ratio of |d^alpha expr| to the claimed derivative envelope.

    For every multi-index |alpha| <= max_order the exact derivative is
    evaluated on the samples and compared against

        c_k**|alpha| * |alpha|! * |y|**(-(|alpha| + power_offset))

    times exp(-|y|^2/2) when gaussian_decay is set.  Reports the worst ratio
    per order; the envelope holds on the sample set iff every ratio <= 1.
    """
    samples = np.asarray(samples, dtype=float)
    r = np.linalg.norm(samples, axis=-1)
    worst: dict[int, float] = {}
    for order in range(max_order + 1):
        ratios = []
        for alpha in itertools.product(range(order + 1), repeat=expr.dim):
            if sum(alpha) != order:
                continue
            deriv = expr.derive_multi(alpha)
            vals = deriv.evaluate(samples)
            mag = np.abs(vals).reshape(len(samples), -1).max(axis=1)
            envelope = (
                c_k**order * math.factorial(order) * r ** (-(order + power_offset))
            )
            if gaussian_decay:
                envelope = envelope * np.exp(-(r**2) / 2.0)
            ratios.append(np.max(mag / envelope))
        worst[order] = float(max(ratios))
    return {
        "c_k": c_k,
        "power_offset": power_offset,
        "gaussian_decay": gaussian_decay,
        "worst_ratio_per_order": worst,
        "worst_ratio": max(worst.values()),
        "passed": max(worst.values()) <= 1.0,
    }


def circle_mean(expr: KernelExpr, radius: float, quad_points: int):
    """Mean of expr over the circle (2D) or sphere (3D) of given radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if quad_points < 8:
        raise ValueError("need at least 8 quadrature points")
    if expr.dim == 2:
        theta = 2.0 * np.pi * np.arange(quad_points) / quad_points
        pts = radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        vals = expr.evaluate(pts)
        return np.mean(vals, axis=0)
    # 3D: Gauss-Legendre in cos(polar angle) x uniform azimuth, which is
    # exact for the polynomial-over-radial integrands of the catalog
    n_pol, n_az = quad_points, 2 * quad_points
    mu, wts = np.polynomial.legendre.leggauss(n_pol)
    phi = 2.0 * np.pi * np.arange(n_az) / n_az
    mm, pp = np.meshgrid(mu, phi, indexing="ij")
    sin_t = np.sqrt(1.0 - mm**2)
    pts = radius * np.stack(
        [sin_t * np.cos(pp), sin_t * np.sin(pp), mm], axis=-1
    )
    w = np.broadcast_to(wts[:, None], mm.shape)
    vals = expr.evaluate(pts.reshape(-1, 3)).reshape(mm.shape + expr.shape)
    wb = w.reshape(w.shape + (1,) * len(expr.shape))
    return (vals * wb).sum(axis=(0, 1)) / w.sum()
