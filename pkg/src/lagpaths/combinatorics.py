"""Exact combinatorics for high derivatives of compositions.

Everything here is computed in arbitrary-precision rational arithmetic
(`fractions.Fraction`); floating point is deliberately not used, so that the
identity checks are exact claims rather than approximations.

The central objects are the partition sets indexing Faa di Bruno expansions:

* ``P(n, k)``   : 1D partitions, vectors (k_1,...,k_n) with sum(j*k_j) = n and
  sum(k_j) = k.
* ``P_s(n, a)`` : multivariate partitions, s nonzero multi-indices k_i summing
  to ``a`` together with strictly increasing positive integers l_i such that
  sum(|k_i| * l_i) = n.

On top of these sit the "magic" identities that collapse signed partition
sums of half-integer binomials into closed form, and the coefficient
identities (S_n, convolution) used to control products of such sums.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Mapping, NamedTuple, Sequence

# Exact rational scalar used throughout this module.
BigRational = Fraction

MultiIndex = tuple[int, ...]


class Partition1D(NamedTuple):
    """A vector (k_1,...,k_n) with sum(j*k_j) = n and sum(k_j) = k_count."""

    k: tuple[int, ...]
    n: int
    k_count: int


class PartitionMulti(NamedTuple):
    """Element of P_s(n, alpha): multi-indices ks with strictly increasing ls."""

    ks: tuple[MultiIndex, ...]
    ls: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.ks)


def sign_pow(k: int) -> int:
    """(-1)**k as an exact integer, valid for negative k as well."""
    return -1 if k % 2 else 1


def mi_order(alpha: MultiIndex) -> int:
    """|alpha| = sum of the components."""
    return sum(alpha)


def mi_factorial(alpha: MultiIndex) -> int:
    """alpha! = product of the component factorials."""
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def multi_indices_up_to(n: int, d: int) -> list[MultiIndex]:
    """All multi-indices alpha of dimension d with 1 <= |alpha| <= n."""
    out = [
        alpha
        for alpha in itertools.product(range(n + 1), repeat=d)
        if 1 <= sum(alpha) <= n
    ]
    out.sort()
    return out


@lru_cache(maxsize=None)
def binomial_half(j: int) -> Fraction:
    """Half-integer binomial (1/2 choose j), with (1/2 choose 0) = -1.

    The nonstandard value at j = 0 makes (-1)**(j-1) * binomial_half(j) >= 0
    for every j >= 0, which is what the signed partition sums below rely on.
    """
    if j < 0:
        raise ValueError("j must be a non-negative integer")
    if j == 0:
        return Fraction(-1)
    num = Fraction(1)
    for i in range(j):
        num *= Fraction(1, 2) - i
    return num / factorial(j)


def double_factorial(m: int) -> int:
    """m!! with the empty products (-1)!! = 1 and 0!! = 1."""
    if m < -1:
        raise ValueError("double factorial defined for m >= -1 here")
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def check_factorial_bound(j: int) -> tuple[Fraction, Fraction, bool]:
    """Check j! * (-1)**(j-1) * (1/2 choose j) == (2j-3)!! / 2**j for j >= 2."""
    if j < 2:
        raise ValueError("the factorial identity is stated for j >= 2")
    lhs = factorial(j) * (-1) ** (j - 1) * binomial_half(j)
    rhs = Fraction(double_factorial(2 * j - 3), 2**j)
    return lhs, rhs, lhs == rhs


def enumerate_partitions_1d(n: int, k: int) -> list[Partition1D]:
    """The set P(n, k), ordered lexicographically on the k-vector."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if k > n:
        return []
    found: list[Partition1D] = []

    def extend(j: int, vec: list[int], rem_n: int, rem_k: int) -> None:
        if j > n:
            if rem_n == 0 and rem_k == 0:
                found.append(Partition1D(tuple(vec), n, k))
            return
        # parts of size j: k_j can be 0..min(rem_n//j, rem_k)
        for kj in range(min(rem_n // j, rem_k) + 1):
            vec.append(kj)
            extend(j + 1, vec, rem_n - j * kj, rem_k - kj)
            vec.pop()

    extend(1, [], n, k)
    found.sort(key=lambda p: p.k)
    return found


def _sub_multi_indices(alpha: MultiIndex) -> list[MultiIndex]:
    """Nonzero multi-indices k with 0 <= k <= alpha componentwise."""
    ranges = [range(a + 1) for a in alpha]
    return [k for k in itertools.product(*ranges) if sum(k) > 0]


def enumerate_partitions_multi(
    n: int, alpha: MultiIndex
) -> dict[int, list[PartitionMulti]]:
    """All sets P_s(n, alpha) for s = 1..n, keyed by s.

    Returns empty lists when |alpha| > n.  Within each s the ordering is
    deterministic (lexicographic in the (ls, ks) encoding).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if mi_order(alpha) < 1:
        raise ValueError("alpha must have positive order")
    by_s: dict[int, list[PartitionMulti]] = {s: [] for s in range(1, n + 1)}
    if mi_order(alpha) > n:
        return by_s

    def extend(
        parts: list[tuple[MultiIndex, int]],
        rem_alpha: tuple[int, ...],
        rem_n: int,
        l_min: int,
    ) -> None:
        if sum(rem_alpha) == 0:
            if rem_n == 0 and parts:
                ks = tuple(p[0] for p in parts)
                ls = tuple(p[1] for p in parts)
                by_s[len(parts)].append(PartitionMulti(ks, ls))
            return
        if rem_n < l_min:  # one more nonzero part costs at least l_min
            return
        for l in range(l_min, rem_n + 1):
            for k in _sub_multi_indices(rem_alpha):
                cost = sum(k) * l
                if cost > rem_n:
                    continue
                rem2 = tuple(a - b for a, b in zip(rem_alpha, k))
                parts.append((k, l))
                extend(parts, rem2, rem_n - cost, l + 1)
                parts.pop()

    extend([], tuple(alpha), n, 1)
    for s in by_s:
        by_s[s].sort(key=lambda p: (p.ls, p.ks))
    return by_s


@lru_cache(maxsize=None)
def partitions_by_alpha(
    n: int, d: int
) -> dict[MultiIndex, tuple[PartitionMulti, ...]]:
    """All multivariate partitions for order n in dimension d, keyed by alpha.

    Cached because the Faa di Bruno evaluations reuse the same index sets for
    every particle pair and every kernel component.
    """
    out: dict[MultiIndex, tuple[PartitionMulti, ...]] = {}
    for alpha in multi_indices_up_to(n, d):
        by_s = enumerate_partitions_multi(n, alpha)
        flat = tuple(itertools.chain.from_iterable(by_s[s] for s in sorted(by_s)))
        if flat:
            out[alpha] = flat
    return out


def faa_di_bruno_1d(h_derivs: Sequence, g_derivs: Sequence, n: int):
    """n-th derivative of h(g(x)) from the derivative lists of h and g.

    ``h_derivs[k]`` is h^(k) evaluated at g(x0) and ``g_derivs[j]`` is
    g^(j)(x0); both lists run from index 0 to at least n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    total = h_derivs[0] * 0  # zero in the value type
    n_fact = factorial(n)
    for k in range(1, n + 1):
        inner = None
        for part in enumerate_partitions_1d(n, k):
            weight = Fraction(n_fact, 1)
            for kj in part.k:
                weight /= factorial(kj)
            term = weight
            for j, kj in enumerate(part.k, start=1):
                if kj:
                    term = term * (g_derivs[j] / factorial(j)) ** kj
            inner = term if inner is None else inner + term
        if inner is not None:
            total = total + h_derivs[k] * inner
    return total


def faa_di_bruno_multi(
    h_derivs: Mapping[MultiIndex, object],
    g_derivs: Sequence[Sequence],
    n: int,
):
    """n-th derivative of h(g(x)) for vector-valued g, scalar h.

    ``h_derivs[alpha]`` is the partial derivative of h of multi-order alpha
    evaluated at g(x0), required for every 1 <= |alpha| <= n;
    ``g_derivs[l][i]`` is the l-th derivative of component i of g at x0,
    for l = 1..n.  Values may be Fractions or floats; the convention 0**0 = 1
    applies inside the partition products.
    """
    if n < 1:
        raise ValueError("n must be positive")
    d = len(g_derivs[1])
    total = None
    for alpha, partitions in partitions_by_alpha(n, d).items():
        try:
            h_val = h_derivs[alpha]
        except KeyError as exc:
            raise KeyError(f"missing h derivative for multi-index {alpha}") from exc
        inner = None
        for part in partitions:
            term = Fraction(1)
            for k, l in zip(part.ks, part.ls):
                denom = mi_factorial(k) * factorial(l) ** mi_order(k)
                term = term / denom
                for i, ki in enumerate(k):
                    if ki:
                        term = term * g_derivs[l][i] ** ki
            inner = term if inner is None else inner + term
        if inner is not None:
            contrib = h_val * inner
            total = contrib if total is None else total + contrib
    if total is None:
        raise ValueError("no admissible multi-index: check n >= 1")
    return factorial(n) * total


def magic_identity_1d(n: int) -> tuple[Fraction, Fraction, bool]:
    """Signed 1D partition sum of half-binomials against its closed form.

    lhs = sum over k and P(n,k) of (-1)**k * k!/prod(k_j!) * prod (1/2 choose j)**k_j,
    rhs = 2*(n+1)*(1/2 choose n+1).
    """
    if n < 1:
        raise ValueError("n must be positive")
    lhs = Fraction(0)
    for k in range(1, n + 1):
        for part in enumerate_partitions_1d(n, k):
            weight = Fraction((-1) ** k * factorial(k))
            for kj in part.k:
                weight /= factorial(kj)
            term = weight
            for j, kj in enumerate(part.k, start=1):
                if kj:
                    term *= binomial_half(j) ** kj
            lhs += term
    rhs = 2 * (n + 1) * binomial_half(n + 1)
    return lhs, rhs, lhs == rhs


def magic_identity_multi(
    n: int, d: int
) -> tuple[Fraction, Fraction, Fraction]:
    """Multivariate analogue of the signed partition sum, reported not asserted.

    Returns (lhs, rhs, lhs/rhs).  For d = 1 the ratio is 1 for every n tested;
    for d >= 2 the two sides genuinely differ (already at n = 1, d = 2 the
    left side is -1 against -1/2), so callers archive the ratio instead of
    asserting equality.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    lhs = Fraction(0)
    for alpha, partitions in partitions_by_alpha(n, d).items():
        order = mi_order(alpha)
        outer = Fraction((-1) ** order * factorial(order))
        inner = Fraction(0)
        for part in partitions:
            term = Fraction(1)
            for k, l in zip(part.ks, part.ls):
                term *= binomial_half(l) ** mi_order(k)
                term /= mi_factorial(k)
            inner += term
        lhs += outer * inner
    rhs = 2 * (n + 1) * binomial_half(n + 1)
    return lhs, rhs, lhs / rhs


@lru_cache(maxsize=None)
def series_coefficients(m: int) -> tuple[Fraction, Fraction]:
    """The non-negative coefficient pair (a_m, b_m).

    a_m = 2*(m+1)*(-1)**m*(1/2 choose m+1) generates (1-t)**(-1/2);
    b_m = (-1)**(m-1)*(1/2 choose m) generates 2-(1-t)**(1/2).
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    a_m = 2 * (m + 1) * sign_pow(m) * binomial_half(m + 1)
    b_m = sign_pow(m - 1) * binomial_half(m)
    return a_m, b_m


def S_n_identity(n: int) -> tuple[Fraction, Fraction, bool, bool]:
    """Triple coefficient sum S_n against its closed form and its bound.

    S_n = sum over 0 <= m <= r <= n of a_m * b_{r-m} * b_{n-r}; the closed
    form is 4*a_n - b_n = (16n-10)/(2n-1) * (n+1)*(-1)**n*(1/2 choose n+1),
    and the bound is S_n <= 8*(n+1)*(-1)**n*(1/2 choose n+1) = 4*a_n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    triple = Fraction(0)
    for r in range(n + 1):
        for m in range(r + 1):
            a_m, _ = series_coefficients(m)
            _, b_rm = series_coefficients(r - m)
            _, b_nr = series_coefficients(n - r)
            triple += a_m * b_rm * b_nr
    closed = (
        Fraction(16 * n - 10, 2 * n - 1)
        * (n + 1)
        * (-1) ** n
        * binomial_half(n + 1)
    )
    bound = 8 * (n + 1) * (-1) ** n * binomial_half(n + 1)
    return triple, closed, triple == closed, triple <= bound


def convolution_identity(m: int) -> tuple[Fraction, Fraction, bool]:
    """Coefficient convolution sum against 4*(-1)**m*(m+1)*(1/2 choose m+1).

    lhs = sum_{i=0}^{m} a_i * b_{m-i} = 2*a_m for m >= 1.  At m = 0 the two
    sides genuinely differ (lhs = 1, rhs = 2): the product generating function
    (1-t)**(-1/2) * (2-(1-t)**(1/2)) = 2*(1-t)**(-1/2) - 1 carries a constant
    that only affects the 0-th coefficient.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    lhs = Fraction(0)
    for i in range(m + 1):
        a_i, _ = series_coefficients(i)
        _, b_mi = series_coefficients(m - i)
        lhs += a_i * b_mi
    rhs = 4 * (-1) ** m * (m + 1) * binomial_half(m + 1)
    return lhs, rhs, lhs == rhs


def truncated_series_product(
    coeffs_list: Sequence[Sequence[Fraction]], order: int
) -> list[Fraction]:
    """Coefficients of the product of exact power series, truncated at order."""
    prod = [Fraction(1)] + [Fraction(0)] * order
    for coeffs in coeffs_list:
        new = [Fraction(0)] * (order + 1)
        for i, ci in enumerate(prod):
            if ci == 0:
                continue
            for j in range(order + 1 - i):
                cj = coeffs[j] if j < len(coeffs) else Fraction(0)
                if cj:
                    new[i + j] += ci * cj
        prod = new
    return prod
