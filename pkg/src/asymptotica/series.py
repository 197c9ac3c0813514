"""Truncated power series in a small parameter and perturbation expansions of roots.

A :class:`PerturbationSeries` is the finite list of coefficients
``a_0 + a_1*eps + ... + a_N*eps**N``; arithmetic never reads beyond order N.
Coefficients may be exact (``int``/``Fraction``/sympy expressions) or floating
(``float``/``complex``).  When every input is exact the whole computation
stays exact, which is what lets the quadratic and quintic root expansions be
checked coefficient-by-coefficient instead of to a tolerance.

:func:`expand_root` solves the perturbation hierarchy of a polynomial family
order by order.  The order-p coefficient always satisfies a *linear* equation
whose operator is multiplication by the derivative of the unperturbed
polynomial at the starting root; the right hand side is assembled by
evaluating the polynomial on the partially-built series and reading off the
eps**p coefficient, so no symbolic differentiation is needed and the same
code covers quadratic, quintic and rescaled singular families.

:func:`rescale_singular` performs the substitution ``x = eps**(-p) * y`` and
clears the smallest power of eps, which turns a singular family (degree drops
at eps=0) into a regular one whose lost root is order one.

:func:`euler_f` and :func:`euler_partial_sum` evaluate the classic divergent
asymptotic series example: the exponential integral f(eps) = int_0^inf
exp(-t)/(1+eps*t) dt against its partial sums sum (-1)^n n! eps^n, with the
remainder bound |f - S_m| <= (m+1)! eps^(m+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from scipy.integrate import quad


class DegenerateRootError(ValueError):
    """The starting point is not a simple root of the unperturbed polynomial.

    The expansion in integer powers of eps does not exist there; a scaling
    transform (see :func:`rescale_singular`) is the standard escape hatch.
    """


def _is_exact(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return True
    if isinstance(x, (float, complex)):
        return False
    try:  # sympy values count as exact unless they contain a Float
        import sympy

        if isinstance(x, sympy.Expr):
            return not x.has(sympy.Float)
    except ImportError:
        pass
    return False


@dataclass(frozen=True)
class PerturbationSeries:
    """Coefficients a_0..a_N of a series truncated at order N."""

    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) == 0:
            raise ValueError("a series needs at least the order-zero coefficient")
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coefficients)

    def __getitem__(self, i: int):
        return self.coefficients[i]

    def _check_order(self, other: "PerturbationSeries"):
        if self.order != other.order:
            raise ValueError(
                f"truncation orders differ: {self.order} vs {other.order}"
            )

    def __add__(self, other: "PerturbationSeries") -> "PerturbationSeries":
        self._check_order(other)
        return PerturbationSeries(
            tuple(a + b for a, b in zip(self.coefficients, other.coefficients))
        )

    def __sub__(self, other: "PerturbationSeries") -> "PerturbationSeries":
        self._check_order(other)
        return PerturbationSeries(
            tuple(a - b for a, b in zip(self.coefficients, other.coefficients))
        )

    def __mul__(self, other: "PerturbationSeries") -> "PerturbationSeries":
        """Cauchy product truncated at the common order."""
        self._check_order(other)
        a, b = self.coefficients, other.coefficients
        out = []
        for p in range(self.order + 1):
            s = a[0] * b[p]
            for m in range(1, p + 1):
                s = s + a[m] * b[p - m]
            out.append(s)
        return PerturbationSeries(tuple(out))

    def __pow__(self, n: int) -> "PerturbationSeries":
        if not isinstance(n, int) or n < 0:
            raise ValueError("series powers must be nonnegative integers")
        result = PerturbationSeries.constant(1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "PerturbationSeries":
        return PerturbationSeries(tuple(c * a for a in self.coefficients))

    def __call__(self, eps):
        """Evaluate by Horner's rule at a numeric eps."""
        acc = self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            acc = acc * eps + c
        return acc

    def truncated(self, order: int) -> "PerturbationSeries":
        if order >= self.order:
            return self.padded(order)
        return PerturbationSeries(self.coefficients[: order + 1])

    def padded(self, order: int) -> "PerturbationSeries":
        if order < self.order:
            raise ValueError("cannot pad to a lower order")
        return PerturbationSeries(
            self.coefficients + (0,) * (order - self.order)
        )

    @staticmethod
    def constant(value, order: int) -> "PerturbationSeries":
        return PerturbationSeries((value,) + (0,) * order)


@dataclass(frozen=True)
class PolyFamily:
    """Polynomial in x whose coefficients are series in eps.

    ``coefficients[j]`` multiplies x**j.  ``eps_denominator`` is 1 except
    when a fractional rescale has re-expressed the family in the variable
    eps**(1/q); it is metadata only and does not change the arithmetic.
    """

    coefficients: tuple[PerturbationSeries, ...]
    eps_denominator: int = 1

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("a polynomial family needs at least one coefficient")
        orders = {c.order for c in self.coefficients}
        if len(orders) != 1:
            raise ValueError("coefficient series must share one truncation order")
        lead = self.coefficients[-1]
        if all(c == 0 for c in lead.coefficients):
            raise ValueError("leading x-coefficient series is identically zero")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def order(self) -> int:
        return self.coefficients[0].order

    @staticmethod
    def from_coefficients(nested: Sequence[Sequence]) -> "PolyFamily":
        """Build from nested arrays: ``nested[j][m]`` multiplies x**j * eps**m."""
        order = max(len(c) for c in nested) - 1
        series = tuple(
            PerturbationSeries(tuple(c) + (0,) * (order + 1 - len(c)))
            for c in nested
        )
        return PolyFamily(series)

    def unperturbed_coefficients(self) -> list:
        """Coefficients of the eps=0 polynomial."""
        return [c[0] for c in self.coefficients]

    def evaluate_series(self, x: PerturbationSeries) -> PerturbationSeries:
        """P(x(eps), eps) truncated at the order of x, by Horner's rule."""
        acc = self.coefficients[-1].truncated(x.order)
        for c in reversed(self.coefficients[:-1]):
            acc = acc * x + c.truncated(x.order)
        return acc

    def evaluate(self, x, eps):
        """Numeric P(x, eps)."""
        acc = self.coefficients[-1](eps)
        for c in reversed(self.coefficients[:-1]):
            acc = acc * x + c(eps)
        return acc


def _unperturbed_derivative(p: PolyFamily, a0):
    c0 = p.unperturbed_coefficients()
    acc = 0
    for j in range(len(c0) - 1, 0, -1):
        acc = acc * a0 + j * c0[j]
    return acc


def _unperturbed_value(p: PolyFamily, a0):
    c0 = p.unperturbed_coefficients()
    acc = c0[-1]
    for c in reversed(c0[:-1]):
        acc = acc * a0 + c
    return acc


def expand_root(p: PolyFamily, a0, n_order: int) -> PerturbationSeries:
    """Perturbation expansion of the root of P(x, eps) = 0 starting at x(0) = a0.

    Solves the hierarchy order by order: the order-p coefficient satisfies
    ``L a_p = -r_p`` where L = P'(a0) at eps=0 and r_p is the eps**p
    coefficient of P evaluated on the series built so far.
    """
    exact = p.coefficients[0].is_exact and all(
        c.is_exact for c in p.coefficients
    ) and _is_exact(a0)
    value = _unperturbed_value(p, a0)
    deriv = _unperturbed_derivative(p, a0)
    if exact:
        if value != 0:
            raise ValueError(f"a0={a0} is not a root of the unperturbed polynomial")
        if deriv == 0:
            raise DegenerateRootError(
                "unperturbed derivative vanishes at a0; the root is degenerate "
                "and needs a singular rescale (rescale_singular) first"
            )
    else:
        scale = (1 + abs(a0)) ** max(p.degree - 1, 0)
        if abs(value) > 1e-9 * (1 + abs(a0)) ** p.degree:
            raise ValueError(f"a0={a0} is not a root of the unperturbed polynomial")
        if abs(deriv) <= 1e-12 * scale:
            raise DegenerateRootError(
                "unperturbed derivative is below the simple-root tolerance at a0; "
                "use rescale_singular to recover the lost root"
            )
    coeffs = [a0]
    for order in range(1, n_order + 1):
        x = PerturbationSeries(tuple(coeffs) + (0,) * (order + 1 - len(coeffs)))
        residual = p.evaluate_series(x)
        coeffs.append(-residual[order] / deriv)
    return PerturbationSeries(tuple(coeffs))


def rescale_singular(p: PolyFamily, scale_exponent) -> PolyFamily:
    """Substitute x = eps**(-p) * y and clear the smallest power of eps.

    ``scale_exponent`` must be rational.  For integer exponent grids the
    result is a plain family in eps; fractional grids are re-expressed in
    the variable eps**(1/q) with q recorded in ``eps_denominator``.
    """
    if isinstance(scale_exponent, float):
        raise TypeError("scale exponent must be rational (int or Fraction), not float")
    pexp = Fraction(scale_exponent)
    if pexp == 0:
        return p
    # exponent -> coefficient maps per power of x, after the substitution
    terms: list[dict[Fraction, object]] = []
    exponents: list[Fraction] = []
    for j, cj in enumerate(p.coefficients):
        tj: dict[Fraction, object] = {}
        for m, c in enumerate(cj.coefficients):
            if c == 0:
                continue
            tj[Fraction(m) - pexp * j] = c
        terms.append(tj)
        exponents.extend(tj.keys())
    if not exponents:
        raise ValueError("polynomial family is identically zero")
    mu = min(exponents)
    q = 1
    for e in exponents:
        shifted = e - mu
        q = q * shifted.denominator // math.gcd(q, shifted.denominator)
    max_power = max(int((e - mu) * q) for e in exponents)
    new_coeffs = []
    for tj in terms:
        arr = [0] * (max_power + 1)
        for e, c in tj.items():
            arr[int((e - mu) * q)] = c
        new_coeffs.append(PerturbationSeries(tuple(arr)))
    return PolyFamily(tuple(new_coeffs), eps_denominator=q * p.eps_denominator)


def euler_partial_sum(eps, m: int):
    """Partial sum S_m = sum_{n=0}^{m} (-1)^n n! eps^n of the divergent expansion."""
    if m < 0:
        raise ValueError("partial sum order must be >= 0")
    total = 0
    term = 1  # (-1)^n n! eps^n, built incrementally
    for n in range(m + 1):
        if n > 0:
            term = term * (-n) * eps
        total = total + term
    return total


def euler_remainder_bound(eps: float, m: int) -> float:
    """(m+1)! eps^(m+1), the analytic bound on |f(eps) - S_m(eps)|."""
    return math.factorial(m + 1) * float(eps) ** (m + 1)


def euler_f(eps: float, quad_tol: float = 1e-12) -> float:
    """f(eps) = int_0^inf exp(-t) / (1 + eps t) dt by adaptive quadrature.

    The integral is truncated at T with exp(-T) < quad_tol/10; the discarded
    tail is bounded by exp(-T)/(1 + eps T) < quad_tol/10, so the total error
    is below quad_tol.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t_max = math.log(10.0 / quad_tol)
    value, _ = quad(
        lambda t: math.exp(-t) / (1.0 + eps * t),
        0.0,
        t_max,
        epsabs=0.5 * quad_tol,
        epsrel=0.0,
        limit=200,
    )
    return value
