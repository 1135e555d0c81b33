"""Sparse multivariate polynomials with complex coefficients.

A :class:`Polynomial` is an immutable map from exponent tuples to complex
coefficients.  A :class:`PolySystem` is an ordered list of polynomials over
the same variables.  Systems can be compiled into a :class:`CompiledSystem`
that evaluates values and Jacobians for a whole batch of points at once,
which is what the path tracker consumes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError

#: Coefficients below this magnitude are dropped after arithmetic.
DROP_TOL = 1e-14

Monomial = tuple  # exponent vector, one non-negative int per variable


def total_degree(mono: Monomial) -> int:
    return sum(mono)


def _normalize(terms: Mapping[Monomial, complex]) -> dict:
    return {m: complex(c) for m, c in terms.items() if abs(c) >= DROP_TOL}


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables.

    Terms whose coefficient magnitude falls below :data:`DROP_TOL` are
    discarded on construction, so the zero polynomial has no terms.
    """

    nvars: int
    terms: Mapping[Monomial, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mono, c in self.terms.items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != self.nvars:
                raise DimensionError(
                    f"monomial {mono} has {len(mono)} exponents, expected {self.nvars}")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            clean[mono] = clean.get(mono, 0j) + complex(c)
        object.__setattr__(self, "terms", _normalize(clean))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> Polynomial:
        return cls(nvars, {})

    @classmethod
    def constant(cls, value: complex, nvars: int) -> Polynomial:
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, index: int, nvars: int) -> Polynomial:
        if not 0 <= index < nvars:
            raise DimensionError(f"variable index {index} out of range for {nvars} variables")
        mono = [0] * nvars
        mono[index] = 1
        return cls(nvars, {tuple(mono): 1.0})

    # -- properties ----------------------------------------------------------

    @property
    def degree(self) -> int:
        """Maximum total degree over stored terms; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(total_degree(m) for m in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> complex:
        return self.terms.get((0,) * self.nvars, 0j)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(complex(other), self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0j) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0j) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(1.0, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, x):
        return poly_eval(self, x)

    def equals(self, other: Polynomial, tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.terms.values())

    def __repr__(self):
        if not self.terms:
            return f"Polynomial(nvars={self.nvars}, 0)"
        parts = []
        for m, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{k + 1}^{e}" if e > 1 else f"x{k + 1}"
                            for k, e in enumerate(m) if e)
            parts.append(f"({c:.6g}){'*' + mono if mono else ''}")
        return f"Polynomial(nvars={self.nvars}, {' + '.join(parts)})"


@dataclass(frozen=True, eq=False)
class PolySystem:
    """Ordered list of polynomials sharing the same variable count."""

    polys: tuple
    nvars: int

    def __init__(self, polys: Iterable[Polynomial], nvars: int | None = None):
        polys = tuple(polys)
        if nvars is None:
            if not polys:
                raise ValueError("nvars is required for an empty system")
            nvars = polys[0].nvars
        for p in polys:
            if p.nvars != nvars:
                raise DimensionError(f"polynomial has {p.nvars} variables, system has {nvars}")
        object.__setattr__(self, "polys", polys)
        object.__setattr__(self, "nvars", nvars)

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    @property
    def degrees(self) -> list[int]:
        return [p.degree for p in self.polys]

    def is_square(self) -> bool:
        return len(self.polys) == self.nvars

    def __call__(self, x):
        return np.array([poly_eval(p, x) for p in self.polys])

    def jacobian(self, x):
        return system_jacobian_eval(self, x)

    def compile(self) -> CompiledSystem:
        return CompiledSystem(self)


# -- operations ----------------------------------------------------------------


def poly_eval(p: Polynomial, x) -> complex:
    """Evaluate ``p`` at a single point by direct term summation."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (p.nvars,):
        raise DimensionError(f"point has shape {x.shape}, polynomial expects ({p.nvars},)")
    total = 0j
    for mono, c in p.terms.items():
        total += c * prod(x[k] ** e for k, e in enumerate(mono) if e)
    return complex(total)


def poly_diff(p: Polynomial, var_index: int) -> Polynomial:
    """Formal partial derivative with respect to variable ``var_index``."""
    if not 0 <= var_index < p.nvars:
        raise DimensionError(f"variable index {var_index} out of range for {p.nvars} variables")
    out = {}
    for mono, c in p.terms.items():
        e = mono[var_index]
        if e == 0:
            continue
        m = list(mono)
        m[var_index] = e - 1
        out[tuple(m)] = c * e
    return Polynomial(p.nvars, out)


def gradient(p: Polynomial) -> list[Polynomial]:
    return [poly_diff(p, k) for k in range(p.nvars)]


def system_jacobian_eval(sys: PolySystem, x) -> np.ndarray:
    """Jacobian matrix of ``sys`` at ``x`` (rows follow polys, columns variables)."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (sys.nvars,):
        raise DimensionError(f"point has shape {x.shape}, system expects ({sys.nvars},)")
    J = np.zeros((len(sys), sys.nvars), dtype=complex)
    for l, p in enumerate(sys.polys):
        for k in range(sys.nvars):
            J[l, k] = poly_eval(poly_diff(p, k), x)
    return J


def bezout_number(sys: PolySystem) -> int:
    """Product of total degrees of a square system (a Python int, never overflows)."""
    if not sys.is_square():
        raise ValueError(f"system is not square: {len(sys)} polynomials in {sys.nvars} variables")
    degs = sys.degrees
    if any(d < 0 for d in degs):
        raise ValueError("system contains the zero polynomial")
    return prod(degs)


def sum_of_squares(polys: Sequence[Polynomial]) -> Polynomial:
    """Return ``sum(p**2 for p in polys)``."""
    polys = list(polys)
    if not polys:
        raise ValueError("sum_of_squares needs at least one polynomial")
    nvars = polys[0].nvars
    total = Polynomial.zero(nvars)
    for p in polys:
        if p.nvars != nvars:
            raise DimensionError("all polynomials must share nvars")
        total = total + p * p
    return total


# -- batch evaluation --------------------------------------------------------------


class CompiledSystem:
    """Batch evaluator for a :class:`PolySystem` and its Jacobian.

    All monomials of the system and of its first derivatives are gathered
    into one exponent table, evaluated once per batch, and contracted with
    dense coefficient matrices.  Gradients are differentiated symbolically
    once at construction.
    """

    def __init__(self, sys: PolySystem):
        self.system = sys
        self.nvars = sys.nvars
        self.neqs = len(sys)
        derivs = [[poly_diff(p, k) for k in range(sys.nvars)] for p in sys.polys]
        monos = set()
        for p in sys.polys:
            monos.update(p.terms)
        for row in derivs:
            for dp in row:
                monos.update(dp.terms)
        if not monos:
            monos.add((0,) * sys.nvars)
        self._monos = sorted(monos)
        index = {m: i for i, m in enumerate(self._monos)}
        T = len(self._monos)
        self._exps = np.array(self._monos, dtype=np.intp).reshape(T, sys.nvars)
        self._maxdeg = int(self._exps.max()) if self._exps.size else 0
        self._cval = np.zeros((T, self.neqs), dtype=complex)
        self._cjac = np.zeros((T, self.neqs * self.nvars), dtype=complex)
        for l, p in enumerate(sys.polys):
            for m, c in p.terms.items():
                self._cval[index[m], l] = c
            for k, dp in enumerate(derivs[l]):
                for m, c in dp.terms.items():
                    self._cjac[index[m], l * self.nvars + k] = c

    def degrees(self) -> list[int]:
        return self.system.degrees

    def _monomials(self, x: np.ndarray) -> np.ndarray:
        P = x.shape[0]
        pw = np.ones((P, self.nvars, self._maxdeg + 1), dtype=complex)
        for e in range(1, self._maxdeg + 1):
            pw[:, :, e] = pw[:, :, e - 1] * x
        vals = np.ones((P, len(self._monos)), dtype=complex)
        for k in range(self.nvars):
            col = self._exps[:, k]
            if col.any():
                vals *= pw[:, k, col]
        return vals

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Values ``(P, neqs)`` and Jacobians ``(P, neqs, nvars)`` for points ``(P, nvars)``."""
        x = np.atleast_2d(np.asarray(x, dtype=complex))
        if x.shape[1] != self.nvars:
            raise DimensionError(f"points have {x.shape[1]} coordinates, expected {self.nvars}")
        M = self._monomials(x)
        F = M @ self._cval
        J = (M @ self._cjac).reshape(x.shape[0], self.neqs, self.nvars)
        return F, J
