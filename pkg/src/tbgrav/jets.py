"""Truncated multivariate Taylor arithmetic (jets).

A Jet stores the value of a smooth function together with all of its partial
derivatives up to a fixed total order, in up to eight variables (four base
coordinates and four fiber coordinates).  Every derivative the geometry
modules consume is obtained either by evaluating expressions on seeded jets
or by shifting jet coefficients (``partial``), never by finite differences.

Coefficients are Taylor coefficients (derivative / multi-index factorial),
stored densely in graded-lexicographic order.  Arithmetic between jets of the
same variable count but different orders truncates to the coarser operand;
the strict same-order contract is enforced by :func:`jet_arith`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConfigError, SingularEvaluationError, UsageError

MAX_ORDER = 4
MAX_NVARS = 8


def _monomials(order: int, nvars: int) -> list[tuple[int, ...]]:
    """All exponent tuples with total degree <= order, graded-lexicographic."""
    out: list[tuple[int, ...]] = []

    def parts(total: int, slots: int):
        if slots == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for tail in parts(total - head, slots - 1):
                yield (head,) + tail

    for degree in range(order + 1):
        out.extend(sorted(parts(degree, nvars)))
    return out


class JetSpace:
    """Shared immutable tables for all jets of one (order, nvars) signature."""

    def __init__(self, order: int, nvars: int):
        if not (0 <= order <= MAX_ORDER):
            raise ConfigError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if not (1 <= nvars <= MAX_NVARS):
            raise ConfigError(f"jet nvars must be in 1..{MAX_NVARS}, got {nvars}")
        self.order = order
        self.nvars = nvars
        self.monomials = _monomials(order, nvars)
        self.size = len(self.monomials)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.degrees = np.array([sum(m) for m in self.monomials])
        self._mul_table = self._build_mul_table()
        self._shift_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        # derivative = coefficient * prod(factorials of the multi-index)
        self.factorials = np.array(
            [math.prod(math.factorial(e) for e in m) for m in self.monomials], dtype=float
        )

    def _build_mul_table(self):
        by_degree: dict[int, list[int]] = {}
        for i, m in enumerate(self.monomials):
            by_degree.setdefault(sum(m), []).append(i)
        ia, ib, ic = [], [], []
        for da, rows in by_degree.items():
            for db, cols in by_degree.items():
                if da + db > self.order:
                    continue
                for i in rows:
                    mi = self.monomials[i]
                    for j in cols:
                        mj = self.monomials[j]
                        k = self.index[tuple(a + b for a, b in zip(mi, mj))]
                        ia.append(i)
                        ib.append(j)
                        ic.append(k)
        return np.array(ia), np.array(ib), np.array(ic)

    def shift_table(self, var: int):
        """Arrays (dst, src, factor) mapping coefficients of f to those of df/dx_var
        in JetSpace(order-1, nvars)."""
        if var not in self._shift_tables:
            lower = jet_space(self.order - 1, self.nvars)
            dst, src, fac = [], [], []
            for m, i in lower.index.items():
                up = list(m)
                up[var] += 1
                dst.append(i)
                src.append(self.index[tuple(up)])
                fac.append(m[var] + 1)
            self._shift_tables[var] = (np.array(dst), np.array(src), np.array(fac, dtype=float))
        return self._shift_tables[var]


@lru_cache(maxsize=None)
def jet_space(order: int, nvars: int) -> JetSpace:
    return JetSpace(order, nvars)


class Jet:
    """Value plus partial derivatives to fixed total order, in nvars variables."""

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.c = coeffs

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(value: float, order: int, nvars: int) -> "Jet":
        sp = jet_space(order, nvars)
        c = np.zeros(sp.size)
        c[0] = value
        return Jet(sp, c)

    @staticmethod
    def variable(index: int, value: float, order: int, nvars: int) -> "Jet":
        sp = jet_space(order, nvars)
        if not (0 <= index < nvars):
            raise ConfigError(f"variable slot {index} out of range for nvars={nvars}")
        c = np.zeros(sp.size)
        c[0] = value
        if order >= 1:
            unit = tuple(1 if i == index else 0 for i in range(nvars))
            c[sp.index[unit]] = 1.0
        return Jet(sp, c)

    # -- basic queries ------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.c[0])

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def nvars(self) -> int:
        return self.space.nvars

    def derivative(self, multi: tuple[int, ...]) -> float:
        """Partial derivative for the exponent tuple ``multi``."""
        if len(multi) != self.nvars:
            raise UsageError(f"multi-index length {len(multi)} != nvars {self.nvars}")
        if sum(multi) > self.order:
            raise UsageError(f"degree {sum(multi)} exceeds jet order {self.order}")
        i = self.space.index[tuple(multi)]
        return float(self.c[i] * self.space.factorials[i])

    def gradient(self) -> np.ndarray:
        """First partials with respect to all variables."""
        if self.order < 1:
            raise UsageError("gradient requires order >= 1")
        out = np.empty(self.nvars)
        for v in range(self.nvars):
            unit = tuple(1 if i == v else 0 for i in range(self.nvars))
            out[v] = self.c[self.space.index[unit]]
        return out

    def hessian(self) -> np.ndarray:
        """Matrix of second partials."""
        if self.order < 2:
            raise UsageError("hessian requires order >= 2")
        out = np.empty((self.nvars, self.nvars))
        for a in range(self.nvars):
            for b in range(a, self.nvars):
                multi = [0] * self.nvars
                multi[a] += 1
                multi[b] += 1
                i = self.space.index[tuple(multi)]
                out[a, b] = out[b, a] = self.c[i] * self.space.factorials[i]
        return out

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise UsageError(f"cannot extend jet of order {self.order} to {order}")
        sp = jet_space(order, self.nvars)
        return Jet(sp, self.c[: sp.size].copy())

    def partial(self, var: int) -> "Jet":
        """Derivative with respect to variable ``var`` as a jet of order-1."""
        if self.order < 1:
            raise UsageError("partial() requires order >= 1")
        dst, src, fac = self.space.shift_table(var)
        lower = jet_space(self.order - 1, self.nvars)
        c = np.zeros(lower.size)
        c[dst] = self.c[src] * fac
        return Jet(lower, c)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "tuple[Jet, Jet] | None":
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise UsageError(
                    f"jet nvars mismatch: {self.nvars} vs {other.nvars}"
                )
            if other.order == self.order:
                return self, other
            m = min(self.order, other.order)
            return self.truncate(m), other.truncate(m)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self, Jet.constant(float(other), self.order, self.nvars)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.space, a.c + b.c)

    __radd__ = __add__

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.space, a.c - b.c)

    def __rsub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.space, b.c - a.c)

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.space, self.c * float(other))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        ia, ib, ic = a.space._mul_table
        c = np.bincount(ic, weights=a.c[ia] * b.c[ib], minlength=a.space.size)
        return Jet(a.space, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.space, self.c / float(other))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a * b._reciprocal()

    def __rtruediv__(self, other):
        rec = self._reciprocal()
        return rec * other

    def __pow__(self, exponent):
        return self.pow_const(exponent)

    def __repr__(self):
        return f"Jet(order={self.order}, nvars={self.nvars}, value={self.value!r})"

    # -- composition with univariate functions ------------------------------

    def _compose(self, taylor: np.ndarray) -> "Jet":
        """Evaluate sum_k taylor[k] * (self - value)^k by Horner's scheme."""
        u = Jet(self.space, self.c.copy())
        u.c[0] = 0.0
        result = Jet.constant(float(taylor[self.order]), self.order, self.nvars)
        for k in range(self.order - 1, -1, -1):
            result = result * u
            result.c[0] += taylor[k]
        return result

    def _reciprocal(self) -> "Jet":
        v = self.value
        if v == 0.0:
            raise SingularEvaluationError("division by jet with zero value", value=v)
        taylor = np.array([(-1.0) ** k / v ** (k + 1) for k in range(self.order + 1)])
        return self._compose(taylor)

    def sqrt(self) -> "Jet":
        v = self.value
        if v <= 0.0:
            raise SingularEvaluationError(f"sqrt of non-positive jet value {v}", value=v)
        taylor = np.empty(self.order + 1)
        taylor[0] = math.sqrt(v)
        coeff = 0.5
        for k in range(1, self.order + 1):
            taylor[k] = taylor[k - 1] * coeff / (k * v)
            coeff -= 1.0
        return self._compose(taylor)

    def exp(self) -> "Jet":
        e = math.exp(self.value)
        taylor = np.array([e / math.factorial(k) for k in range(self.order + 1)])
        return self._compose(taylor)

    def ln(self) -> "Jet":
        v = self.value
        if v <= 0.0:
            raise SingularEvaluationError(f"ln of non-positive jet value {v}", value=v)
        taylor = np.empty(self.order + 1)
        taylor[0] = math.log(v)
        for k in range(1, self.order + 1):
            taylor[k] = (-1.0) ** (k - 1) / (k * v**k)
        return self._compose(taylor)

    def sin(self) -> "Jet":
        s, c = math.sin(self.value), math.cos(self.value)
        cycle = [s, c, -s, -c]
        taylor = np.array([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])
        return self._compose(taylor)

    def cos(self) -> "Jet":
        s, c = math.sin(self.value), math.cos(self.value)
        cycle = [c, -s, -c, s]
        taylor = np.array([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])
        return self._compose(taylor)

    def abs(self) -> "Jet":
        v = self.value
        if v == 0.0:
            raise SingularEvaluationError("abs of jet with zero value", value=v)
        return self if v > 0 else -self

    def pow_const(self, exponent: float) -> "Jet":
        v = self.value
        if isinstance(exponent, (int, np.integer)) or float(exponent).is_integer():
            n = int(exponent)
            if n >= 0:
                result = Jet.constant(1.0, self.order, self.nvars)
                base = self
                k = n
                while k:
                    if k & 1:
                        result = result * base
                    k >>= 1
                    if k:
                        base = base * base
                return result
            if v == 0.0:
                raise SingularEvaluationError("negative power of zero jet value", value=v)
            return self.pow_const(-n)._reciprocal()
        if v <= 0.0:
            raise SingularEvaluationError(
                f"non-integer power of non-positive jet value {v}", value=v
            )
        taylor = np.empty(self.order + 1)
        taylor[0] = v**exponent
        coeff = float(exponent)
        for k in range(1, self.order + 1):
            taylor[k] = taylor[k - 1] * coeff / (k * v)
            coeff -= 1.0
        return self._compose(taylor)


# -- spec-level functional surface ------------------------------------------

_ELEMENTARY = {
    "sqrt": Jet.sqrt,
    "sin": Jet.sin,
    "cos": Jet.cos,
    "exp": Jet.exp,
    "ln": Jet.ln,
    "abs": Jet.abs,
}


def seed_variable(index: int, value: float, order: int, nvars: int) -> Jet:
    """Jet of the coordinate function x_index at the given value."""
    return Jet.variable(index, value, order, nvars)


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Strict arithmetic: both jets must share (order, nvars)."""
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        raise UsageError("jet_arith expects two Jet operands")
    if (a.order, a.nvars) != (b.order, b.nvars):
        raise UsageError(
            f"jet space mismatch: ({a.order},{a.nvars}) vs ({b.order},{b.nvars})"
        )
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise UsageError(f"unknown jet operation {op!r}")


def jet_elementary(a: Jet, fn: str, exponent: float | None = None) -> Jet:
    """Apply a univariate elementary function to a jet."""
    if fn == "pow_const":
        if exponent is None:
            raise UsageError("pow_const requires an exponent")
        return a.pow_const(exponent)
    try:
        return _ELEMENTARY[fn](a)
    except KeyError:
        raise UsageError(f"unknown elementary function {fn!r}") from None


def extract_derivative(a: Jet, multi: tuple[int, ...]) -> float:
    return a.derivative(multi)
