"""Valuation structures: weight domains, complete monoids, and exact lasso valuation.

Ships the three concrete structures:

* ``RATIO``    -- reward/cost pairs, limsup of accumulated reward-cost ratios,
                  aggregated by sup over runs.
* ``DISC``     -- cost/discount pairs, discounted sum, aggregated by inf.
* ``energy(n)``-- integer vectors of energy deltas, feasibility of keeping all
                  partial sums nonnegative, aggregated by max (boolean or).

All arithmetic is exact (fractions); the extended reals add the two
infinities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .lasso import LassoWord


class WeightError(ValueError):
    """A weight literal is malformed for the active valuation structure."""


# -- extended reals --------------------------------------------------------

class ExtReal:
    """A rational extended with +inf and -inf, totally ordered."""

    __slots__ = ("kind", "value")  # kind: -1 = -inf, 0 = finite, 1 = +inf

    def __init__(self, value, kind: int = 0):
        if kind == 0:
            value = Fraction(value)
        else:
            value = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("ExtReal is immutable")

    @property
    def is_finite(self) -> bool:
        return self.kind == 0

    def _key(self):
        if self.kind != 0:
            return (self.kind, 0)
        return (0, self.value)

    def __eq__(self, other):
        if not isinstance(other, ExtReal):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        a, b = self._key(), other._key()
        if a[0] != b[0]:
            return a[0] < b[0]
        return a[1] < b[1]

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.kind == 1:
            return "inf"
        if self.kind == -1:
            return "-inf"
        return str(self.value)


POS_INF = ExtReal(0, 1)
NEG_INF = ExtReal(0, -1)


def finite(x) -> ExtReal:
    return ExtReal(Fraction(x))


# -- complete monoids ------------------------------------------------------

@dataclass(frozen=True)
class CompleteMonoidSpec:
    """Finitary face of a complete monoid: carrier description, zero, sum."""

    name: str
    zero: object
    plus: Callable[[object, object], object]
    idempotent: bool = True

    def fold(self, values: Sequence) -> object:
        acc = self.zero
        for v in values:
            acc = self.plus(acc, v)
        return acc


SUP_MONOID = CompleteMonoidSpec("sup", NEG_INF, max)
INF_MONOID = CompleteMonoidSpec("inf", POS_INF, min)
OR_MONOID = CompleteMonoidSpec("or", 0, lambda a, b: a | b)


def monoid_sum(monoid: CompleteMonoidSpec, values: Sequence):
    return monoid.fold(values)


# -- valuation structures --------------------------------------------------

@dataclass(frozen=True)
class ValuationStructure:
    """A weight domain M, a complete monoid, and exact valuation on lassos.

    ``val_lasso(prefix, loop)`` evaluates the ultimately periodic weight
    sequence ``prefix loop loop ...``; the result is invariant under loop
    unrolling.  ``check_weight`` validates (and normalizes) a candidate
    element of M.
    """

    name: str
    monoid: CompleteMonoidSpec
    val_lasso: Callable[[Sequence, Sequence], object]
    check_weight: Callable[[object], object]
    format_weight: Callable[[object], str]

    def val_word(self, word: LassoWord):
        return self.val_lasso(word.prefix, word.loop)

    def __repr__(self):
        return "ValuationStructure(%s)" % self.name


# -- ratio -----------------------------------------------------------------

def check_ratio_weight(m) -> tuple:
    try:
        r, c = m
        r, c = Fraction(r), Fraction(c)
    except (TypeError, ValueError) as e:
        raise WeightError("ratio weight must be a (reward, cost) pair: %r" % (m,)) from e
    if c < 0:
        raise WeightError("ratio cost must be nonnegative: %r" % (m,))
    return (r, c)


def ratio_val_lasso(prefix: Sequence, loop: Sequence) -> ExtReal:
    """limsup of (r_1+...+r_n)/(c_1+...+c_n), with r/0 = -inf."""
    prefix = [check_ratio_weight(m) for m in prefix]
    loop = [check_ratio_weight(m) for m in loop]
    rq = sum(r for r, _ in loop)
    cq = sum(c for _, c in loop)
    if cq > 0:
        return ExtReal(Fraction(rq, cq))
    # all loop costs are zero; the denominator is eventually the constant
    # total prefix cost
    d = sum(c for _, c in prefix)
    if d == 0:
        return NEG_INF  # the r/0 convention
    if rq > 0:
        return POS_INF
    if rq < 0:
        return NEG_INF
    # numerators cycle with the loop; limsup is the per-period maximum
    rp = sum(r for r, _ in prefix)
    best = None
    partial = Fraction(0)
    for r, _ in loop:
        cut = Fraction(rp + partial, d)
        best = cut if best is None else max(best, cut)
        partial += r
    return ExtReal(best)


def format_ratio_weight(m) -> str:
    r, c = m
    return "(%s,%s)" % (r, c)


RATIO = ValuationStructure(
    name="ratio",
    monoid=SUP_MONOID,
    val_lasso=ratio_val_lasso,
    check_weight=check_ratio_weight,
    format_weight=format_ratio_weight,
)


# -- discounted sum --------------------------------------------------------

def check_disc_weight(m) -> tuple:
    try:
        c, d = m
        c, d = Fraction(c), Fraction(d)
    except (TypeError, ValueError) as e:
        raise WeightError("disc weight must be a (cost, discount) pair: %r" % (m,)) from e
    if c < 0:
        raise WeightError("disc cost must be nonnegative: %r" % (m,))
    if not (0 < d <= 1):
        raise WeightError("discount factor must be in (0, 1]: %r" % (m,))
    return (c, d)


def disc_val_lasso(prefix: Sequence, loop: Sequence) -> ExtReal:
    """c_0 + sum_{i>=1} c_i * prod_{j<i} d_j, exactly."""
    prefix = [check_disc_weight(m) for m in prefix]
    loop = [check_disc_weight(m) for m in loop]
    acc = Fraction(0)
    disc = Fraction(1)
    for c, d in prefix:
        acc += disc * c
        disc *= d
    s = Fraction(0)
    p = Fraction(1)
    for c, d in loop:
        s += p * c
        p *= d
    if p == 1:
        if s > 0:
            return POS_INF
        return ExtReal(acc)
    return ExtReal(acc + disc * s / (1 - p))


def format_disc_weight(m) -> str:
    c, d = m
    return "(%s,%s)" % (c, d)


DISC = ValuationStructure(
    name="disc",
    monoid=INF_MONOID,
    val_lasso=disc_val_lasso,
    check_weight=check_disc_weight,
    format_weight=format_disc_weight,
)


# -- energy ----------------------------------------------------------------

def _check_energy_weight(m, dim: int) -> tuple:
    try:
        vec = tuple(int(z) for z in m)
    except (TypeError, ValueError) as e:
        raise WeightError("energy weight must be an integer vector: %r" % (m,)) from e
    if len(vec) != dim:
        raise WeightError(
            "energy weight has dimension %d, expected %d" % (len(vec), dim)
        )
    return vec


def make_energy_val_lasso(dim: int):
    def energy_val_lasso(prefix: Sequence, loop: Sequence) -> int:
        prefix = [_check_energy_weight(m, dim) for m in prefix]
        loop = [_check_energy_weight(m, dim) for m in loop]
        level = [0] * dim
        # prefix and one loop pass must keep every storage nonnegative
        for step in list(prefix) + list(loop):
            level = [a + b for a, b in zip(level, step)]
            if any(x < 0 for x in level):
                return 0
        # the loop effect must be nonnegative so later passes only improve
        effect = [sum(step[j] for step in loop) for j in range(dim)]
        if any(x < 0 for x in effect):
            return 0
        return 1

    return energy_val_lasso


def format_energy_weight(m) -> str:
    return "(" + ",".join(str(z) for z in m) + ")"


def energy(dim: int) -> ValuationStructure:
    """Energy feasibility structure with ``dim`` storages."""
    if dim < 1:
        raise ValueError("energy dimension must be >= 1")
    return ValuationStructure(
        name="energy%d" % dim,
        monoid=OR_MONOID,
        val_lasso=make_energy_val_lasso(dim),
        check_weight=lambda m: _check_energy_weight(m, dim),
        format_weight=format_energy_weight,
    )


# -- weight literal syntax -------------------------------------------------

def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise WeightError("bad rational literal %r" % text) from e


def parse_weight(text: str, structure: ValuationStructure):
    """Parse ``(r,c)`` / ``(c,d)`` / ``(z1,...,zn)`` against a structure."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise WeightError("weight literal must be parenthesized: %r" % text)
    parts = [p for p in text[1:-1].split(",") if p.strip() != ""]
    if structure.name.startswith("energy"):
        try:
            vec = tuple(int(Fraction(p.strip())) if Fraction(p.strip()).denominator == 1 else None for p in parts)
        except ValueError as e:
            raise WeightError("bad energy literal %r" % text) from e
        if any(v is None for v in vec):
            raise WeightError("energy components must be integers: %r" % text)
        return structure.check_weight(vec)
    if len(parts) != 2:
        raise WeightError("weight literal needs two components: %r" % text)
    return structure.check_weight((parse_rational(parts[0]), parse_rational(parts[1])))


def structure_by_name(name: str) -> ValuationStructure:
    name = name.strip().lower()
    if name == "ratio":
        return RATIO
    if name == "disc":
        return DISC
    if name.startswith("energy"):
        suffix = name[len("energy"):]
        return energy(int(suffix) if suffix else 1)
    raise ValueError("unknown valuation structure %r" % name)


def format_result(structure: ValuationStructure, value) -> str:
    """Result token for CLI output: p/q, inf, -inf, 0/1, or unknown(bound=B)."""
    from .solvers import UnknownResult

    if isinstance(value, UnknownResult):
        return "unknown(bound=%d)" % value.bound
    if isinstance(value, ExtReal):
        return repr(value)
    return str(value)
