"""Ultimately periodic (lasso) words, partial lasso words, and their merging algebra.

A lasso word ``p (q)`` denotes the infinite word ``p q q q ...``.  All values in
this module are immutable; operations return new objects.  Equality on lasso
words is omega-equality (two presentations are equal iff they unroll to the
same infinite word), which coincides with structural equality of canonical
forms.
"""

from __future__ import annotations

from math import gcd
from typing import Iterable, Sequence


class _Undef:
    """Marker for an undefined position in a partial word.  Singleton."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "#"


UNDEF = _Undef()


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class LassoWord:
    """A finite prefix plus a nonempty loop, presenting an ultimately periodic word."""

    __slots__ = ("prefix", "loop", "_canon")

    def __init__(self, prefix: Sequence, loop: Sequence):
        if len(loop) == 0:
            raise ValueError("lasso loop must be nonempty")
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "loop", tuple(loop))
        object.__setattr__(self, "_canon", None)

    def __setattr__(self, name, value):
        raise AttributeError("LassoWord is immutable")

    # -- basic access ------------------------------------------------------

    def position_at(self, i: int):
        """Letter at position i of the unrolled infinite word."""
        if i < 0:
            raise IndexError("negative position")
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]

    def unroll(self, n: int) -> tuple:
        """The first n letters of the infinite word."""
        return tuple(self.position_at(i) for i in range(n))

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    @property
    def loop_len(self) -> int:
        return len(self.loop)

    # -- canonical form ----------------------------------------------------

    def canonical(self) -> "LassoWord":
        """Equivalent lasso with primitive loop and shortest prefix.

        Structural equality of canonical forms coincides with omega-equality.
        """
        if self._canon is not None:
            return self._canon
        loop = _primitive_period(self.loop)
        prefix = list(self.prefix)
        while prefix and prefix[-1] == loop[-1]:
            loop = (loop[-1],) + loop[:-1]
            prefix.pop()
        canon = LassoWord(tuple(prefix), loop)
        object.__setattr__(canon, "_canon", canon)
        object.__setattr__(self, "_canon", canon)
        return canon

    def __eq__(self, other):
        if not isinstance(other, LassoWord):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.prefix == b.prefix and a.loop == b.loop

    def __hash__(self):
        c = self.canonical()
        return hash((c.prefix, c.loop))

    def __repr__(self):
        return "LassoWord(%r, %r)" % (self.prefix, self.loop)

    # -- reshaping ---------------------------------------------------------

    def reshape(self, prefix_len: int, loop_len: int) -> "LassoWord":
        """Same infinite word with the given prefix and loop lengths.

        Valid whenever prefix_len >= |prefix| and loop_len is a multiple of
        the loop length (checked).
        """
        if prefix_len < len(self.prefix) or loop_len % len(self.loop) != 0:
            raise ValueError("incompatible target shape")
        prefix = self.unroll(prefix_len)
        loop = tuple(
            self.position_at(prefix_len + i) for i in range(loop_len)
        )
        return LassoWord(prefix, loop)

    def align(self, other: "LassoWord") -> tuple["LassoWord", "LassoWord"]:
        """Reshape both words to a common prefix length and loop length."""
        p = max(len(self.prefix), len(other.prefix))
        q = lcm(len(self.loop), len(other.loop))
        return self.reshape(p, q), other.reshape(p, q)

    def map(self, fn) -> "LassoWord":
        return LassoWord(tuple(fn(x) for x in self.prefix), tuple(fn(x) for x in self.loop))


def _primitive_period(loop: tuple) -> tuple:
    n = len(loop)
    for d in range(1, n + 1):
        if n % d == 0 and loop == loop[:d] * (n // d):
            return loop[:d]
    return loop


def position_at(w: LassoWord, i: int):
    return w.position_at(i)


def align(u: LassoWord, v: LassoWord) -> tuple[LassoWord, LassoWord]:
    return u.align(v)


def align_many(words: Sequence[LassoWord]) -> list[LassoWord]:
    """Reshape a nonempty family of lassos to one common shape."""
    p = max(w.prefix_len for w in words)
    q = 1
    for w in words:
        q = lcm(q, w.loop_len)
    return [w.reshape(p, q) for w in words]


class PartialLassoValue:
    """An ultimately periodic partial word over some value set, or Bottom.

    Undefined positions carry the UNDEF marker.  Bottom is the absorbing
    value produced by incompatible merges.
    """

    __slots__ = ("word",)

    def __init__(self, word: LassoWord | None):
        object.__setattr__(self, "word", word)

    def __setattr__(self, name, value):
        raise AttributeError("PartialLassoValue is immutable")

    @classmethod
    def bottom(cls) -> "PartialLassoValue":
        return cls(None)

    @classmethod
    def top(cls) -> "PartialLassoValue":
        return cls(LassoWord((), (UNDEF,)))

    @classmethod
    def total(cls, word: LassoWord) -> "PartialLassoValue":
        return cls(word)

    @property
    def is_bottom(self) -> bool:
        return self.word is None

    def value_at(self, i: int):
        if self.word is None:
            raise ValueError("Bottom has no positions")
        return self.word.position_at(i)

    def defined_at(self, i: int) -> bool:
        return self.value_at(i) is not UNDEF

    def __eq__(self, other):
        if not isinstance(other, PartialLassoValue):
            return NotImplemented
        if self.word is None or other.word is None:
            return (self.word is None) == (other.word is None)
        return self.word == other.word

    def __hash__(self):
        return hash(None if self.word is None else self.word)

    def __repr__(self):
        if self.word is None:
            return "PartialLassoValue(Bottom)"
        return "PartialLassoValue(%r)" % (self.word,)


def update(u: PartialLassoValue, i: int, x) -> PartialLassoValue:
    """Set position i to x; Bottom is absorbing."""
    if u.is_bottom:
        return u
    w = u.word
    if i >= w.prefix_len:
        # extend the prefix so that i is addressable
        rolled = (i + 1 - w.prefix_len) % w.loop_len
        new_prefix = w.unroll(i + 1)
        new_loop = w.loop[rolled:] + w.loop[:rolled]
        w = LassoWord(new_prefix, new_loop)
    prefix = list(w.prefix)
    prefix[i] = x
    return PartialLassoValue(LassoWord(tuple(prefix), w.loop).canonical())


def compatible(u: PartialLassoValue, v: PartialLassoValue) -> bool:
    """True iff both are defined and agree wherever both are defined."""
    if u.is_bottom or v.is_bottom:
        return False
    a, b = u.word.align(v.word)
    for x, y in zip(a.prefix + a.loop, b.prefix + b.loop):
        if x is not UNDEF and y is not UNDEF and x != y:
            return False
    return True


def _merge2(u: PartialLassoValue, v: PartialLassoValue) -> PartialLassoValue:
    if u.is_bottom or v.is_bottom:
        return PartialLassoValue.bottom()
    a, b = u.word.align(v.word)
    out = []
    for x, y in zip(a.prefix + a.loop, b.prefix + b.loop):
        if x is UNDEF:
            out.append(y)
        elif y is UNDEF or x == y:
            out.append(x)
        else:
            return PartialLassoValue.bottom()
    n = a.prefix_len
    return PartialLassoValue(LassoWord(tuple(out[:n]), tuple(out[n:])).canonical())


def merge(family: Iterable[PartialLassoValue]) -> PartialLassoValue:
    """Merge a finite family; incompatibility yields Bottom, empty family yields top."""
    result = PartialLassoValue.top()
    for u in family:
        result = _merge2(result, u)
        if result.is_bottom:
            return result
    return result


class PositionSetLasso:
    """An ultimately periodic subset of the naturals as membership bits."""

    __slots__ = ("bits",)

    def __init__(self, prefix_bits: Sequence[int], loop_bits: Sequence[int]):
        if len(loop_bits) == 0:
            raise ValueError("loop membership sequence must be nonempty")
        word = LassoWord(
            tuple(1 if b else 0 for b in prefix_bits),
            tuple(1 if b else 0 for b in loop_bits),
        ).canonical()
        object.__setattr__(self, "bits", word)

    def __setattr__(self, name, value):
        raise AttributeError("PositionSetLasso is immutable")

    @classmethod
    def empty(cls) -> "PositionSetLasso":
        return cls((), (0,))

    @classmethod
    def singleton(cls, i: int) -> "PositionSetLasso":
        return cls(tuple(1 if j == i else 0 for j in range(i + 1)), (0,))

    @classmethod
    def from_word(cls, word: LassoWord) -> "PositionSetLasso":
        return cls(word.prefix, word.loop)

    def __contains__(self, i: int) -> bool:
        return bool(self.bits.position_at(i))

    def __eq__(self, other):
        if not isinstance(other, PositionSetLasso):
            return NotImplemented
        return self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __repr__(self):
        return "PositionSetLasso(%r, %r)" % (self.bits.prefix, self.bits.loop)


# -- text syntax -----------------------------------------------------------
#
# Whitespace-separated letter tokens with the loop in parentheses, e.g.
# ``a b (b a)`` or ``(a)``.  Letters are identifiers or parenthesized weight
# tuples such as ``(1,2)``; the last top-level parenthesized group is the
# loop, every other group is a tuple letter.

class LassoSyntaxError(ValueError):
    pass


def _top_level_groups(text: str):
    """Split into tokens; parenthesized groups come out as (start, end) spans."""
    items = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "(":
            depth, j = 0, i
            while j < n:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if depth != 0:
                raise LassoSyntaxError("unbalanced parentheses in %r" % text)
            items.append(("group", text[i + 1 : j]))
            i = j + 1
        elif c == ")":
            raise LassoSyntaxError("unbalanced parentheses in %r" % text)
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            items.append(("ident", text[i:j]))
            i = j
    return items


def parse_lasso(text: str, parse_letter=None) -> LassoWord:
    """Parse the lasso word text syntax.

    parse_letter maps a raw token (identifier, or ``(...)`` tuple text with
    parentheses restored) to a letter value; identity by default.
    """
    if parse_letter is None:
        parse_letter = lambda s: s
    items = _top_level_groups(text)
    if not items or items[-1][0] != "group":
        raise LassoSyntaxError("lasso word must end with a parenthesized loop: %r" % text)
    loop_src = items[-1][1]
    prefix_tokens = []
    for kind, val in items[:-1]:
        prefix_tokens.append(val if kind == "ident" else "(" + val + ")")
    loop_tokens = []
    for kind, val in _top_level_groups(loop_src):
        loop_tokens.append(val if kind == "ident" else "(" + val + ")")
    if not loop_tokens:
        raise LassoSyntaxError("empty loop in %r" % text)
    return LassoWord(
        tuple(parse_letter(t) for t in prefix_tokens),
        tuple(parse_letter(t) for t in loop_tokens),
    )


def format_lasso(w: LassoWord, format_letter=None) -> str:
    if format_letter is None:
        format_letter = str
    parts = [format_letter(x) for x in w.prefix]
    parts.append("(" + " ".join(format_letter(x) for x in w.loop) + ")")
    return " ".join(parts)
