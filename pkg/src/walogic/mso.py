"""Monadic second-order logic over omega-words, compiled to Buchi automata.

Formulas with free variables are compiled over a track-encoded alphabet: an
encoded letter is a tuple ``(base, b1, ..., bk)`` where ``bi`` is the 0/1
membership bit of the i-th variable of the caller-fixed free-variable order.
First-order variables are encoded as singleton tracks; every compiled
automaton is intersected with a validity automaton so that its language
contains only encodings where each first-order track is a singleton.

Variable naming: identifiers starting with a lowercase letter are first
order, with an uppercase letter second order.  Names starting with ``$`` are
reserved for internally generated variables and rejected by the parser.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

from .buchi import (
    BuchiAutomaton,
    DEFAULT_COMPLEMENT_CAP,
    InputError,
    accepts,
    complement,
    product_intersection,
    simplify,
    union,
    universal_automaton,
)
from .lasso import LassoWord, PositionSetLasso, lcm


def is_first_order(var: str) -> bool:
    base = var.lstrip("$")
    return bool(base) and base[0].islower()


def is_second_order(var: str) -> bool:
    base = var.lstrip("$")
    return bool(base) and base[0].isupper()


# -- abstract syntax ---------------------------------------------------------

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Pa(Formula):
    letter: object
    var: str


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Less(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class InSet(Formula):
    var: str
    setvar: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


# Internal primitives: not produced by the parser, but available to
# programmatic constructions.  Each compiles to a small (deterministic or
# near-deterministic) automaton, avoiding complementation blowups.

@dataclass(frozen=True)
class LetterIn(Formula):
    """The letter at (first-order) position var is in the given set."""

    var: str
    letters: frozenset

    def __post_init__(self):
        object.__setattr__(self, "letters", frozenset(self.letters))


@dataclass(frozen=True)
class EmptySet(Formula):
    setvar: str


@dataclass(frozen=True)
class SubsetEq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class SingletonIs(Formula):
    """setvar = {var}."""

    setvar: str
    var: str


@dataclass(frozen=True)
class InfOftenAny(Formula):
    """Infinitely many positions belong to at least one of the set vars."""

    setvars: tuple

    def __post_init__(self):
        object.__setattr__(self, "setvars", tuple(self.setvars))


@dataclass(frozen=True)
class Partition(Formula):
    """Every position belongs to exactly one of the set vars."""

    setvars: tuple

    def __post_init__(self):
        object.__setattr__(self, "setvars", tuple(self.setvars))


@dataclass(frozen=True)
class RunChain(Formula):
    """The set vars encode an accepting run of an automaton.

    ``qvars`` maps each state of the automaton to a distinct second-order
    variable; position i belongs to the variable of the state the run is in
    while reading position i.  Holds iff the tracks describe exactly one
    sequence of states that is an accepting run on the base word.
    """

    automaton: BuchiAutomaton
    qvars: tuple  # of (state, var) pairs

    def __post_init__(self):
        object.__setattr__(self, "qvars", tuple(self.qvars))


def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, Pa):
        return frozenset([phi.var])
    if isinstance(phi, (Eq, Less, SubsetEq)):
        return frozenset([phi.left, phi.right])
    if isinstance(phi, InSet):
        return frozenset([phi.var, phi.setvar])
    if isinstance(phi, LetterIn):
        return frozenset([phi.var])
    if isinstance(phi, EmptySet):
        return frozenset([phi.setvar])
    if isinstance(phi, SingletonIs):
        return frozenset([phi.setvar, phi.var])
    if isinstance(phi, (InfOftenAny, Partition)):
        return frozenset(phi.setvars)
    if isinstance(phi, RunChain):
        return frozenset(v for _, v in phi.qvars)
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (Forall, Exists)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError("not a formula: %r" % (phi,))


# -- parser ------------------------------------------------------------------

class MsoSyntaxError(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow><->|->)|(?P<sym>[()=<&|!.,])|(?P<kw>forall\b|exists\b)"
    r"|(?P<pred>P_[A-Za-z0-9_]+)|(?P<ident>[A-Za-z_$][A-Za-z0-9_$']*))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise MsoSyntaxError("unexpected input at %r" % rest[:20])
        pos = m.end()
        for kind in ("arrow", "sym", "kw", "pred", "ident"):
            val = m.group(kind)
            if val is not None:
                tokens.append((kind, val))
                break
    tokens.append(("eof", ""))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, val):
        kind, v = self.next()
        if v != val:
            raise MsoSyntaxError("expected %r, found %r" % (val, v))

    def variable(self):
        kind, v = self.next()
        if kind != "ident":
            raise MsoSyntaxError("expected a variable, found %r" % v)
        if v.startswith("$"):
            raise MsoSyntaxError("names starting with '$' are reserved: %r" % v)
        return v

    def formula(self):
        return self.iff()

    def iff(self):
        left = self.implies()
        if self.peek()[1] == "<->":
            self.next()
            return Iff(left, self.iff())
        return left

    def implies(self):
        left = self.disj()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.implies())
        return left

    def disj(self):
        left = self.conj()
        while self.peek()[1] == "|":
            self.next()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek()[1] == "&":
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, v = self.peek()
        if v == "!":
            self.next()
            return Not(self.unary())
        if v in ("forall", "exists"):
            self.next()
            var = self.variable()
            self.expect(".")
            body = self.formula()
            return Forall(var, body) if v == "forall" else Exists(var, body)
        return self.atom()

    def atom(self):
        kind, v = self.next()
        if v == "(":
            f = self.formula()
            self.expect(")")
            return f
        if kind == "pred":
            letter = v[2:]
            self.expect("(")
            x = self.variable()
            self.expect(")")
            if not is_first_order(x):
                raise MsoSyntaxError("letter predicates take a first-order variable")
            return Pa(letter, x)
        if kind == "ident":
            if v.startswith("$"):
                raise MsoSyntaxError("names starting with '$' are reserved: %r" % v)
            nk, nv = self.peek()
            if nv == "(":
                if not is_second_order(v):
                    raise MsoSyntaxError("membership needs a second-order variable: %r" % v)
                self.next()
                x = self.variable()
                self.expect(")")
                if not is_first_order(x):
                    raise MsoSyntaxError("membership takes a first-order element variable")
                return InSet(x, v)
            if nv in ("=", "<"):
                self.next()
                y = self.variable()
                if not (is_first_order(v) and is_first_order(y)):
                    raise MsoSyntaxError("position comparison needs first-order variables")
                return Eq(v, y) if nv == "=" else Less(v, y)
            raise MsoSyntaxError("dangling variable %r" % v)
        raise MsoSyntaxError("unexpected token %r" % v)


def parse_mso(text: str) -> Formula:
    p = _Parser(_tokenize(text))
    f = p.formula()
    if p.peek()[0] != "eof":
        raise MsoSyntaxError("trailing input after formula: %r" % p.peek()[1])
    _check_bindings(f, set())
    return f


def _check_bindings(phi: Formula, bound: set):
    if isinstance(phi, (Forall, Exists)):
        if phi.var in bound:
            raise MsoSyntaxError("variable %r is bound twice in nested scopes" % phi.var)
        _check_bindings(phi.body, bound | {phi.var})
    elif isinstance(phi, Not):
        _check_bindings(phi.body, bound)
    elif isinstance(phi, (And, Or, Implies, Iff)):
        _check_bindings(phi.left, bound)
        _check_bindings(phi.right, bound)


def format_formula(phi: Formula) -> str:
    if isinstance(phi, Pa):
        return "P_%s(%s)" % (phi.letter, phi.var)
    if isinstance(phi, Eq):
        return "%s = %s" % (phi.left, phi.right)
    if isinstance(phi, Less):
        return "%s < %s" % (phi.left, phi.right)
    if isinstance(phi, InSet):
        return "%s(%s)" % (phi.setvar, phi.var)
    if isinstance(phi, Not):
        return "!(%s)" % format_formula(phi.body)
    if isinstance(phi, And):
        return "(%s & %s)" % (format_formula(phi.left), format_formula(phi.right))
    if isinstance(phi, Or):
        return "(%s | %s)" % (format_formula(phi.left), format_formula(phi.right))
    if isinstance(phi, Implies):
        return "(%s -> %s)" % (format_formula(phi.left), format_formula(phi.right))
    if isinstance(phi, Iff):
        return "(%s <-> %s)" % (format_formula(phi.left), format_formula(phi.right))
    if isinstance(phi, Forall):
        return "forall %s. %s" % (phi.var, format_formula(phi.body))
    if isinstance(phi, Exists):
        return "exists %s. %s" % (phi.var, format_formula(phi.body))
    if isinstance(phi, LetterIn):
        letters = sorted(phi.letters, key=repr)
        body = " | ".join("P_%s(%s)" % (a, phi.var) for a in letters)
        return "(%s)" % body if body else "false"
    if isinstance(phi, EmptySet):
        return "forall %s'. !%s(%s')" % ("z", phi.setvar, "z")
    if isinstance(phi, SubsetEq):
        return "forall z. (%s(z) -> %s(z))" % (phi.left, phi.right)
    if isinstance(phi, SingletonIs):
        return "forall z. (%s(z) <-> z = %s)" % (phi.setvar, phi.var)
    if isinstance(phi, InfOftenAny):
        return "forall z. exists z'. (z < z' & (%s))" % " | ".join(
            "%s(z')" % v for v in phi.setvars
        )
    if isinstance(phi, Partition):
        return "forall z. exactly-one(%s)" % ", ".join(
            "%s(z)" % v for v in phi.setvars
        )
    if isinstance(phi, RunChain):
        return "run-chain(%s)" % ", ".join(v for _, v in phi.qvars)
    raise TypeError("not a formula: %r" % (phi,))


# -- alphabet encoding -------------------------------------------------------

def encoded_alphabet(alphabet, k: int) -> frozenset:
    return frozenset(
        (a,) + bits
        for a in alphabet
        for bits in itertools.product((0, 1), repeat=k)
    )


def encode_word(word: LassoWord, assignment: dict, frees: Sequence[str]) -> LassoWord:
    """Attach one 0/1 track per variable in frees to a base lasso word.

    First-order variables map to position numbers, second-order variables to
    PositionSetLasso values (or LassoWord of bits).
    """
    p = word.prefix_len
    q = word.loop_len
    sets = {}
    for v in frees:
        if v not in assignment:
            raise InputError("assignment is missing variable %r" % v)
        val = assignment[v]
        if is_first_order(v):
            if not isinstance(val, int) or val < 0:
                raise InputError("first-order variable %r needs a position" % v)
            bits = PositionSetLasso.singleton(val).bits
        else:
            if isinstance(val, PositionSetLasso):
                bits = val.bits
            elif isinstance(val, LassoWord):
                bits = PositionSetLasso.from_word(val).bits
            else:
                raise InputError("second-order variable %r needs a position set" % v)
        sets[v] = bits
        p = max(p, bits.prefix_len)
        q = lcm(q, bits.loop_len)
    base = word.reshape(p, q)
    tracks = [sets[v].reshape(p, q) for v in frees]

    def letter(i, xs):
        return (xs,) + tuple(t.prefix[i] if i < p else t.loop[i - p] for t in tracks)

    prefix = tuple(letter(i, base.prefix[i]) for i in range(p))
    loop = tuple(letter(p + j, base.loop[j]) for j in range(q))
    return LassoWord(prefix, loop)


def decode_word(word: LassoWord) -> LassoWord:
    """Strip all tracks from an encoded word, keeping the base letters."""
    return word.map(lambda x: x[0])


def decode_assignment(word: LassoWord, frees: Sequence[str]) -> dict:
    """Recover the variable assignment carried by an encoded word."""
    out = {}
    for idx, v in enumerate(frees, start=1):
        bits = word.map(lambda x, idx=idx: x[idx]).canonical()
        if is_first_order(v):
            horizon = bits.prefix_len + bits.loop_len
            positions = [i for i in range(horizon) if bits.position_at(i)]
            if len(positions) != 1 or any(bits.loop):
                raise InputError("track for %r is not a singleton" % v)
            out[v] = positions[0]
        else:
            out[v] = PositionSetLasso.from_word(bits)
    return out


# -- compilation -------------------------------------------------------------

def _track_index(frees, var) -> int:
    try:
        return list(frees).index(var) + 1
    except ValueError:
        raise InputError("variable %r is not among the free variables %r" % (var, tuple(frees)))


def _letter_filter_automaton(sigma, keep) -> BuchiAutomaton:
    """One accepting state allowing exactly the letters satisfying keep."""
    return BuchiAutomaton(
        sigma, frozenset([0]), frozenset([0]),
        frozenset((0, a, 0) for a in sigma if keep(a)),
        frozenset([0]),
    )


def _validity_automaton(alphabet, frees) -> BuchiAutomaton:
    """Accepts encodings where every first-order track is a singleton."""
    fo = tuple(v for v in frees if is_first_order(v))
    sigma = encoded_alphabet(alphabet, len(frees))
    if not fo:
        return universal_automaton(sigma)
    idx = {v: _track_index(frees, v) for v in fo}
    all_seen = frozenset(fo)
    states = [frozenset(s) for r in range(len(fo) + 1) for s in itertools.combinations(fo, r)]
    transitions = set()
    for s in states:
        for a in sigma:
            here = frozenset(v for v in fo if a[idx[v]])
            if here & s:
                continue
            transitions.add((s, a, s | here))
    return BuchiAutomaton(
        sigma, frozenset(states), frozenset([frozenset()]),
        frozenset(transitions), frozenset([all_seen]),
    )


def _compile_atom(phi: Formula, alphabet, frees) -> BuchiAutomaton:
    sigma = encoded_alphabet(alphabet, len(frees))
    ix = lambda v: _track_index(frees, v)
    if isinstance(phi, Pa):
        return _compile_atom(LetterIn(phi.var, frozenset([phi.letter])), alphabet, frees)
    if isinstance(phi, LetterIn):
        i = ix(phi.var)
        good = phi.letters
        return _letter_filter_automaton(sigma, lambda a: not a[i] or a[0] in good)
    if isinstance(phi, Eq):
        i, j = ix(phi.left), ix(phi.right)
        return _letter_filter_automaton(sigma, lambda a: a[i] == a[j])
    if isinstance(phi, Less):
        i, j = ix(phi.left), ix(phi.right)
        # states: 0 = seen neither, 1 = seen left, 2 = seen both in order
        transitions = set()
        for a in sigma:
            if not a[i] and not a[j]:
                transitions.add((0, a, 0))
                transitions.add((1, a, 1))
                transitions.add((2, a, 2))
            elif a[i] and not a[j]:
                transitions.add((0, a, 1))
            elif a[j] and not a[i]:
                transitions.add((1, a, 2))
        return BuchiAutomaton(
            sigma, frozenset([0, 1, 2]), frozenset([0]),
            frozenset(transitions), frozenset([2]),
        )
    if isinstance(phi, InSet):
        i, j = ix(phi.var), ix(phi.setvar)
        return _letter_filter_automaton(sigma, lambda a: not a[i] or a[j])
    if isinstance(phi, EmptySet):
        i = ix(phi.setvar)
        return _letter_filter_automaton(sigma, lambda a: not a[i])
    if isinstance(phi, SubsetEq):
        i, j = ix(phi.left), ix(phi.right)
        return _letter_filter_automaton(sigma, lambda a: not a[i] or a[j])
    if isinstance(phi, SingletonIs):
        i, j = ix(phi.setvar), ix(phi.var)
        return _letter_filter_automaton(sigma, lambda a: a[i] == a[j])
    if isinstance(phi, InfOftenAny):
        idxs = [ix(v) for v in phi.setvars]
        transitions = set()
        for a in sigma:
            hit = 1 if any(a[i] for i in idxs) else 0
            transitions.add((0, a, hit))
            transitions.add((1, a, hit))
        return BuchiAutomaton(
            sigma, frozenset([0, 1]), frozenset([0]),
            frozenset(transitions), frozenset([1]),
        )
    if isinstance(phi, Partition):
        idxs = [ix(v) for v in phi.setvars]
        return _letter_filter_automaton(
            sigma, lambda a: sum(a[i] for i in idxs) == 1
        )
    if isinstance(phi, RunChain):
        ba = phi.automaton
        idx_of_state = {q: ix(v) for q, v in phi.qvars}
        if set(idx_of_state) != set(ba.states):
            raise InputError("run-chain needs one variable per automaton state")

        def state_here(a):
            here = [q for q, i in idx_of_state.items() if a[i]]
            return here[0] if len(here) == 1 else None

        transitions = set()
        initial = set()
        for q in ba.states:
            initial.add(q)
        # state of the checker = expected run state at the current position
        for a in sigma:
            q = state_here(a)
            if q is None:
                continue
            for (p, x, q2) in ba.transitions:
                if p == q and x == a[0]:
                    transitions.add((q, a, q2))
        # only runs started in an initial state of ba count
        return BuchiAutomaton(
            sigma, frozenset(ba.states), frozenset(ba.initial),
            frozenset(transitions), frozenset(ba.accepting),
        )
    raise TypeError("not an atomic formula: %r" % (phi,))


def _project_last(a: BuchiAutomaton) -> BuchiAutomaton:
    strip = lambda x: x[:-1]
    return BuchiAutomaton(
        frozenset(strip(x) for x in a.alphabet),
        a.states,
        a.initial,
        frozenset((p, strip(x), q) for (p, x, q) in a.transitions),
        a.accepting,
    )


def compile_mso(
    phi: Formula,
    alphabet,
    frees: Sequence[str] = (),
    complement_cap: int = DEFAULT_COMPLEMENT_CAP,
) -> BuchiAutomaton:
    """Compile to a Buchi automaton over the track-encoded alphabet.

    The language is exactly the set of valid encodings (first-order tracks
    singletons) whose base word satisfies phi under the carried assignment.
    frees must be an ordered superset of the free variables of phi.
    """
    alphabet = frozenset(alphabet)
    if not alphabet:
        raise InputError("alphabet must be nonempty")
    frees = tuple(frees)
    if len(set(frees)) != len(frees):
        raise InputError("duplicate free variable in %r" % (frees,))
    missing = free_vars(phi) - set(frees)
    if missing:
        raise InputError("free variables %r not listed" % (sorted(missing),))
    cache: dict = {}
    return _compile(phi, alphabet, frees, complement_cap, cache)


def _compile(phi, alphabet, frees, cap, cache) -> BuchiAutomaton:
    key = (phi, frees)
    hit = cache.get(key)
    if hit is not None:
        return hit
    validity = lambda: _validity_automaton(alphabet, frees)
    if isinstance(phi, (Pa, Eq, Less, InSet, LetterIn, EmptySet, SubsetEq,
                        SingletonIs, InfOftenAny, Partition, RunChain)):
        a = simplify(product_intersection(_compile_atom(phi, alphabet, frees), validity()))
    elif isinstance(phi, Not):
        inner = _compile(phi.body, alphabet, frees, cap, cache)
        a = product_intersection(
            complement(inner, cap=cap, context=format_formula(phi)), validity()
        )
    elif isinstance(phi, And):
        a = product_intersection(
            _compile(phi.left, alphabet, frees, cap, cache),
            _compile(phi.right, alphabet, frees, cap, cache),
        )
    elif isinstance(phi, Or):
        a = union(
            _compile(phi.left, alphabet, frees, cap, cache),
            _compile(phi.right, alphabet, frees, cap, cache),
        )
    elif isinstance(phi, Implies):
        a = _compile(Or(Not(phi.left), phi.right), alphabet, frees, cap, cache)
    elif isinstance(phi, Iff):
        a = _compile(
            And(Implies(phi.left, phi.right), Implies(phi.right, phi.left)),
            alphabet, frees, cap, cache,
        )
    elif isinstance(phi, Exists):
        if phi.var in frees:
            raise InputError("quantifier rebinds visible variable %r" % phi.var)
        inner = _compile(phi.body, alphabet, frees + (phi.var,), cap, cache)
        a = product_intersection(
            simplify(_project_last(inner)), validity()
        )
    elif isinstance(phi, Forall):
        a = _compile(Not(Exists(phi.var, Not(phi.body))), alphabet, frees, cap, cache)
    else:
        raise TypeError("not a formula: %r" % (phi,))
    a = simplify(a)
    cache[key] = a
    return a


def satisfies_mso(
    phi: Formula,
    word: LassoWord,
    assignment: Optional[dict] = None,
    complement_cap: int = DEFAULT_COMPLEMENT_CAP,
) -> bool:
    """Exact model checking of an MSO formula on a lasso word."""
    assignment = dict(assignment or {})
    frees = tuple(sorted(free_vars(phi)))
    alphabet = frozenset(word.prefix) | frozenset(word.loop)
    a = compile_mso(phi, alphabet, frees, complement_cap=complement_cap)
    encoded = encode_word(word, assignment, frees)
    return accepts(a, encoded) is not None
