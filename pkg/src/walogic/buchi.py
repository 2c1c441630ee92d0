"""Unweighted Buchi and Muller automata with exact acceptance on lasso words.

Everything here works on the finite product graph of an automaton with the
positions of a lasso word, so acceptance, emptiness, ambiguity and language
sampling are all decidable and exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .lasso import LassoWord, lcm


class InputError(ValueError):
    """Malformed input (letter outside the alphabet, bad structure, ...)."""


class ResourceError(RuntimeError):
    """A configured size cap was exceeded."""


DEFAULT_COMPLEMENT_CAP = 12


def _sort_key(x):
    return (str(type(x)), repr(x))


@dataclass(frozen=True)
class BuchiAutomaton:
    alphabet: frozenset
    states: frozenset
    initial: frozenset
    transitions: frozenset  # of (source, letter, target)
    accepting: frozenset

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        if not self.initial <= self.states:
            raise InputError("initial states must be states")
        if not self.accepting <= self.states:
            raise InputError("accepting states must be states")
        for (p, a, q) in self.transitions:
            if p not in self.states or q not in self.states:
                raise InputError("transition endpoints must be states")
            if a not in self.alphabet:
                raise InputError("transition letter %r not in alphabet" % (a,))

    @cached_property
    def succ(self) -> dict:
        """(state, letter) -> set of targets."""
        m: dict = {}
        for (p, a, q) in self.transitions:
            m.setdefault((p, a), set()).add(q)
        return m

    @cached_property
    def out(self) -> dict:
        """state -> list of outgoing transitions."""
        m: dict = {q: [] for q in self.states}
        for t in self.transitions:
            m[t[0]].append(t)
        for q in m:
            m[q].sort(key=_sort_key)
        return m

    def is_deterministic(self) -> bool:
        if len(self.initial) > 1:
            return False
        return all(len(v) <= 1 for v in self.succ.values())


@dataclass(frozen=True)
class MullerAutomaton:
    alphabet: frozenset
    states: frozenset
    initial: frozenset
    transitions: frozenset
    accsets: frozenset  # of frozensets of states

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(
            self, "accsets", frozenset(frozenset(s) for s in self.accsets)
        )
        for s in self.accsets:
            if not s <= self.states:
                raise InputError("acceptance set members must be states")

    @cached_property
    def out(self) -> dict:
        m: dict = {q: [] for q in self.states}
        for t in self.transitions:
            m[t[0]].append(t)
        for q in m:
            m[q].sort(key=_sort_key)
        return m


@dataclass(frozen=True)
class LassoRun:
    """A run presented as prefix and loop transition sequences."""

    prefix: tuple
    loop: tuple

    def __post_init__(self):
        if len(self.loop) == 0:
            raise ValueError("run loop must be nonempty")

    def as_word(self) -> LassoWord:
        """The run as a lasso over transitions (omega-equality applies)."""
        return LassoWord(self.prefix, self.loop)

    def transition_at(self, i: int):
        return self.as_word().position_at(i)

    def label_word(self) -> LassoWord:
        return LassoWord(
            tuple(t[1] for t in self.prefix), tuple(t[1] for t in self.loop)
        )

    def loop_states(self) -> frozenset:
        """States occurring in the canonical (primitive period) loop."""
        canon = self.as_word().canonical()
        states = set()
        for t in canon.loop:
            states.add(t[0])
            states.add(t[2])
        return frozenset(states)


# -- product graph with a lasso word ---------------------------------------

def _check_letters(alphabet, w: LassoWord):
    for x in w.prefix + w.loop:
        if x not in alphabet:
            raise InputError("letter %r not in automaton alphabet" % (x,))


def _product_nodes(a, w: LassoWord):
    """Reachable (state, position-index) nodes plus the labeled edge map.

    Positions 0..n-1 with n = |prefix|+|loop|; from position i the next
    position is i+1, wrapping from n-1 back to |prefix|.
    """
    n = w.prefix_len + w.loop_len

    def next_pos(i):
        return i + 1 if i + 1 < n else w.prefix_len

    edges: dict = {}
    start = [(q, 0) for q in sorted(a.initial, key=_sort_key)]
    seen = set(start)
    frontier = list(start)
    while frontier:
        q, i = frontier.pop()
        letter = w.position_at(i)
        for t in a.out.get(q, ()):
            if t[1] != letter:
                continue
            v = (t[2], next_pos(i))
            edges.setdefault((q, i), []).append((t, v))
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    for k in edges:
        edges[k].sort(key=_sort_key)
    return start, seen, edges


def _bfs_path(edges, sources, target, min_len=0):
    """Transition path from any source to target; None if unreachable.

    With min_len=1 the empty path is not allowed (used for cycles).
    """
    parent = {}
    frontier = []
    for s in sources:
        if s == target and min_len == 0:
            return []
        frontier.append(s)
    visited = set(frontier)
    if min_len > 0:
        # allow returning to a source; seed the search by one step
        visited = set(frontier)
    while frontier:
        nxt = []
        for u in frontier:
            for (t, v) in edges.get(u, ()):
                if v == target:
                    path = [(u, t)]
                    cur = u
                    while cur in parent:
                        pu, pt = parent[cur]
                        path.append((pu, pt))
                        cur = pu
                    path.reverse()
                    return [t for (_, t) in path]
                if v not in visited:
                    visited.add(v)
                    parent[v] = (u, t)
                    nxt.append(v)
        frontier = nxt
    return None


def _bfs_cycle(edges, node):
    """Nonempty transition cycle node -> node, or None."""
    # one-step seeds, then BFS back to node
    parent = {}
    frontier = []
    for (t, v) in edges.get(node, ()):
        if v == node:
            return [t]
        if v not in parent:
            parent[v] = (None, t)
            frontier.append(v)
    while frontier:
        nxt = []
        for u in frontier:
            for (t, v) in edges.get(u, ()):
                if v == node:
                    path = [t]
                    cur = u
                    while True:
                        pu, pt = parent[cur]
                        path.append(pt)
                        if pu is None:
                            break
                        cur = pu
                    path.reverse()
                    return path
                if v not in parent and v != node:
                    parent[v] = (u, t)
                    nxt.append(v)
        frontier = nxt
    return None


def accepts(a: BuchiAutomaton, w: LassoWord) -> Optional[LassoRun]:
    """An accepting lasso run of a on w, or None."""
    _check_letters(a.alphabet, w)
    start, nodes, edges = _product_nodes(a, w)
    candidates = sorted(
        (v for v in nodes if v[0] in a.accepting and v[1] >= w.prefix_len),
        key=_sort_key,
    )
    for v in candidates:
        cycle = _bfs_cycle(edges, v)
        if cycle is None:
            continue
        path = _bfs_path(edges, start, v)
        if path is None:
            continue
        return LassoRun(tuple(path), tuple(cycle))
    return None


def run_is_valid(a: BuchiAutomaton, run: LassoRun, w: LassoWord) -> bool:
    """Replay a run: matching transitions, initial start, labels, acceptance."""
    seq = run.prefix + run.loop
    if not seq or seq[0][0] not in a.initial:
        return False
    for t in seq:
        if t not in a.transitions:
            return False
    horizon = len(run.prefix) + 2 * lcm(len(run.loop), w.loop_len) + w.prefix_len
    for i in range(horizon):
        t = run.transition_at(i)
        t_next = run.transition_at(i + 1)
        if t[2] != t_next[0]:
            return False
        if t[1] != w.position_at(i):
            return False
    return any(t[0] in a.accepting or t[2] in a.accepting for t in run.loop)


def muller_run_is_accepting(m: MullerAutomaton, run: LassoRun) -> bool:
    return run.loop_states() in m.accsets


def is_empty(a: BuchiAutomaton) -> Optional[LassoWord]:
    """None if the language is empty, otherwise a witness lasso word."""
    edges = {q: [(t, t[2]) for t in a.out.get(q, ())] for q in a.states}
    reachable = _reachable_states(a)
    for f in sorted(a.accepting & reachable, key=_sort_key):
        cycle = _bfs_cycle(edges, f)
        if cycle is None:
            continue
        path = _bfs_path(edges, sorted(a.initial, key=_sort_key), f)
        if path is None:
            continue
        return LassoWord(
            tuple(t[1] for t in path), tuple(t[1] for t in cycle)
        ).canonical()
    return None


def _reachable_states(a) -> set:
    seen = set(a.initial)
    frontier = list(a.initial)
    while frontier:
        q = frontier.pop()
        for t in a.out.get(q, ()):
            if t[2] not in seen:
                seen.add(t[2])
                frontier.append(t[2])
    return seen


# -- strongly connected components -----------------------------------------

def strongly_connected_components(nodes, succ) -> list:
    """Iterative Tarjan; returns a list of lists of nodes."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    result = []
    counter = itertools.count()
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in index:
                    index[u] = low[u] = next(counter)
                    stack.append(u)
                    on_stack.add(u)
                    work.append((u, iter(succ(u))))
                    advanced = True
                    break
                elif u in on_stack:
                    low[v] = min(low[v], index[u])
            if not advanced:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        u = stack.pop()
                        on_stack.discard(u)
                        comp.append(u)
                        if u == v:
                            break
                    result.append(comp)
    return result


# -- trimming, relabeling, quotienting -------------------------------------

def _empty_automaton(alphabet) -> BuchiAutomaton:
    return BuchiAutomaton(frozenset(alphabet), frozenset(), frozenset(), frozenset(), frozenset())


def trim(a: BuchiAutomaton) -> BuchiAutomaton:
    """Keep states reachable from initial that can reach an accepting cycle."""
    reachable = _reachable_states(a)
    succ = lambda q: [t[2] for t in a.out.get(q, ())]
    sccs = strongly_connected_components(sorted(a.states, key=_sort_key), succ)
    good_scc_states = set()
    for comp in sccs:
        comp_set = set(comp)
        has_edge = any(
            t[2] in comp_set for q in comp for t in a.out.get(q, ())
        )
        if has_edge and comp_set & a.accepting:
            good_scc_states |= comp_set
    # states that can reach a good SCC (backward closure)
    pred: dict = {}
    for (p, x, q) in a.transitions:
        pred.setdefault(q, set()).add(p)
    live = set(good_scc_states)
    frontier = list(live)
    while frontier:
        q = frontier.pop()
        for p in pred.get(q, ()):
            if p not in live:
                live.add(p)
                frontier.append(p)
    keep = reachable & live
    if not keep:
        return _empty_automaton(a.alphabet)
    return BuchiAutomaton(
        a.alphabet,
        frozenset(keep),
        a.initial & keep,
        frozenset(t for t in a.transitions if t[0] in keep and t[2] in keep),
        a.accepting & keep,
    )


def relabel(a: BuchiAutomaton) -> BuchiAutomaton:
    """Deterministically rename states to 0..n-1 in BFS order."""
    order = []
    seen = set()
    frontier = sorted(a.initial, key=_sort_key)
    for q in frontier:
        seen.add(q)
        order.append(q)
    while frontier:
        nxt = []
        for q in frontier:
            for t in a.out.get(q, ()):
                if t[2] not in seen:
                    seen.add(t[2])
                    order.append(t[2])
                    nxt.append(t[2])
        frontier = nxt
    for q in sorted(a.states - seen, key=_sort_key):
        order.append(q)
    names = {q: i for i, q in enumerate(order)}
    return BuchiAutomaton(
        a.alphabet,
        frozenset(names.values()),
        frozenset(names[q] for q in a.initial),
        frozenset((names[p], x, names[q]) for (p, x, q) in a.transitions),
        frozenset(names[q] for q in a.accepting),
    )


def bisim_quotient(a: BuchiAutomaton) -> BuchiAutomaton:
    """Quotient by forward bisimulation (language-preserving)."""
    if not a.states:
        return a
    block = {q: (q in a.accepting) for q in a.states}
    while True:
        sig = {}
        for q in a.states:
            sig[q] = (
                block[q],
                frozenset((t[1], block[t[2]]) for t in a.out.get(q, ())),
            )
        ids = {s: i for i, s in enumerate(sorted(set(sig.values()), key=_sort_key))}
        new_block = {q: ids[sig[q]] for q in a.states}
        if len(set(new_block.values())) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    return relabel(
        BuchiAutomaton(
            a.alphabet,
            frozenset(block.values()),
            frozenset(block[q] for q in a.initial),
            frozenset((block[p], x, block[q]) for (p, x, q) in a.transitions),
            frozenset(block[q] for q in a.accepting),
        )
    )


def simplify(a: BuchiAutomaton) -> BuchiAutomaton:
    return bisim_quotient(relabel(trim(a)))


# -- boolean operations ----------------------------------------------------

def product_intersection(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    """Standard two-phase Buchi intersection."""
    if a.alphabet != b.alphabet:
        raise InputError("intersection requires a common alphabet")
    initial = frozenset(
        (p, r, 1) for p in a.initial for r in b.initial
    )
    states = set(initial)
    transitions = set()
    frontier = list(initial)
    while frontier:
        (p, r, i) = frontier.pop()
        if i == 1:
            ni = 2 if p in a.accepting else 1
        else:
            ni = 1 if r in b.accepting else 2
        for ta in a.out.get(p, ()):
            x = ta[1]
            for rb in b.succ.get((r, x), ()):
                v = (ta[2], rb, ni)
                transitions.add(((p, r, i), x, v))
                if v not in states:
                    states.add(v)
                    frontier.append(v)
    acc = frozenset(s for s in states if s[2] == 2 and s[1] in b.accepting)
    return simplify(
        BuchiAutomaton(a.alphabet, frozenset(states), initial, frozenset(transitions), acc)
    )


def union(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    if a.alphabet != b.alphabet:
        raise InputError("union requires a common alphabet")
    tag = lambda i, q: (i, q)
    return simplify(
        BuchiAutomaton(
            a.alphabet,
            frozenset(tag(0, q) for q in a.states) | frozenset(tag(1, q) for q in b.states),
            frozenset(tag(0, q) for q in a.initial) | frozenset(tag(1, q) for q in b.initial),
            frozenset((tag(0, p), x, tag(0, q)) for (p, x, q) in a.transitions)
            | frozenset((tag(1, p), x, tag(1, q)) for (p, x, q) in b.transitions),
            frozenset(tag(0, q) for q in a.accepting) | frozenset(tag(1, q) for q in b.accepting),
        )
    )


def universal_automaton(alphabet) -> BuchiAutomaton:
    return BuchiAutomaton(
        frozenset(alphabet),
        frozenset([0]),
        frozenset([0]),
        frozenset((0, a, 0) for a in alphabet),
        frozenset([0]),
    )


def _complete_deterministic(a: BuchiAutomaton) -> BuchiAutomaton:
    """Add a rejecting sink so every (state, letter) has a successor."""
    sink = ("sink",)
    states = set(a.states) | {sink}
    transitions = set(a.transitions)
    for q in states:
        for x in a.alphabet:
            if q == sink or not a.succ.get((q, x)):
                transitions.add((q, x, sink))
    initial = a.initial if a.initial else frozenset([sink])
    return BuchiAutomaton(
        a.alphabet, frozenset(states), initial, frozenset(transitions), a.accepting
    )


def _complement_deterministic(a: BuchiAutomaton) -> BuchiAutomaton:
    """Complement of a (completed) deterministic Buchi automaton.

    A word is rejected iff its unique run visits accepting states only
    finitely often; guess the last visit and continue in an F-avoiding copy.
    """
    a = _complete_deterministic(a)
    ghost = lambda q: ("g", q)
    states = set(a.states) | {ghost(q) for q in a.states if q not in a.accepting}
    transitions = set(a.transitions)
    for (p, x, q) in a.transitions:
        if q not in a.accepting:
            transitions.add((p, x, ghost(q)))
            if p not in a.accepting:
                transitions.add((ghost(p), x, ghost(q)))
    initial = set(a.initial) | {ghost(q) for q in a.initial if q not in a.accepting}
    acc = frozenset(ghost(q) for q in a.states if q not in a.accepting)
    return BuchiAutomaton(
        a.alphabet, frozenset(states), frozenset(initial), frozenset(transitions), acc
    )


def _kv_complement(a: BuchiAutomaton) -> BuchiAutomaton:
    """Rank-based complementation (level rankings with a breakpoint set)."""
    states_sorted = sorted(a.states, key=_sort_key)
    n = len(states_sorted)
    max_rank = 2 * (n - len(a.accepting)) if n else 0

    init_rank = frozenset((q, max_rank) for q in a.initial)
    start = (init_rank, frozenset())
    seen = {start}
    frontier = [start]
    transitions = set()
    letters = sorted(a.alphabet, key=_sort_key)
    while frontier:
        g, o = frontier.pop()
        gd = dict(g)
        for x in letters:
            # bound for each successor: min rank over predecessors
            bound: dict = {}
            for q, r in gd.items():
                for q2 in a.succ.get((q, x), ()):
                    bound[q2] = min(bound.get(q2, max_rank), r)
            succ_states = sorted(bound, key=_sort_key)
            options = []
            for q2 in succ_states:
                b = bound[q2]
                ranks = [r for r in range(b + 1) if not (q2 in a.accepting and r % 2 == 1)]
                if not ranks:
                    options = None
                    break
                options.append(ranks)
            if options is None:
                continue
            for choice in itertools.product(*options):
                g2 = frozenset(zip(succ_states, choice))
                g2d = dict(g2)
                if o:
                    o2 = set()
                    for q in o:
                        for q2 in a.succ.get((q, x), ()):
                            if g2d[q2] % 2 == 0:
                                o2.add(q2)
                else:
                    o2 = {q2 for q2, r in g2d.items() if r % 2 == 0}
                v = (g2, frozenset(o2))
                transitions.add(((g, o), x, v))
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
    acc = frozenset(s for s in seen if not s[1])
    return BuchiAutomaton(
        a.alphabet, frozenset(seen), frozenset([start]), frozenset(transitions), acc
    )


def complement(
    a: BuchiAutomaton, cap: int = DEFAULT_COMPLEMENT_CAP, context: str = ""
) -> BuchiAutomaton:
    """Language complement over the automaton's alphabet.

    Deterministic inputs use the cheap F-avoiding-copy construction; general
    inputs go through rank-based complementation, guarded by a state cap.
    """
    if not a.alphabet:
        raise InputError("cannot complement over an empty alphabet")
    t = simplify(a)
    if not t.states:
        return universal_automaton(a.alphabet)
    if t.is_deterministic():
        return simplify(_complement_deterministic(t))
    if len(t.states) > cap:
        raise ResourceError(
            "complementation cap exceeded (%d states > cap %d)%s"
            % (len(t.states), cap, " in %s" % context if context else "")
        )
    return simplify(_kv_complement(t))


# -- ambiguity -------------------------------------------------------------

def check_ambiguity(a: BuchiAutomaton) -> Optional[LassoWord]:
    """None if unambiguous, else a word with two distinct accepting runs.

    Self-product over run pairs with a monotone divergence flag; a word is a
    witness iff the flagged product has an accepting cycle where both
    components accept.
    """
    a = relabel(trim(a))
    if not a.states:
        return None
    initial = frozenset(
        (p, r, 1 if p != r else 0, 1)
        for p in a.initial
        for r in a.initial
    )
    states = set(initial)
    transitions = set()
    frontier = list(initial)
    while frontier:
        (p, r, flag, phase) = frontier.pop()
        if phase == 1:
            np = 2 if p in a.accepting else 1
        else:
            np = 1 if r in a.accepting else 2
        for t1 in a.out.get(p, ()):
            x = t1[1]
            for t2 in a.out.get(r, ()):
                if t2[1] != x:
                    continue
                nf = flag or (1 if t1 != t2 else 0)
                v = (t1[2], t2[2], nf, np)
                transitions.add(((p, r, flag, phase), x, v))
                if v not in states:
                    states.add(v)
                    frontier.append(v)
    acc = frozenset(
        s for s in states if s[2] == 1 and s[3] == 2 and s[1] in a.accepting
    )
    product = BuchiAutomaton(
        a.alphabet, frozenset(states), initial, frozenset(transitions), acc
    )
    return is_empty(product)


def accepting_runs(a: BuchiAutomaton, w: LassoWord, limit: int = 2, effort: int = 20000):
    """Up to ``limit`` distinct accepting lasso runs of a on w.

    Bounded enumeration over the product graph; distinctness is
    omega-inequality of the runs as transition lassos.
    """
    _check_letters(a.alphabet, w)
    start, nodes, edges = _product_nodes(a, w)
    found: list[LassoRun] = []
    seen_words = set()
    budget = [effort]

    max_len = (w.prefix_len + w.loop_len) * max(1, len(a.states)) * 2

    def cycles_from(v):
        # enumerate short cycles at v (bounded DFS)
        stack = [(v, [])]
        while stack and budget[0] > 0:
            node, path = stack.pop()
            budget[0] -= 1
            for (t, u) in edges.get(node, ()):
                if u == v:
                    yield path + [t]
                elif len(path) + 1 < max_len:
                    stack.append((u, path + [t]))

    def paths_to(v):
        stack = [(s, []) for s in start]
        while stack and budget[0] > 0:
            node, path = stack.pop()
            budget[0] -= 1
            if node == v:
                yield path
            if len(path) < max_len:
                for (t, u) in edges.get(node, ()):
                    stack.append((u, path + [t]))

    candidates = sorted(
        (v for v in nodes if v[0] in a.accepting and v[1] >= w.prefix_len),
        key=_sort_key,
    )
    for v in candidates:
        for cycle in cycles_from(v):
            for path in paths_to(v):
                run = LassoRun(tuple(path), tuple(cycle))
                key = run.as_word().canonical()
                key = (key.prefix, key.loop)
                if key in seen_words:
                    continue
                seen_words.add(key)
                found.append(run)
                if len(found) >= limit:
                    return found
            if budget[0] <= 0:
                break
        if budget[0] <= 0:
            break
    return found


# -- Buchi <-> Muller ------------------------------------------------------

def _cycle_closed_subsets(a) -> set:
    """Subsets of states inducing a strongly connected subgraph with an edge."""
    result = set()
    states_sorted = sorted(a.states, key=_sort_key)
    for r in range(1, len(states_sorted) + 1):
        for combo in itertools.combinations(states_sorted, r):
            s = frozenset(combo)
            inner = [
                t for q in combo for t in a.out.get(q, ()) if t[2] in s
            ]
            if not inner:
                continue
            succ = lambda q: [t[2] for t in inner if t[0] == q]
            sccs = strongly_connected_components(list(combo), succ)
            if len(sccs) == 1 and len(sccs[0]) == len(combo):
                result.add(s)
    return result


def buchi_to_muller(a: BuchiAutomaton) -> MullerAutomaton:
    """Same structure; acceptance sets are cycle-closed sets meeting F."""
    accsets = frozenset(
        s for s in _cycle_closed_subsets(a) if s & a.accepting
    )
    return MullerAutomaton(a.alphabet, a.states, a.initial, a.transitions, accsets)


def muller_to_buchi(m: MullerAutomaton) -> BuchiAutomaton:
    """Guess the infinity set and verify it with a breakpoint gadget."""
    main = lambda q: ("m", q)
    gad = lambda q, s, r: ("g", q, s, r)

    states = {main(q) for q in m.states}
    transitions = set()

    def entry(q2, s):
        r = frozenset([q2])
        return gad(q2, s, frozenset() if r == s else r)

    gadget_frontier = []
    gadget_seen = set()
    for (p, x, q) in m.transitions:
        transitions.add((main(p), x, main(q)))
        for s in m.accsets:
            if q in s:
                v = entry(q, s)
                transitions.add((main(p), x, v))
                if v not in gadget_seen:
                    gadget_seen.add(v)
                    gadget_frontier.append(v)
    while gadget_frontier:
        v = gadget_frontier.pop()
        (_, q, s, r) = v
        for t in m.out.get(q, ()):
            if t[2] not in s:
                continue
            r2 = r | {t[2]}
            v2 = gad(t[2], s, frozenset() if r2 == s else r2)
            transitions.add((v, t[1], v2))
            if v2 not in gadget_seen:
                gadget_seen.add(v2)
                gadget_frontier.append(v2)
    states |= gadget_seen
    acc = frozenset(v for v in gadget_seen if not v[3])
    return simplify(
        BuchiAutomaton(
            m.alphabet,
            frozenset(states),
            frozenset(main(q) for q in m.initial),
            frozenset(transitions),
            acc,
        )
    )


def muller_accepts(m: MullerAutomaton, w: LassoWord) -> Optional[LassoRun]:
    """An accepting lasso run of the Muller automaton on w, or None."""
    _check_letters(m.alphabet, w)
    a_view = BuchiAutomaton(
        m.alphabet, m.states, m.initial, m.transitions, m.states
    )
    start, nodes, edges = _product_nodes(a_view, w)
    for s in sorted(m.accsets, key=_sort_key):
        sub_edges = {
            u: [(t, v) for (t, v) in lst if v[0] in s]
            for u, lst in edges.items()
            if u[0] in s
        }
        sub_nodes = [u for u in nodes if u[0] in s]
        succ = lambda u: [v for (_, v) in sub_edges.get(u, ())]
        for comp in strongly_connected_components(sorted(sub_nodes, key=_sort_key), succ):
            comp_set = set(comp)
            has_edge = any(
                v in comp_set for u in comp for (_, v) in sub_edges.get(u, ())
            )
            if not has_edge:
                continue
            if frozenset(u[0] for u in comp) != s:
                continue
            path = _bfs_path(edges, start, comp[0])
            if path is None:
                continue
            # closed walk through every node of the component
            order = sorted(comp_set, key=_sort_key)
            walk = []
            cur = comp[0]
            for target in order + [comp[0]]:
                if target == cur and walk == [] and len(order) == 1:
                    pass
                seg = _bfs_path(sub_edges, [cur], target)
                if seg is None:
                    walk = None
                    break
                walk.extend(seg)
                cur = target
            if walk is None:
                continue
            if not walk:
                cyc = _bfs_cycle(sub_edges, comp[0])
                if cyc is None:
                    continue
                walk = cyc
            return LassoRun(tuple(path), tuple(walk))
    return None


# -- sampled language comparison ------------------------------------------

def sampled_language_equal(a, b, words: Iterable[LassoWord]) -> Optional[LassoWord]:
    """First sampled word on which the two acceptors disagree, else None."""
    for w in words:
        ra = accepts(a, w) if isinstance(a, BuchiAutomaton) else muller_accepts(a, w)
        rb = accepts(b, w) if isinstance(b, BuchiAutomaton) else muller_accepts(b, w)
        if (ra is None) != (rb is None):
            return w
    return None
