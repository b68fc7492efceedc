"""The constraint calculus over preference positions.

Two constraint languages appear throughout the learners:

* pairwise constraints ``a ≺ b`` accumulate into a strict partial order
  (:class:`Poset`); the still-possible preference orders of an agent are
  exactly its linear extensions, and
* generalized constraints ``x ≺ at least one of S`` (:class:`GeneralConstraint`),
  the information unit extracted from a many-to-many blocking pair.

This module provides exact counting for both languages (arbitrary-precision
integers, exact rationals; never floats), the back-to-front generalized
topological sort, the representative-order construction, LastFrac, and the
executable 3SAT reduction showing that mixing precede- and follow-constraints
makes feasibility NP-hard.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .caps import general_cap, poset_cap
from .errors import (
    AlphaTooSmall,
    CycleDetected,
    Infeasible,
    MalformedClause,
    NoConsistentOrder,
    TooLarge,
)
from .market_core import AgentId

# Extension enumeration is preferred for all-pairs fractions up to this many
# extensions; beyond it the per-pair counting DP takes over.
_ENUM_LIMIT = 100_000
_TABLE_MAX_N = 8


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Poset:
    """A strict partial order on {0..n-1}, transitively closed on construction.

    The relation is stored as successor/predecessor bitmasks, so membership
    tests and incremental closure updates are O(n) word operations.  A cyclic
    input raises :class:`CycleDetected`.  Instances are immutable; use
    :meth:`with_pair` to extend.
    """

    __slots__ = ("n", "_succ", "_pred", "_counts", "_chains", "_pairs")

    def __init__(self, n: int, relation: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        self._succ = [0] * n
        self._pred = [0] * n
        self._counts: dict[int, int] | None = None
        self._chains: tuple[tuple[int, ...], ...] | None | bool = False
        self._pairs: tuple[tuple[int, int], ...] | None = None
        for a, b in relation:
            self._add(a, b)

    def _add(self, a: int, b: int) -> bool:
        n = self.n
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"pair ({a},{b}) outside ground set")
        if a == b or (self._succ[b] >> a) & 1:
            raise CycleDetected(f"adding {a} ≺ {b} creates a cycle")
        if (self._succ[a] >> b) & 1:
            return False
        below = self._pred[a] | (1 << a)
        above = self._succ[b] | (1 << b)
        for x in _bits(below):
            self._succ[x] |= above
        for y in _bits(above):
            self._pred[y] |= below
        return True

    def less(self, a: int, b: int) -> bool:
        """True iff a ≺ b is implied by the closed relation."""
        return bool((self._succ[a] >> b) & 1)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        """All closed pairs (a, b) with a ≺ b, sorted."""
        if self._pairs is None:
            self._pairs = tuple(
                (a, b) for a in range(self.n) for b in _bits(self._succ[a])
            )
        return self._pairs

    def with_pair(self, a: int, b: int) -> "Poset":
        """A new poset whose closure additionally contains a ≺ b."""
        out = Poset.__new__(Poset)
        out.n = self.n
        out._succ = list(self._succ)
        out._pred = list(self._pred)
        out._counts = None
        out._chains = False
        out._pairs = None
        out._add(a, b)
        return out

    def is_extension(self, order: Sequence[int]) -> bool:
        pos = [0] * self.n
        for i, x in enumerate(order):
            pos[x] = i
        return all(pos[a] < pos[b] for a, b in self.pairs())

    # -- structure ------------------------------------------------------

    def hasse_successors(self) -> list[list[int]]:
        """Immediate successors: b covers a iff a ≺ b with nothing between."""
        out: list[list[int]] = []
        for a in range(self.n):
            direct = []
            for b in _bits(self._succ[a]):
                if not (self._succ[a] & self._pred[b]):
                    direct.append(b)
            out.append(direct)
        return out

    def chain_decomposition(self) -> tuple[tuple[int, ...], ...] | None:
        """The partition into disjoint chains, heads first, or None.

        A poset is a disjoint union of chains exactly when its Hasse diagram
        is a disjoint union of paths.  Cached; chain order is by ascending
        head index.
        """
        if self._chains is not False:
            return self._chains
        nxt: dict[int, int] = {}
        ok = True
        indeg = [0] * self.n
        for a, direct in enumerate(self.hasse_successors()):
            if len(direct) > 1:
                ok = False
                break
            if direct:
                nxt[a] = direct[0]
                indeg[direct[0]] += 1
                if indeg[direct[0]] > 1:
                    ok = False
                    break
        if ok:
            chains = []
            for h in range(self.n):
                if indeg[h] == 0:
                    chain = [h]
                    while chain[-1] in nxt:
                        chain.append(nxt[chain[-1]])
                    chains.append(tuple(chain))
            self._chains = tuple(chains)
        else:
            self._chains = None
        return self._chains

    def downset_counts(self) -> dict[int, int]:
        """Extension counts of every down-set reachable from the full set.

        ``counts[mask]`` is the number of linear extensions of the poset
        restricted to ``mask``; computing the full-set entry visits the whole
        down-set lattice once and is cached for the exact sampler.
        """
        if self._counts is not None:
            return self._counts
        succ = self._succ
        counts = {0: 1}

        def count(mask: int) -> int:
            c = counts.get(mask)
            if c is not None:
                return c
            total = 0
            for m in _bits(mask):
                if not (succ[m] & mask):
                    total += count(mask ^ (1 << m))
            counts[mask] = total
            return total

        count((1 << self.n) - 1)
        self._counts = counts
        return counts


def total_order_poset(order: Sequence[int]) -> Poset:
    """The chain poset whose unique extension is the given order."""
    return Poset(len(order), zip(order, order[1:]))


def count_extensions_poset(poset: Poset) -> int:
    """Exact number of linear extensions, by subset DP over down-sets."""
    if poset.n > poset_cap():
        raise TooLarge(f"n={poset.n} exceeds poset cap {poset_cap()}")
    if poset.n == 0:
        return 1
    return poset.downset_counts()[(1 << poset.n) - 1]


def enumerate_extensions(poset: Poset):
    """Yield every linear extension, front to back, smallest choice first."""
    n = poset.n
    pred = poset._pred
    prefix: list[int] = []

    def rec(remaining: int):
        if not remaining:
            yield tuple(prefix)
            return
        for m in _bits(remaining):
            if not (pred[m] & remaining):
                prefix.append(m)
                yield from rec(remaining ^ (1 << m))
                prefix.pop()

    yield from rec((1 << n) - 1)


@lru_cache(maxsize=8)
def _perm_pos_table(n: int) -> np.ndarray:
    """pos[k][e] = position of element e in the k-th permutation of range(n)."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    return np.argsort(perms, axis=1).astype(np.int8)


def pref_order_counts(poset: Poset) -> tuple[int, list[list[int]]]:
    """(total extensions, counts) with counts[a][b] = extensions putting a ≺ b.

    Backed by explicit enumeration over a cached permutation table for
    n ≤ 8, by extension enumeration while the count stays small, and by the
    per-pair counting DP beyond that.  All values are exact integers.
    """
    n = poset.n
    if n == 0:
        return 1, []
    if n <= _TABLE_MAX_N:
        pos = _perm_pos_table(n)
        mask = np.ones(len(pos), dtype=bool)
        for a, b in poset.pairs():
            mask &= pos[:, a] < pos[:, b]
        sub = pos[mask]
        counts = (sub[:, :, None] < sub[:, None, :]).sum(axis=0, dtype=np.int64)
        return int(sub.shape[0]), counts.tolist()
    total = count_extensions_poset(poset)
    if total <= _ENUM_LIMIT:
        counts = [[0] * n for _ in range(n)]
        for ext in enumerate_extensions(poset):
            for i, a in enumerate(ext):
                row = counts[a]
                for b in ext[i + 1 :]:
                    row[b] += 1
        return total, counts
    counts = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            if poset.less(a, b):
                counts[a][b] = total
            elif not poset.less(b, a):
                counts[a][b] = count_extensions_poset(poset.with_pair(a, b))
    return total, counts


def pref_frac(poset: Poset, a: int, b: int) -> Fraction:
    """Exact fraction of linear extensions ranking a ahead of b.

    Computed as the ratio of the extension count of ``poset ∪ {a ≺ b}`` to
    that of ``poset``; 0 when adding the pair would create a cycle.
    """
    if a == b or not (0 <= a < poset.n and 0 <= b < poset.n):
        raise ValueError(f"bad pair ({a},{b})")
    if poset.less(a, b):
        return Fraction(1)
    if poset.less(b, a):
        return Fraction(0)
    return Fraction(
        count_extensions_poset(poset.with_pair(a, b)), count_extensions_poset(poset)
    )


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def representative_pairs(poset: Poset, alpha) -> list[tuple[int, int]]:
    """S_alpha: all ordered pairs held by at least an alpha fraction of
    extensions, from exact counts."""
    thr = _as_fraction(alpha)
    total, counts = pref_order_counts(poset)
    num, den = thr.numerator, thr.denominator
    return [
        (a, b)
        for a in range(poset.n)
        for b in range(poset.n)
        if a != b and counts[a][b] * den >= num * total
    ]


def representative_order_exact(poset: Poset, alpha=Fraction(4, 5)) -> tuple[int, ...]:
    """An alpha-representative order: extends every pairwise comparison held
    by at least an alpha fraction of the linear extensions.

    Requires alpha ≥ 0.8, the regime in which the comparison set S_alpha is
    provably acyclic (proportional transitivity).  A cycle in S_alpha is
    impossible there, so its detection aborts loudly rather than recovering.
    """
    thr = _as_fraction(alpha)
    if thr < Fraction(4, 5):
        raise AlphaTooSmall(f"alpha={alpha} < 0.8")
    if poset.n > poset_cap():
        raise TooLarge(f"n={poset.n} exceeds poset cap {poset_cap()}")
    pairs = representative_pairs(poset, thr)
    try:
        s_alpha = Poset(poset.n, pairs)
    except CycleDetected as exc:  # pragma: no cover - would falsify the theory
        raise CycleDetected(
            f"S_alpha cyclic at alpha={alpha}; this contradicts proportional "
            "transitivity and indicates a counting bug"
        ) from exc
    return generalized_toposort(
        [GeneralConstraint(a, frozenset({b})) for a, b in s_alpha.pairs()], poset.n
    )


# Generalized constraints ------------------------------------------------------


class GeneralConstraint(NamedTuple):
    """``subject`` must precede at least one element of ``among``."""

    subject: int
    among: frozenset[int]


def make_constraint(subject: int, among: Iterable[int]) -> GeneralConstraint:
    s = frozenset(int(x) for x in among)
    if not s:
        raise ValueError("constraint set S must be nonempty")
    if subject in s:
        raise ValueError("subject must not belong to S")
    return GeneralConstraint(int(subject), s)


@dataclass
class ConstraintSet:
    """An agent's accumulated precede-constraints over opposite-side indices."""

    n: int
    constraints: list[GeneralConstraint] = field(default_factory=list)
    owner: AgentId | None = None

    def __post_init__(self):
        seen = set(self.constraints)
        if len(seen) != len(self.constraints):
            raise ValueError("duplicate constraints")
        self._seen = seen
        for c in self.constraints:
            self._check(c)

    def _check(self, c: GeneralConstraint):
        if not c.among or c.subject in c.among:
            raise ValueError(f"malformed constraint {c}")
        for x in c.among | {c.subject}:
            if not 0 <= x < self.n:
                raise ValueError(f"constraint element {x} outside ground set")

    def add(self, constraint: GeneralConstraint) -> bool:
        """Append if new; False when the identical constraint is present."""
        self._check(constraint)
        if constraint in self._seen:
            return False
        self._seen.add(constraint)
        self.constraints.append(constraint)
        return True

    def __contains__(self, constraint: GeneralConstraint) -> bool:
        return constraint in self._seen

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)


def is_consistent(order: Sequence[int], constraints: Iterable[GeneralConstraint]) -> bool:
    """Does the order satisfy every 'x precedes at least one of S' constraint?"""
    pos = {x: i for i, x in enumerate(order)}
    for c in constraints:
        px = pos[c.subject]
        if all(px > pos[s] for s in c.among):
            return False
    return True


def generalized_toposort(
    constraints: Iterable[GeneralConstraint], n: int
) -> tuple[int, ...]:
    """Some order consistent with the constraints, built back to front.

    Each step fills the last remaining slot with an element that is the
    subject of no remaining constraint (the largest-index one, which makes
    the unconstrained answer the identity order), then deletes every
    constraint whose S contains the placed element: those are now satisfied.
    If at any step every remaining element is still a subject, no consistent
    order exists among the remaining elements and Infeasible is raised.
    O(n·|C|) element inspections.
    """
    live = list(constraints)
    remaining = set(range(n))
    out = [0] * n
    for slot in range(n - 1, -1, -1):
        subjects = {c.subject for c in live}
        eligible = remaining - subjects
        if not eligible:
            raise Infeasible(f"every remaining element is constrained at slot {slot}")
        x = max(eligible)
        out[slot] = x
        remaining.discard(x)
        live = [c for c in live if x not in c.among]
    return tuple(out)


def _constraint_masks(
    constraints: Iterable[GeneralConstraint],
) -> dict[int, list[int]]:
    masks: dict[int, list[int]] = {}
    for c in constraints:
        m = 0
        for s in c.among:
            m |= 1 << s
        masks.setdefault(c.subject, []).append(m)
    return masks


def count_consistent_general(
    constraints: Iterable[GeneralConstraint], n: int
) -> int:
    """Exact number of permutations of range(n) satisfying all constraints.

    Subset DP, back to front: an element x may occupy the last remaining slot
    iff every constraint on x already has some member of its S placed behind.
    O(2^n · n · |C|); guarded by the general enumeration cap.
    """
    if n > general_cap():
        raise TooLarge(f"n={n} exceeds general cap {general_cap()}")
    masks = _constraint_masks(constraints)
    full = (1 << n) - 1
    memo = {0: 1}

    def count(remaining: int) -> int:
        c = memo.get(remaining)
        if c is not None:
            return c
        placed = full & ~remaining
        total = 0
        for x in _bits(remaining):
            ok = True
            for m in masks.get(x, ()):
                if not (m & placed):
                    ok = False
                    break
            if ok:
                total += count(remaining ^ (1 << x))
        memo[remaining] = total
        return total

    return count(full)


def last_frac(
    constraints: Iterable[GeneralConstraint],
    n: int,
    remaining: Iterable[int],
    a: int,
) -> Fraction:
    """Fraction of consistent orders ranking ``a`` last among ``remaining``."""
    cons = list(constraints)
    denom = count_consistent_general(cons, n)
    if denom == 0:
        raise NoConsistentOrder("no order satisfies the constraints")
    extra = [GeneralConstraint(b, frozenset({a})) for b in remaining if b != a]
    return Fraction(count_consistent_general(cons + extra, n), denom)


# Mixed instances and the 3SAT reduction --------------------------------------


@dataclass(frozen=True)
class MixedInstance:
    """Precede-constraints plus follow-constraints ('x after at least one of S')."""

    n: int
    precede: tuple[GeneralConstraint, ...]
    follow: tuple[GeneralConstraint, ...]


def decide_mixed_consistent(instance: MixedInstance) -> bool:
    """Does any permutation satisfy the mixed instance?  Memoized subset
    search, exponential by design: the problem is NP-hard."""
    n = instance.n
    if n > general_cap():
        raise TooLarge(f"n={n} exceeds general cap {general_cap()}")
    pre = _constraint_masks(instance.precede)
    fol = _constraint_masks(instance.follow)
    full = (1 << n) - 1
    memo: dict[int, bool] = {0: True}

    def feasible(remaining: int) -> bool:
        v = memo.get(remaining)
        if v is not None:
            return v
        placed = full & ~remaining
        ok_any = False
        for x in _bits(remaining):
            rest = remaining ^ (1 << x)
            # x before some member of S: a member must sit behind (placed).
            if any(not (m & placed) for m in pre.get(x, ())):
                continue
            # x after some member of S: a member must still be ahead (rest).
            if any(not (m & rest) for m in fol.get(x, ())):
                continue
            if feasible(rest):
                ok_any = True
                break
        memo[remaining] = ok_any
        return ok_any

    return feasible(full)


def reduce_3sat(clauses: Sequence[Sequence[int]], num_vars: int | None = None) -> MixedInstance:
    """Reduce a ≤3-CNF to a mixed-constraint instance on 2v+1 elements.

    Variables i = 1..v map to element pairs (2(i-1), 2(i-1)+1) for the
    positive and negative literal; one pivot element sits at index 2v.  Per
    variable the pivot must follow at least one of the two literal elements;
    per clause it must precede at least one of the clause's literal elements.
    A consistent order exists iff the formula is satisfiable (read the
    literals placed after the pivot as the true ones).
    """
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    if num_vars < 1:
        raise MalformedClause("formula must mention at least one variable")
    pivot = 2 * num_vars

    def elem(lit: int) -> int:
        if lit == 0 or abs(lit) > num_vars:
            raise MalformedClause(f"bad literal {lit}")
        return 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)

    follow = tuple(
        GeneralConstraint(pivot, frozenset({2 * (i - 1), 2 * (i - 1) + 1}))
        for i in range(1, num_vars + 1)
    )
    precede = []
    for clause in clauses:
        if not clause:
            raise MalformedClause("empty clause")
        if len(clause) > 3:
            raise MalformedClause(f"clause wider than 3: {clause}")
        precede.append(GeneralConstraint(pivot, frozenset(elem(l) for l in clause)))
    return MixedInstance(n=pivot + 1, precede=tuple(precede), follow=follow)


def cnf_satisfiable(clauses: Sequence[Sequence[int]], num_vars: int | None = None) -> bool:
    """Truth-table satisfiability, the independent side of the sat-check oracle."""
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    for bits in range(1 << num_vars):
        assign = [(bits >> i) & 1 == 1 for i in range(num_vars)]
        if all(
            any(assign[abs(l) - 1] == (l > 0) for l in clause) for clause in clauses
        ):
            return True
    return False
