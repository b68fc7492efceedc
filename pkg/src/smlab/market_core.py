"""Two-sided matching markets: domain types, blocking-pair semantics, and the
phantom-agent completion that embeds partial preference lists into a full,
balanced market.

All operations here are pure functions of their inputs; the types are frozen
and freely shareable between concurrent protocol trials.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

from .errors import NotPerfect, PhantomBlock, QuotaViolation, UnknownAgent

_INF = float("inf")


class Side(enum.Enum):
    """Which side of the market an agent belongs to."""

    WORKER = "W"
    FIRM = "F"

    @property
    def opposite(self) -> "Side":
        return Side.FIRM if self is Side.WORKER else Side.WORKER

    def __repr__(self) -> str:  # compact in transcripts and test output
        return self.value


class AgentId(NamedTuple):
    """An agent is addressed by (side, index); names live only in file I/O."""

    side: Side
    index: int


@dataclass(frozen=True)
class Market:
    """A two-sided market with quotas and possibly partial strict preferences.

    ``worker_prefs[i]`` lists the firm indices worker ``i`` finds acceptable,
    most preferred first; firms absent from the list are unacceptable.
    Symmetrically for ``firm_prefs``.
    """

    worker_prefs: tuple[tuple[int, ...], ...]
    firm_prefs: tuple[tuple[int, ...], ...]
    worker_quotas: tuple[int, ...]
    firm_quotas: tuple[int, ...]

    def __post_init__(self):
        n_w, n_f = len(self.worker_prefs), len(self.firm_prefs)
        if len(self.worker_quotas) != n_w or len(self.firm_quotas) != n_f:
            raise ValueError("quota vectors must match side sizes")
        for q, hi in ((self.worker_quotas, n_f), (self.firm_quotas, n_w)):
            for v in q:
                if not 1 <= v <= hi:
                    raise QuotaViolation(f"quota {v} outside 1..{hi}")
        for prefs, hi, side in (
            (self.worker_prefs, n_f, "worker"),
            (self.firm_prefs, n_w, "firm"),
        ):
            for i, lst in enumerate(prefs):
                if len(set(lst)) != len(lst):
                    raise ValueError(f"duplicate entry in {side} {i} preferences")
                for x in lst:
                    if not 0 <= x < hi:
                        raise UnknownAgent(f"{side} {i} ranks out-of-range index {x}")

    @property
    def n_workers(self) -> int:
        return len(self.worker_prefs)

    @property
    def n_firms(self) -> int:
        return len(self.firm_prefs)

    @property
    def is_full(self) -> bool:
        """Complete lists on both sides and balanced total quotas."""
        return (
            all(len(p) == self.n_firms for p in self.worker_prefs)
            and all(len(p) == self.n_workers for p in self.firm_prefs)
            and sum(self.worker_quotas) == sum(self.firm_quotas)
        )

    def quota(self, agent: AgentId) -> int:
        if agent.side is Side.WORKER:
            return self.worker_quotas[agent.index]
        return self.firm_quotas[agent.index]

    def prefs(self, agent: AgentId) -> tuple[int, ...]:
        if agent.side is Side.WORKER:
            return self.worker_prefs[agent.index]
        return self.firm_prefs[agent.index]

    @cached_property
    def worker_ranks(self) -> tuple[dict[int, int], ...]:
        """Per worker, firm index -> rank (0 best); unacceptable absent."""
        return tuple({f: r for r, f in enumerate(p)} for p in self.worker_prefs)

    @cached_property
    def firm_ranks(self) -> tuple[dict[int, int], ...]:
        return tuple({w: r for r, w in enumerate(p)} for p in self.firm_prefs)


@dataclass(frozen=True)
class Matching:
    """A set of (worker index, firm index) pairs; quota checks are done
    against a market by the operations below."""

    pairs: frozenset[tuple[int, int]]

    @staticmethod
    def of(pairs: Iterable[tuple[int, int]]) -> "Matching":
        return Matching(frozenset((int(w), int(f)) for w, f in pairs))

    @cached_property
    def by_worker(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for w, f in self.pairs:
            out.setdefault(w, []).append(f)
        return {w: tuple(sorted(fs)) for w, fs in out.items()}

    @cached_property
    def by_firm(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for w, f in self.pairs:
            out.setdefault(f, []).append(w)
        return {f: tuple(sorted(ws)) for f, ws in out.items()}

    def sorted_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


EMPTY_MATCHING = Matching(frozenset())


# Query responses ------------------------------------------------------------


@dataclass(frozen=True)
class Stable:
    """The proposed matching is stable; the protocol is over."""


@dataclass(frozen=True)
class Blocking:
    """One blocking pair, adversarially chosen; never a member of the query."""

    worker: int
    firm: int


@dataclass(frozen=True)
class IndividuallyBlocking:
    """An agent matched to at least one partner it finds unacceptable."""

    agent: AgentId


QueryResponse = Stable | Blocking | IndividuallyBlocking


# Stability semantics ---------------------------------------------------------


def check_matching(market: Market, matching: Matching) -> None:
    """Raise UnknownAgent / QuotaViolation when the matching is malformed."""
    for w, f in matching.pairs:
        if not 0 <= w < market.n_workers or not 0 <= f < market.n_firms:
            raise UnknownAgent(f"pair ({w},{f}) outside market")
    for w, fs in matching.by_worker.items():
        if len(fs) > market.worker_quotas[w]:
            raise QuotaViolation(f"worker {w} holds {len(fs)} > quota")
    for f, ws in matching.by_firm.items():
        if len(ws) > market.firm_quotas[f]:
            raise QuotaViolation(f"firm {f} holds {len(ws)} > quota")


def _worst_rank(ranks: dict[int, int], partners: tuple[int, ...]) -> float:
    """Rank of the least-preferred partner; unacceptable partners count as
    strictly worse than anything ranked."""
    worst = -1.0
    for p in partners:
        r = ranks.get(p, _INF)
        if r > worst:
            worst = r
    return worst


def _blocks(
    market: Market,
    matching: Matching,
    w: int,
    f: int,
) -> bool:
    """The three blocking conditions for a pair (w, f) not in the matching."""
    wrank = market.worker_ranks[w]
    frank = market.firm_ranks[f]
    if f not in wrank or w not in frank:
        return False
    fs = matching.by_worker.get(w, ())
    ws = matching.by_firm.get(f, ())
    firm_ok = len(ws) < market.firm_quotas[f] or frank[w] < _worst_rank(frank, ws)
    if not firm_ok:
        return False
    return len(fs) < market.worker_quotas[w] or wrank[f] < _worst_rank(wrank, fs)


def find_blocking_pairs(market: Market, matching: Matching) -> list[tuple[int, int]]:
    """All blocking pairs, sorted lexicographically by (worker, firm)."""
    check_matching(market, matching)
    out = []
    for w in range(market.n_workers):
        for f in market.worker_ranks[w]:
            if (w, f) not in matching.pairs and _blocks(market, matching, w, f):
                out.append((w, f))
    out.sort()
    return out


def first_blocking_pair(market: Market, matching: Matching) -> tuple[int, int] | None:
    """Lexicographically least blocking pair, or None; early-exit scan."""
    check_matching(market, matching)
    for w in range(market.n_workers):
        for f in range(market.n_firms):
            if (w, f) not in matching.pairs and _blocks(market, matching, w, f):
                return (w, f)
    return None


def individually_blocking_agents(market: Market, matching: Matching) -> list[AgentId]:
    """Agents holding a partner absent from their list; workers first,
    ascending index within each side."""
    check_matching(market, matching)
    out: list[AgentId] = []
    for w in sorted(matching.by_worker):
        ranks = market.worker_ranks[w]
        if any(f not in ranks for f in matching.by_worker[w]):
            out.append(AgentId(Side.WORKER, w))
    for f in sorted(matching.by_firm):
        ranks = market.firm_ranks[f]
        if any(w not in ranks for w in matching.by_firm[f]):
            out.append(AgentId(Side.FIRM, f))
    return out


def is_stable(market: Market, matching: Matching) -> bool:
    """Individually rational and not blocked by any pair."""
    if individually_blocking_agents(market, matching):
        return False
    return first_blocking_pair(market, matching) is None


# Reduction to full preference lists ------------------------------------------


@dataclass(frozen=True)
class MarketEmbedding:
    """A market together with its completion by quota-1 phantom agents.

    For each original agent ``a`` with quota ``q(a)``, the opposite side of
    the completed market gains ``q(a)`` phantoms occupying the contiguous
    index range ``phantom_range(a)``.  Each phantom ranks its owner first and
    everyone else in ascending index; the owner's list is extended by its
    acceptable agents, then its own phantoms (ascending), then everything
    else ascending.
    """

    original: Market
    completed: Market
    worker_phantom_ranges: tuple[tuple[int, int], ...]  # on the firm side
    firm_phantom_ranges: tuple[tuple[int, int], ...]  # on the worker side

    def phantom_range(self, agent: AgentId) -> range:
        if agent.side is Side.WORKER:
            lo, hi = self.worker_phantom_ranges[agent.index]
        else:
            lo, hi = self.firm_phantom_ranges[agent.index]
        return range(lo, hi)

    def is_phantom(self, agent: AgentId) -> bool:
        if agent.side is Side.WORKER:
            return agent.index >= self.original.n_workers
        return agent.index >= self.original.n_firms


def _completed_list(
    acceptable: tuple[int, ...], own: range, total: int
) -> tuple[int, ...]:
    seen = set(acceptable)
    tail_own = [x for x in own if x not in seen]
    seen.update(tail_own)
    rest = [x for x in range(total) if x not in seen]
    return tuple(acceptable) + tuple(tail_own) + tuple(rest)


def _phantom_list(owner: int, total: int) -> tuple[int, ...]:
    return (owner,) + tuple(x for x in range(total) if x != owner)


def complete_market(market: Market) -> MarketEmbedding:
    """Embed a partial-lists market into a full one with phantom agents."""
    n_w, n_f = market.n_workers, market.n_firms
    # Phantoms for workers live on the firm side, blocked per owner in
    # ascending owner order; symmetrically for firms.
    w_ranges = []
    start = n_f
    for q in market.worker_quotas:
        w_ranges.append((start, start + q))
        start += q
    total_firms = start
    f_ranges = []
    start = n_w
    for q in market.firm_quotas:
        f_ranges.append((start, start + q))
        start += q
    total_workers = start

    worker_prefs = [
        _completed_list(market.worker_prefs[w], range(*w_ranges[w]), total_firms)
        for w in range(n_w)
    ]
    # Phantom workers: owner firm first, everything else ascending.
    for f in range(n_f):
        worker_prefs.extend(
            [_phantom_list(f, total_firms)] * (f_ranges[f][1] - f_ranges[f][0])
        )

    firm_prefs = [
        _completed_list(market.firm_prefs[f], range(*f_ranges[f]), total_workers)
        for f in range(n_f)
    ]
    for w in range(n_w):
        firm_prefs.extend(
            [_phantom_list(w, total_workers)] * (w_ranges[w][1] - w_ranges[w][0])
        )

    completed = Market(
        worker_prefs=tuple(worker_prefs),
        firm_prefs=tuple(firm_prefs),
        worker_quotas=market.worker_quotas + (1,) * (total_workers - n_w),
        firm_quotas=market.firm_quotas + (1,) * (total_firms - n_f),
    )
    assert completed.is_full
    return MarketEmbedding(
        original=market,
        completed=completed,
        worker_phantom_ranges=tuple(w_ranges),
        firm_phantom_ranges=tuple(f_ranges),
    )


def extend_matching(embedding: MarketEmbedding, matching: Matching) -> Matching:
    """Canonical image of an original-market matching in the completed market.

    Each agent's remaining quota is filled with its most-preferred own
    phantoms; leftover phantoms are paired among themselves by one-to-one
    deferred acceptance (any non-blocking scheme works; this one is
    deterministic).
    """
    check_matching(embedding.original, matching)
    orig = embedding.original
    pairs = set(matching.pairs)

    used_phantom_firms: set[int] = set()
    for w in range(orig.n_workers):
        deficit = orig.worker_quotas[w] - len(matching.by_worker.get(w, ()))
        lo, _ = embedding.worker_phantom_ranges[w]
        for k in range(deficit):
            pairs.add((w, lo + k))
            used_phantom_firms.add(lo + k)
    used_phantom_workers: set[int] = set()
    for f in range(orig.n_firms):
        deficit = orig.firm_quotas[f] - len(matching.by_firm.get(f, ()))
        lo, _ = embedding.firm_phantom_ranges[f]
        for k in range(deficit):
            pairs.add((lo + k, f))
            used_phantom_workers.add(lo + k)

    completed = embedding.completed
    left_w = [
        w
        for w in range(orig.n_workers, completed.n_workers)
        if w not in used_phantom_workers
    ]
    left_f = [
        f
        for f in range(orig.n_firms, completed.n_firms)
        if f not in used_phantom_firms
    ]
    assert len(left_w) == len(left_f)
    if left_w:
        from .deferred_acceptance import gale_shapley_one_to_one

        w_pos = {w: i for i, w in enumerate(left_w)}
        f_pos = {f: i for i, f in enumerate(left_f)}
        sub = Market(
            worker_prefs=tuple(
                tuple(f_pos[f] for f in completed.worker_prefs[w] if f in f_pos)
                for w in left_w
            ),
            firm_prefs=tuple(
                tuple(w_pos[w] for w in completed.firm_prefs[f] if w in w_pos)
                for f in left_f
            ),
            worker_quotas=(1,) * len(left_w),
            firm_quotas=(1,) * len(left_f),
        )
        for wi, fi in gale_shapley_one_to_one(sub).pairs:
            pairs.add((left_w[wi], left_f[fi]))
    return Matching(frozenset(pairs))


def restrict_matching(embedding: MarketEmbedding, full_matching: Matching) -> Matching:
    """Inverse of extend_matching: drop all pairs involving a phantom.

    Requires a perfect matching of the completed market with no
    phantom-phantom blocking pair, which is where the bijection lives.
    """
    completed = embedding.completed
    check_matching(completed, full_matching)
    for w in range(completed.n_workers):
        if len(full_matching.by_worker.get(w, ())) != completed.worker_quotas[w]:
            raise NotPerfect(f"worker {w} below quota")
    for f in range(completed.n_firms):
        if len(full_matching.by_firm.get(f, ())) != completed.firm_quotas[f]:
            raise NotPerfect(f"firm {f} below quota")
    n_w, n_f = embedding.original.n_workers, embedding.original.n_firms
    for w in range(n_w, completed.n_workers):
        for f in range(n_f, completed.n_firms):
            if (w, f) not in full_matching.pairs and _blocks(
                completed, full_matching, w, f
            ):
                raise PhantomBlock(f"phantom pair ({w},{f}) blocks")
    return Matching(
        frozenset((w, f) for w, f in full_matching.pairs if w < n_w and f < n_f)
    )


def drop_phantom_pairs(embedding: MarketEmbedding, full_matching: Matching) -> Matching:
    """Projection to real-real pairs with no preconditions (protocol plumbing)."""
    n_w, n_f = embedding.original.n_workers, embedding.original.n_firms
    return Matching(
        frozenset((w, f) for w, f in full_matching.pairs if w < n_w and f < n_f)
    )
