"""Deferred acceptance for full markets: one-to-one Gale-Shapley and the
many-to-many variant for responsive preferences with quotas.

Both routines are deterministic given the market and proposing side; the
outcome is the proposing-side-optimal stable matching either way, so the
fixed proposal schedule only matters for reproducibility, not stability.
"""

from __future__ import annotations

from .errors import NotFull
from .market_core import Market, Matching, Side


def _oriented(market: Market, proposing_side: Side):
    """(proposer prefs, receiver rank dicts, proposer quotas, receiver quotas)."""
    if proposing_side is Side.WORKER:
        return (
            market.worker_prefs,
            market.firm_ranks,
            market.worker_quotas,
            market.firm_quotas,
        )
    return (
        market.firm_prefs,
        market.worker_ranks,
        market.firm_quotas,
        market.worker_quotas,
    )


def _as_pair(proposing_side: Side, proposer: int, receiver: int) -> tuple[int, int]:
    if proposing_side is Side.WORKER:
        return (proposer, receiver)
    return (receiver, proposer)


def gale_shapley_one_to_one(
    market: Market, proposing_side: Side = Side.WORKER
) -> Matching:
    """Classical deferred acceptance; requires a full market with all quotas 1.

    Returns the proposing-side-optimal stable matching as (worker, firm) pairs.
    """
    if not market.is_full:
        raise NotFull("gale_shapley_one_to_one requires a full market")
    if any(q != 1 for q in market.worker_quotas + market.firm_quotas):
        raise NotFull("gale_shapley_one_to_one requires all quotas 1")
    prefs, rrank, _, _ = _oriented(market, proposing_side)
    n = len(prefs)
    nxt = [0] * n
    held: dict[int, int] = {}  # receiver -> proposer
    free = list(range(n - 1, -1, -1))  # stack, ascending pop order
    while free:
        p = free.pop()
        r = prefs[p][nxt[p]]
        nxt[p] += 1
        cur = held.get(r)
        if cur is None:
            held[r] = p
        elif rrank[r][p] < rrank[r][cur]:
            held[r] = p
            free.append(cur)
        else:
            free.append(p)
    return Matching(
        frozenset(_as_pair(proposing_side, p, r) for r, p in held.items())
    )


def deferred_acceptance_many(
    market: Market, proposing_side: Side = Side.WORKER
) -> Matching:
    """Many-to-many deferred acceptance for a full, balanced market.

    Proposers walk down their lists to fill their quotas; receivers hold the
    best proposals seen so far, bumping the worst when over quota.  Proposers
    are processed in ascending index each round.  The result fills every
    quota and is pairwise stable with respect to the market's preferences.
    """
    if not market.is_full:
        raise NotFull("deferred_acceptance_many requires a full market")
    prefs, rrank, pquota, rquota = _oriented(market, proposing_side)
    n_p = len(prefs)
    nxt = [0] * n_p
    deficit = list(pquota)
    held: list[list[int]] = [[] for _ in range(len(rquota))]  # unsorted proposers

    active = True
    while active:
        active = False
        for p in range(n_p):
            while deficit[p] > 0 and nxt[p] < len(prefs[p]):
                r = prefs[p][nxt[p]]
                nxt[p] += 1
                active = True
                slot = held[r]
                if len(slot) < rquota[r]:
                    slot.append(p)
                    deficit[p] -= 1
                else:
                    worst = max(slot, key=lambda q: rrank[r][q])
                    if rrank[r][p] < rrank[r][worst]:
                        slot.remove(worst)
                        slot.append(p)
                        deficit[p] -= 1
                        deficit[worst] += 1

    assert all(d == 0 for d in deficit), "full balanced market must fill quotas"
    pairs = set()
    for r, slot in enumerate(held):
        for p in slot:
            pairs.add(_as_pair(proposing_side, p, r))
    return Matching(frozenset(pairs))
