"""Shared machinery for the pairwise-combination closure procedures.

Both the round-elimination step (union/intersection over label sets) and the
diagram-driven fixed-point subprocedure (supremum/infimum over a validated
lattice) are instances of one worklist algorithm:

    start from the input lines, repeatedly combine pairs (one matched pair
    gets the join, the rest get meets), discard dominated lines, stop when
    nothing new survives.

Lines here are internal run-length configurations: tuples of (key, count)
sorted by key, where a key is an int (a label-set bitmask for the RE case, a
diagram node id for the lattice case).  The public modules convert at their
boundaries.

Matchings between two lines are enumerated at the part-type level as
contingency tables (nonnegative integer matrices with fixed margins), which
is equivalent to enumerating all slot permutations but collapses symmetric
slots.  The three search shortcuts (comparable join pair, self-combination
of a chain, non-canonical join host) never change the closure; they only
skip combinations that are always dominated by other enumerated ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

Parts = tuple[tuple[int, int], ...]  # ((key, count), ...) sorted by key


class IterationCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PruneFlags:
    """Search shortcuts; results are identical with any combination of them."""

    comparable_join: bool = True      # skip hosts whose join pair is comparable
    chain_self: bool = True           # skip self-combination of all-comparable lines
    canonical_join_host: bool = True  # skip non-canonical equal-join hosts

    @staticmethod
    def none() -> "PruneFlags":
        return PruneFlags(False, False, False)

    @staticmethod
    def all() -> "PruneFlags":
        return PruneFlags(True, True, True)


@dataclass(frozen=True)
class LatticeOps:
    """The lattice a closure runs over.

    ``leq(x, y)`` means y is an allowed replacement for x (y is reachable
    from x); joins move one matched pair up, meets move pairs down.
    ``valid`` rejects keys that kill a combination (the empty label set in
    the RE case).  ``potential`` is any strictly monotone weight: strict
    domination strictly increases it, which orders domination checks.
    """

    sup: Callable[[int, int], int]
    inf: Callable[[int, int], int]
    leq: Callable[[int, int], bool]
    potential: Callable[[int], int]
    valid: Callable[[int], bool] = lambda key: True


def mask_ops(num_labels: int) -> LatticeOps:
    """Label-set bitmask lattice: join is union, meet is intersection."""
    return LatticeOps(
        sup=lambda a, b: a | b,
        inf=lambda a, b: a & b,
        leq=lambda a, b: a & b == a,
        potential=lambda a: bin(a).count("1"),
        valid=lambda a: a != 0,
    )


def line_potential(parts: Parts, ops: LatticeOps) -> int:
    return sum(c * ops.potential(k) for k, c in parts)


def line_degree(parts: Parts) -> int:
    return sum(c for _, c in parts)


def dominates(big: Parts, small: Parts, ops: LatticeOps) -> bool:
    """True iff a slot bijection exists with small[i] <= big[phi(i)].

    Checked via Hall's condition on part types with multiplicities, which is
    equivalent to enumerating slot permutations.
    """
    if line_degree(big) != line_degree(small):
        return False
    leq = ops.leq
    adj = []
    for sk, _ in small:
        m = 0
        for j, (bk, _) in enumerate(big):
            if leq(sk, bk):
                m |= 1 << j
        if not m:
            return False
        adj.append(m)
    ns = len(small)
    caps = [c for _, c in big]
    for subset in range(1, 1 << ns):
        need = 0
        nb_mask = 0
        s = subset
        i = 0
        while s:
            if s & 1:
                need += small[i][1]
                nb_mask |= adj[i]
            s >>= 1
            i += 1
        have = 0
        m = nb_mask
        j = 0
        while m:
            if m & 1:
                have += caps[j]
            m >>= 1
            j += 1
        if need > have:
            return False
    return True


def discard_non_maximal(lines: Iterable[Parts], ops: LatticeOps) -> set[Parts]:
    """Keep exactly the lines not strictly dominated by another line."""
    uniq = sorted(set(lines), key=lambda L: (-line_potential(L, ops), L))
    kept: list[tuple[int, Parts]] = []
    out: set[Parts] = set()
    for L in uniq:
        pot = line_potential(L, ops)
        # strict domination strictly increases the potential, so only
        # strictly heavier survivors can dominate L
        if any(kp > pot and dominates(K, L, ops) for kp, K in kept):
            continue
        kept.append((pot, L))
        out.add(L)
    return out


def _compositions(total: int, caps: list[int]):
    """Weak compositions of total with per-position caps."""
    n = len(caps)
    if n == 0:
        if total == 0:
            yield ()
        return
    suffix = [0] * (n + 1)
    for i in reversed(range(n)):
        suffix[i] = suffix[i + 1] + caps[i]
    if total > suffix[0]:
        return
    out = [0] * n

    def rec(i: int, remaining: int):
        if i == n - 1:
            out[i] = remaining
            yield tuple(out)
            return
        lo = max(0, remaining - suffix[i + 1])
        hi = min(caps[i], remaining)
        for v in range(lo, hi + 1):
            out[i] = v
            yield from rec(i + 1, remaining - v)

    yield from rec(0, total)


def _tables(rows: list[int], cols: list[int], allowed):
    """Nonnegative matrices with the given margins, zero on forbidden cells."""
    m = len(cols)
    cols_left = list(cols)
    acc: list[tuple[int, ...]] = []

    def rec(i: int):
        if i == len(rows):
            yield tuple(acc)
            return
        caps = [cols_left[j] if allowed[i][j] else 0 for j in range(m)]
        for comp in _compositions(rows[i], caps):
            for j in range(m):
                cols_left[j] -= comp[j]
            acc.append(comp)
            yield from rec(i + 1)
            acc.pop()
            for j in range(m):
                cols_left[j] += comp[j]

    yield from rec(0)


def _all_comparable(parts: Parts, ops: LatticeOps) -> bool:
    keys = [k for k, _ in parts]
    leq = ops.leq
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            if not (leq(keys[i], keys[j]) or leq(keys[j], keys[i])):
                return False
    return True


@dataclass(frozen=True)
class Candidate:
    """How one combination result was produced, enough to rebuild a matching."""

    left: Parts
    right: Parts
    join_row: int                       # part index in left
    join_col: int                       # part index in right
    table: tuple[tuple[int, ...], ...]  # merged contingency table
    row_groups: tuple[tuple[int, ...], ...]  # original part indices per row
    col_groups: tuple[tuple[int, ...], ...]


def pair_candidates(a: Parts, b: Parts, ops: LatticeOps, prune: PruneFlags,
                    sink: dict[Parts, Candidate]) -> None:
    """All combinations of lines a and b, deduplicated into ``sink``."""
    sa = [k for k, _ in a]
    ca = [c for _, c in a]
    sb = [k for k, _ in b]
    cb = [c for _, c in b]
    s, t = len(sa), len(sb)
    sup, inf, leq, valid = ops.sup, ops.inf, ops.leq, ops.valid

    inf_m = [[inf(sa[i], sb[j]) for j in range(t)] for i in range(s)]
    sup_m = [[sup(sa[i], sb[j]) for j in range(t)] for i in range(s)]

    for iu in range(s):
        for ju in range(t):
            if prune.comparable_join and (
                    leq(sa[iu], sb[ju]) or leq(sb[ju], sa[iu])):
                continue
            if prune.canonical_join_host and _better_host(
                    iu, ju, sa, ca, sb, cb, sup_m, leq):
                continue
            sup_key = sup_m[iu][ju]
            if not valid(sup_key):
                continue
            rows = list(ca)
            rows[iu] -= 1
            cols = list(cb)
            cols[ju] -= 1
            act_r = [i for i in range(s) if rows[i] > 0]
            act_c = [j for j in range(t) if cols[j] > 0]

            # merge rows (then columns) with identical meet profiles; any
            # distribution inside a merged group yields the same line
            row_groups: list[list[int]] = []
            m_rows: list[int] = []
            m_rprof: list[tuple[int, ...]] = []
            seen_r: dict[tuple[int, ...], int] = {}
            for i in act_r:
                key = tuple(inf_m[i][j] for j in act_c)
                at = seen_r.get(key)
                if at is None:
                    seen_r[key] = len(m_rows)
                    m_rows.append(rows[i])
                    m_rprof.append(key)
                    row_groups.append([i])
                else:
                    m_rows[at] += rows[i]
                    row_groups[at].append(i)
            col_groups: list[list[int]] = []
            m_cols: list[int] = []
            m_cprof: list[tuple[int, ...]] = []
            seen_c: dict[tuple[int, ...], int] = {}
            for jj, j in enumerate(act_c):
                key = tuple(p[jj] for p in m_rprof)
                at = seen_c.get(key)
                if at is None:
                    seen_c[key] = len(m_cols)
                    m_cols.append(cols[j])
                    m_cprof.append(key)
                    col_groups.append([j])
                else:
                    m_cols[at] += cols[j]
                    col_groups[at].append(j)
            cell = [[m_cprof[j][i] for j in range(len(m_cols))]
                    for i in range(len(m_rows))]
            allowed = [[valid(cell[i][j]) for j in range(len(m_cols))]
                       for i in range(len(m_rows))]

            for table in _tables(m_rows, m_cols, allowed):
                counts: dict[int, int] = {sup_key: 1}
                for i, row in enumerate(table):
                    ci = cell[i]
                    for j, x in enumerate(row):
                        if x:
                            k = ci[j]
                            counts[k] = counts.get(k, 0) + x
                parts = tuple(sorted(counts.items()))
                if parts not in sink:
                    sink[parts] = Candidate(
                        a, b, iu, ju, table,
                        tuple(map(tuple, row_groups)),
                        tuple(map(tuple, col_groups)))


def _better_host(iu, ju, sa, ca, sb, cb, sup_m, leq) -> bool:
    """A strictly lower host pair with the same join exists (skip this one)."""
    target = sup_m[iu][ju]
    for i in range(len(sa)):
        for j in range(len(sb)):
            if sup_m[i][j] != target:
                continue
            if not (leq(sa[i], sa[iu]) and leq(sb[j], sb[ju])):
                continue
            if sa[i] == sa[iu] and sb[j] == sb[ju]:
                continue
            # the lower host must use a slot distinct from the join slot
            if sa[i] == sa[iu] and ca[iu] < 2:
                continue
            if sb[j] == sb[ju] and cb[ju] < 2:
                continue
            return True
    return False


def matching_of(cand: Candidate) -> tuple[tuple[int, ...], int]:
    """Explicit slot matching (phi, u) realizing a candidate.

    Slots expand the canonical parts in order.  phi[i] is the slot of the
    right line matched to slot i of the left line; the join is on slot u.
    """
    a, b = cand.left, cand.right
    off_a = []
    pos = 0
    for _, c in a:
        off_a.append(pos)
        pos += c
    off_b = []
    pos = 0
    for _, c in b:
        off_b.append(pos)
        pos += c
    next_a = list(off_a)
    next_b = list(off_b)
    phi = [-1] * line_degree(a)

    u = next_a[cand.join_row]
    phi[u] = next_b[cand.join_col]
    next_a[cand.join_row] += 1
    next_b[cand.join_col] += 1

    rows_left = {i: a[i][1] - (1 if i == cand.join_row else 0)
                 for g in cand.row_groups for i in g}
    cols_left = {j: b[j][1] - (1 if j == cand.join_col else 0)
                 for g in cand.col_groups for j in g}

    for gi, row in enumerate(cand.table):
        rpool = [i for i in cand.row_groups[gi] if rows_left[i] > 0]
        for gj, x in enumerate(row):
            cpool = [j for j in cand.col_groups[gj] if cols_left[j] > 0]
            ri = ci = 0
            while x > 0:
                while rows_left[rpool[ri]] == 0:
                    ri += 1
                while cols_left[cpool[ci]] == 0:
                    ci += 1
                i, j = rpool[ri], cpool[ci]
                take = min(x, rows_left[i], cols_left[j])
                for _ in range(take):
                    phi[next_a[i]] = next_b[j]
                    next_a[i] += 1
                    next_b[j] += 1
                rows_left[i] -= take
                cols_left[j] -= take
                x -= take
    assert all(v >= 0 for v in phi)
    return tuple(phi), u


def combine_slots(a_slots, b_slots, phi, u, ops: LatticeOps):
    """Combine two expanded-slot lines under an explicit matching.

    Returns the resulting keys (join on slot u, meets elsewhere) in left-slot
    order, or None when a meet is invalid (empty label set).
    """
    if len(a_slots) != len(b_slots) or len(phi) != len(a_slots):
        raise ValueError("slot count mismatch")
    if sorted(phi) != list(range(len(b_slots))):
        raise ValueError("matching is not a bijection")
    if not 0 <= u < len(a_slots):
        raise ValueError("join slot out of range")
    out = []
    for i, x in enumerate(a_slots):
        y = b_slots[phi[i]]
        key = ops.sup(x, y) if i == u else ops.inf(x, y)
        if not ops.valid(key):
            return None
        out.append(key)
    return out


def closure(initial: list[Parts], ops: LatticeOps, prune: PruneFlags, *,
            filter_initial: bool = True,
            max_rounds: int = 10_000,
            on_round=None,
            record_provenance: bool = False):
    """Run the combine/discard worklist to its least fixed point.

    New lines of a round are combined against all survivors, which covers
    every pair of the plain restart-each-round formulation: results against
    removed lines stay dominated forever (domination is transitive).

    Returns (lines, provenance): provenance maps a surviving line to
    ("leaf", input_index) or ("combine", left, right, phi, u) and is only
    populated when ``record_provenance`` is set.
    """
    prov: dict[Parts, tuple] = {}
    for idx, parts in enumerate(initial):
        if parts not in prov:
            prov[parts] = ("leaf", idx)

    current = discard_non_maximal(initial, ops) if filter_initial \
        else set(initial)
    fresh = set(current)
    rounds = 0
    while fresh:
        rounds += 1
        if rounds > max_rounds:
            raise IterationCapExceeded(
                f"combination closure exceeded {max_rounds} rounds")
        sink: dict[Parts, Candidate] = {}
        cur_sorted = sorted(current)
        for a in sorted(fresh):
            for b in cur_sorted:
                if b in fresh and b < a:
                    continue  # unordered pair, handled as (b, a)
                if a == b and prune.chain_self and _all_comparable(a, ops):
                    continue
                pair_candidates(a, b, ops, prune, sink)
        nxt = discard_non_maximal(current | set(sink), ops)
        new = nxt - current
        if record_provenance:
            for parts in sorted(new):
                if parts not in prov:
                    cand = sink[parts]
                    phi, u = matching_of(cand)
                    prov[parts] = ("combine", cand.left, cand.right, phi, u)
        if on_round is not None:
            on_round(rounds, len(nxt))
        current = nxt
        fresh = new

    if record_provenance:
        reachable: dict[Parts, tuple] = {}
        stack = sorted(current)
        while stack:
            p = stack.pop()
            if p in reachable:
                continue
            entry = prov[p]
            reachable[p] = entry
            if entry[0] == "combine":
                stack.append(entry[1])
                stack.append(entry[2])
        return current, reachable
    return current, {}
