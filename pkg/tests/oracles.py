"""Brute-force reference computations, deliberately independent of the
library's search and closed-form shortcuts."""

import itertools
from collections import deque

import numpy as np


def iterate_order(perm):
    """Least k >= 1 with perm**k = id, by direct iteration."""
    ident = list(range(len(perm)))
    cur = list(perm)
    k = 1
    while cur != ident:
        cur = [perm[x] for x in cur]
        k += 1
    return k


def orbit(perm, x):
    out = [x]
    y = perm[x]
    while y != x:
        out.append(y)
        y = perm[y]
    return out


def all_maps(source_pairs, n_source, target_pairs, n_target, surjective=False):
    """Every assignment preserving the pair relation, lexicographically."""
    tset = set(target_pairs)
    out = []
    for a in itertools.product(range(n_target), repeat=n_source):
        if surjective and len(set(a)) != n_target:
            continue
        if all((a[x], a[y]) in tset for x, y in source_pairs):
            out.append(a)
    return out


def cyclic_partitions_exist(perm, k):
    """Whether some labelling by 0..k-1 uses every label and satisfies
    label(perm[x]) = label(x) + 1 mod k; enumerates all k**n labellings."""
    n = len(perm)
    labels = np.indices((k,) * n).reshape(n, -1).T
    ok = np.all(labels[:, list(perm)] == (labels + 1) % k, axis=1)
    for j in range(k):
        ok &= np.any(labels == j, axis=1)
    return bool(ok.any())


def reachable_back(succ, x):
    """True iff some path of length >= 1 from x returns to x."""
    seen = set()
    queue = deque(succ[x])
    while queue:
        y = queue.popleft()
        if y == x:
            return True
        if y in seen:
            continue
        seen.add(y)
        queue.extend(succ[y])
    return False


def partial_products(bases, depth):
    out = []
    acc = 1
    for a in bases[:depth]:
        acc *= a
        out.append(acc)
    return out


def mutual_divisibility(a_bases, b_bases, depth, horizon):
    """For every N <= depth some M <= horizon has m^a_N | m^b_M, and
    symmetrically."""
    pa = partial_products(a_bases, horizon)
    pb = partial_products(b_bases, horizon)

    def one_way(p, q):
        return all(any(q[m] % p[n] == 0 for m in range(horizon)) for n in range(depth))

    return one_way(pa, pb) and one_way(pb, pa)


#: eventually periodic odometer specs covering conjugate and
#: non-conjugate pairs
SPEC_POOL = [":2", ":4", ":2,2", "8:2", ":3", ":9", ":2,3", ":6", ":3,2", "6:5",
             "2,3:5", ":5", "4:3", "12:3,2", ":10", "3:2"]


def truncation_is_single_cycle(spec, n, step):
    """Follow ``step`` from the zero vector and count the orbit."""
    start = (0,) * n
    x, length = step(spec, start), 1
    while x != start:
        x, length = step(spec, x), length + 1
    return length


def split_cell_partition(fibres_down, cell, keep):
    """Fibre partition of ``fibres_down`` (a level-to-base map) with the
    fibre over ``cell`` split into ``keep`` and the rest."""
    blocks = {}
    for z, v in enumerate(fibres_down):
        blocks.setdefault(v, set()).add(z)
    inside = blocks.pop(cell)
    keep = set(keep)
    assert keep and keep < inside
    return list(blocks.values()) + [keep, inside - keep]


def star_chain_ok(t, bases, partitions):
    """Each partition has prod(bases[:s]) blocks cycled in order by the
    dynamics, and block j of stage s sits inside block j mod the previous
    modulus of stage s-1 once both are pulled to the deeper level."""
    modulus = 1
    prev = None
    for a, p in zip(bases, partitions):
        modulus *= a
        if a < 2 or len(p.blocks) != modulus:
            return False
        perm = t.levels[p.level].perm
        for j, b in enumerate(p.blocks):
            if {perm[x] for x in b} != set(p.blocks[(j + 1) % modulus]):
                return False
        if prev is not None:
            down = t.composite(p.level, prev.level)
            old_mod = len(prev.blocks)
            for j, b in enumerate(p.blocks):
                if any(down[x] not in prev.blocks[j % old_mod] for x in b):
                    return False
        prev = p
    return True


def cyclic_labellings(perm, k):
    """All labellings by 0..k-1 that advance by one along ``perm`` and use
    every label.  A labelling is fixed by its value at one point of each
    orbit, so trying every such choice is exhaustive."""
    n = len(perm)
    reps, seen = [], set()
    for x in range(n):
        if x not in seen:
            reps.append(x)
            seen.update(orbit(perm, x))
    out = []
    for starts in itertools.product(range(k), repeat=len(reps)):
        lab = [None] * n
        ok = True
        for r, s in zip(reps, starts):
            x, v = r, s
            while lab[x] is None:
                lab[x] = v
                x, v = perm[x], (v + 1) % k
            ok = ok and lab[x] == v
        if ok and len(set(lab)) == k:
            out.append(lab)
    return out


def closed_walk_covers(succ, length, n_states):
    """Whether some closed walk with ``length`` steps visits all states;
    a single cycle of that length maps onto a relation system exactly
    along such a walk."""
    def extend(path):
        if len(path) == length:
            return path[0] in succ[path[-1]] and len(set(path)) == n_states
        return any(extend(path + [y]) for y in succ[path[-1]])

    return any(extend([x]) for x in range(n_states))
