"""Brute-force cut and depth oracles for small networks (independent of the
production cut enumeration)."""

import itertools

from mec.netgraph import Network, collect_fanin_cone, topo_order


def brute_force_cuts(net: Network, root, k: int):
    """All dominance-minimal k-feasible cuts of root by exhaustive search."""
    nodes = [n for n in net.nodes() if net.is_and(n) or net.is_input(n)]
    cuts = set()
    for size in range(1, k + 1):
        for leaves in itertools.combinations(nodes, size):
            ls = set(leaves)
            if root in ls:
                if ls == {root}:
                    cuts.add((root,))
                continue
            try:
                cone = collect_fanin_cone(net, root, ls)
            except Exception:
                continue
            touched = set()
            for n in cone:
                for e in net.fanins(n):
                    if e.target in ls:
                        touched.add(e.target)
            if touched == ls:
                cuts.add(tuple(sorted(ls)))
    return {c for c in cuts if not any(set(d) < set(c) for d in cuts)}


def min_depth_oracle(net: Network, k: int) -> int:
    """Minimum achievable mapped depth, by dynamic programming over all
    brute-force cuts."""
    depth = {0: 0}
    for n in net.comb_inputs():
        depth[n] = 0
    for n in topo_order(net):
        if not net.is_and(n):
            continue
        best = None
        for cut in brute_force_cuts(net, n, k):
            if cut == (n,):
                continue
            d = 1 + max(depth[l] for l in cut)
            best = d if best is None else min(best, d)
        depth[n] = best
    worst = 0
    for e in net.comb_outputs():
        if net.is_and(e.target):
            worst = max(worst, depth[e.target])
    return worst
