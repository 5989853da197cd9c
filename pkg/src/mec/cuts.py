"""k-feasible cut enumeration with dominance filtering and priority ordering.

Each AND node's cut set is the bounded merge of its fanin cut sets plus the
trivial cut; a choice representative additionally absorbs the cut sets of its
class members.  Only the C best cuts survive, ranked depth-first or
area-first.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .netgraph import CONST0, Network, NodeId, resolve_edge, topo_order

_HASH_MULT = 0x9E3779B97F4A7C15
_WORD = (1 << 64) - 1


def _leaf_bit(n: NodeId) -> int:
    return 1 << ((n * _HASH_MULT & _WORD) >> 58)


@dataclass(frozen=True)
class Cut:
    """A sorted leaf set rooted at some node.

    `src_root` is the node whose structural cone computes the cut's function;
    it differs from the owning node when the cut was absorbed from a choice
    member, in which case `compl` records the polarity between the two.
    """

    leaves: tuple[NodeId, ...]
    sig: int
    depth: int = 0
    area_flow: float = 0.0
    src_root: NodeId = -1
    compl: bool = False
    trivial: bool = False

    def subsumes(self, other: "Cut") -> bool:
        """True when this cut's leaves are a subset of the other's."""
        if self.sig & ~other.sig:
            return False
        return set(self.leaves) <= set(other.leaves)


def trivial_cut(n: NodeId, depth: int = 0, area_flow: float = 0.0) -> Cut:
    return Cut(
        leaves=(n,),
        sig=_leaf_bit(n),
        depth=depth,
        area_flow=area_flow,
        src_root=n,
        trivial=True,
    )


@dataclass
class CutSet:
    """Priority-ordered cuts; the trivial cut always sits last."""

    cuts: list[Cut]

    def __iter__(self):
        return iter(self.cuts)

    def __len__(self):
        return len(self.cuts)

    def nontrivial(self) -> list[Cut]:
        return [c for c in self.cuts if not c.trivial]

    def best(self) -> Cut:
        return self.cuts[0]


def sort_priority(cuts: list[Cut], mode: str = "depth") -> list[Cut]:
    """Stable priority order; trivial cuts are forced to the back."""
    if mode == "depth":
        key = lambda c: (c.trivial, c.depth, c.area_flow, len(c.leaves))
    elif mode == "area":
        key = lambda c: (c.trivial, c.area_flow, c.depth, len(c.leaves))
    else:
        raise ValueError(f"unknown sort mode {mode!r}")
    return sorted(cuts, key=key)


def filter_dominated(cuts: list[Cut]) -> list[Cut]:
    """Drop duplicates and any cut whose leaves contain another cut's."""
    by_size = sorted(cuts, key=lambda c: len(c.leaves))
    kept: list[Cut] = []
    seen: set[tuple[NodeId, ...]] = set()
    for c in by_size:
        if c.leaves in seen:
            continue
        if any(other.subsumes(c) for other in kept):
            continue
        seen.add(c.leaves)
        kept.append(c)
    order = {id(c): i for i, c in enumerate(cuts)}
    kept.sort(key=lambda c: order[id(c)])  # restore input order (stability)
    return kept


def merge_cutsets(cs1: CutSet, cs2: CutSet, k: int) -> list[Cut]:
    """All pairwise leaf unions of size <= k, dominance-filtered."""
    out: list[Cut] = []
    seen: set[tuple[NodeId, ...]] = set()
    for u in cs1:
        for v in cs2:
            sig = u.sig | v.sig
            if bin(sig).count("1") > k:
                continue  # the signature never undercounts the union
            union = tuple(sorted(set(u.leaves) | set(v.leaves)))
            if len(union) > k or union in seen:
                continue
            seen.add(union)
            out.append(Cut(leaves=union, sig=sig))
    return filter_dominated(out)


@dataclass
class NodeLabels:
    """Per-node depth and area-flow labels of the best cut seen so far."""

    depth: list[int]
    area_flow: list[float]


def enumerate_cuts(
    net: Network, k: int = 6, cuts_per_node: int = 8, mode: str = "depth"
) -> dict[NodeId, CutSet]:
    """Compute the priority cut set of every node, in topological order.

    Fanins are resolved through choice representatives, and a representative
    absorbs the non-trivial cuts of its class members (tagged with the
    member as src_root and the member's polarity).
    """
    if k < 2:
        raise ValueError("cut size k must be >= 2")
    if cuts_per_node < 1:
        raise ValueError("cut capacity must be >= 1")
    n_total = len(net)
    labels = NodeLabels(depth=[0] * n_total, area_flow=[0.0] * n_total)
    fanouts = net.fanout_counts()
    cutmap: dict[NodeId, CutSet] = {CONST0: CutSet([trivial_cut(CONST0)])}
    for n in net.comb_inputs():
        cutmap[n] = CutSet([trivial_cut(n)])

    def annotate(c: Cut, owner: NodeId) -> Cut:
        depth = 1 + max(labels.depth[l] for l in c.leaves)
        af = 1.0 + sum(
            labels.area_flow[l] / max(1, fanouts[l]) for l in c.leaves
        )
        return replace(c, depth=depth, area_flow=af, src_root=owner)

    for n in topo_order(net):
        if not net.is_and(n):
            continue
        e0, e1 = (resolve_edge(net, e) for e in net.fanins(n))
        merged = merge_cutsets(cutmap[e0.target], cutmap[e1.target], k)
        candidates = [annotate(c, n) for c in merged]
        rec = net.choice.get(n)
        if rec is not None and rec.repr_node is None:
            for m in net.class_members(n):
                m_compl = net.choice[m].compl_to_repr
                for c in cutmap[m].nontrivial():
                    candidates.append(replace(c, compl=c.compl ^ m_compl))
        candidates = filter_dominated(candidates)
        candidates = sort_priority(candidates, mode)[:cuts_per_node]
        if candidates:
            labels.depth[n] = candidates[0].depth
            labels.area_flow[n] = candidates[0].area_flow
        cutmap[n] = CutSet(candidates + [trivial_cut(n, labels.depth[n], 0.0)])
    return cutmap
