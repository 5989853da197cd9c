"""Depth-oriented k-LUT mapping with depth-preserving area recovery.

The flow mirrors the classic cut-based mapper: enumerate priority cuts,
pick a min-depth representative cut per node, re-select cuts for area under
required-time constraints, then walk back from the outputs instantiating one
LUT block per used node.  Alongside the mapped network we emit the ordered
(source node, block) pair set that the block-level checker consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from . import simulate
from .cuts import Cut, CutSet, enumerate_cuts
from .errors import TrivialRepresentative, UncoveredNode
from .netgraph import (
    CONST0,
    Edge,
    Network,
    NodeId,
    collect_cover_forward,
    collect_fanin_cone,
    resolve_edge,
    topo_order,
)

_INF = float("inf")


class Ref(NamedTuple):
    """A LUT input or output root: a combinational input, a block, or const-0."""

    kind: str  # 'pi' | 'block' | 'const'
    index: int = 0


CONST_REF = Ref("const", 0)


@dataclass
class Block:
    """One LUT: leaf references and a truth table (bit p = output under
    pattern p, bit i of p = value of leaves[i])."""

    leaves: list[Ref]
    tt: int
    src: NodeId


@dataclass
class MappedNetwork:
    n_pis: int
    n_latches: int = 0
    blocks: list[Block] = field(default_factory=list)
    pos: list[tuple[Ref, bool]] = field(default_factory=list)
    latch_ins: list[tuple[Ref, bool]] = field(default_factory=list)

    def n_inputs(self) -> int:
        return self.n_pis + self.n_latches

    def comb_outputs(self) -> list[tuple[Ref, bool]]:
        return self.pos + self.latch_ins

    def lut_count(self) -> int:
        return len(self.blocks)

    def depth(self) -> int:
        levels = []
        for blk in self.blocks:
            lv = 1
            for r in blk.leaves:
                if r.kind == "block":
                    lv = max(lv, 1 + levels[r.index])
            levels.append(lv)
        worst = 0
        for ref, _ in self.comb_outputs():
            if ref.kind == "block":
                worst = max(worst, levels[ref.index])
        return worst

    def block_by_src(self) -> dict[NodeId, int]:
        return {blk.src: i for i, blk in enumerate(self.blocks)}


class CorrespondingPair(NamedTuple):
    fn: NodeId  # used node in the original network
    sn: int  # block index in the mapped network


@dataclass
class CorrespondingPairSet:
    pairs: list[CorrespondingPair]

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


@dataclass
class MapConfig:
    k: int = 6
    cuts_per_node: int = 8
    area_rounds: int = 2


def og_node_of_ref(og: Network, mg: MappedNetwork, ref: Ref) -> NodeId:
    """The original-network node a mapped-network reference stands for."""
    if ref.kind == "const":
        return CONST0
    if ref.kind == "pi":
        return og.comb_inputs()[ref.index]
    return mg.blocks[ref.index].src


# -- cut selection ----------------------------------------------------------


def depth_oriented_mapping(
    net: Network, cutmap: dict[NodeId, CutSet]
) -> dict[NodeId, Cut]:
    """Assign each AND node its min-depth cut (area flow breaks ties)."""
    sel: dict[NodeId, Cut] = {}
    for n in topo_order(net):
        if net.is_and(n):
            sel[n] = min(
                cutmap[n].nontrivial(),
                key=lambda c: (c.depth, c.area_flow, len(c.leaves)),
            )
    return sel


def _resolved_out_targets(net: Network) -> list[Edge]:
    return [resolve_edge(net, e) for e in net.comb_outputs()]


def _arrivals(net: Network, sel: dict[NodeId, Cut]) -> list[int]:
    arr = [0] * len(net)
    for n in topo_order(net):
        if net.is_and(n):
            arr[n] = 1 + max(arr[l] for l in sel[n].leaves)
    return arr


def mapped_depth(net: Network, sel: dict[NodeId, Cut]) -> int:
    arr = _arrivals(net, sel)
    return max(
        (arr[e.target] for e in _resolved_out_targets(net) if net.is_and(e.target)),
        default=0,
    )


def _used_nodes(net: Network, sel: dict[NodeId, Cut]) -> set[NodeId]:
    used: set[NodeId] = set()
    stack = [e.target for e in _resolved_out_targets(net) if net.is_and(e.target)]
    while stack:
        n = stack.pop()
        if n in used:
            continue
        used.add(n)
        for l in sel[n].leaves:
            if net.is_and(l):
                stack.append(l)
    return used


def lut_count(net: Network, sel: dict[NodeId, Cut]) -> int:
    return len(_used_nodes(net, sel))


def _required_times(net, sel, used, target_depth):
    req = [_INF] * len(net)
    for e in _resolved_out_targets(net):
        if net.is_and(e.target):
            req[e.target] = min(req[e.target], target_depth)
    for n in reversed(topo_order(net)):
        if n in used and req[n] < _INF:
            for l in sel[n].leaves:
                if net.is_and(l):
                    req[l] = min(req[l], req[n] - 1)
    return req


def _mapping_refs(net, sel, used) -> list[int]:
    refs = [0] * len(net)
    for e in _resolved_out_targets(net):
        if net.is_and(e.target):
            refs[e.target] += 1
    for u in used:
        for l in sel[u].leaves:
            if net.is_and(l):
                refs[l] += 1
    return refs


def _area_ref(net, refs, sel, cut) -> int:
    area = 1
    for l in cut.leaves:
        if net.is_and(l):
            if refs[l] == 0:
                area += _area_ref(net, refs, sel, sel[l])
            refs[l] += 1
    return area


def _area_deref(net, refs, sel, cut) -> int:
    area = 1
    for l in cut.leaves:
        if net.is_and(l):
            refs[l] -= 1
            if refs[l] == 0:
                area += _area_deref(net, refs, sel, sel[l])
    return area


def _area_pass(net, cutmap, sel, mode: str, target_depth: int) -> dict[NodeId, Cut]:
    """One re-selection sweep ('flow' or 'exact'), depth-constrained."""
    used = _used_nodes(net, sel)
    req = _required_times(net, sel, used, target_depth)
    fanouts = net.fanout_counts()
    cur = dict(sel)
    refs = _mapping_refs(net, cur, used)
    arr = [0] * len(net)
    aflow = [0.0] * len(net)

    def cut_arrival(c: Cut) -> int:
        return 1 + max(arr[l] for l in c.leaves)

    def flow_cost(c: Cut) -> float:
        return 1.0 + sum(aflow[l] / max(1, fanouts[l]) for l in c.leaves)

    for n in topo_order(net):
        if not net.is_and(n):
            continue
        cands = cutmap[n].nontrivial()
        bound = req[n] if req[n] < _INF else target_depth
        feasible = [c for c in cands if cut_arrival(c) <= bound]
        if not feasible:
            best = min(cands, key=lambda c: (cut_arrival(c), c.area_flow))
        elif mode == "flow":
            best = min(
                feasible, key=lambda c: (flow_cost(c), cut_arrival(c), len(c.leaves))
            )
        else:
            node_used = refs[n] > 0
            if node_used:
                _area_deref(net, refs, cur, cur[n])
            scored = []
            for c in feasible:
                a = _area_ref(net, refs, cur, c)
                _area_deref(net, refs, cur, c)
                scored.append((a, cut_arrival(c), len(c.leaves), c))
            best = min(scored, key=lambda t: t[:3])[3]
            cur[n] = best
            if node_used:
                _area_ref(net, refs, cur, best)
        cur[n] = best
        arr[n] = cut_arrival(best)
        aflow[n] = flow_cost(best)
    return cur


def area_recovery(
    net: Network,
    cutmap: dict[NodeId, CutSet],
    sel: dict[NodeId, Cut],
    rounds: int = 2,
) -> dict[NodeId, Cut]:
    """Re-select cuts for area without worsening depth or LUT count.

    Alternates area-flow and exact-local-area sweeps; a sweep is kept only if
    the mapped depth is unchanged and the LUT count did not grow.
    """
    if rounds <= 0:
        return dict(sel)
    target_depth = mapped_depth(net, sel)
    best = dict(sel)
    for r in range(rounds):
        mode = "flow" if r % 2 == 0 else "exact"
        cand = _area_pass(net, cutmap, best, mode, target_depth)
        if (
            mapped_depth(net, cand) <= target_depth
            and lut_count(net, cand) <= lut_count(net, best)
        ):
            best = cand
    return best


# -- final mapping ----------------------------------------------------------


def _cone_tt(net: Network, cut: Cut, owner: NodeId, pos_of: dict[NodeId, int]) -> int:
    """Truth table of the block rooted at `owner` over the cut's leaves.

    Regular networks evaluate the structural cone; choice networks evaluate
    the forward cover, which may route through class members (an alias step
    applies the member's polarity).
    """
    leaves = list(cut.leaves)
    width = 1 << len(leaves)
    full = (1 << width) - 1
    patterns = simulate.input_patterns(len(leaves))
    vals = {l: patterns[i] for i, l in enumerate(leaves)}
    if owner in vals:
        return vals[owner]
    if not net.has_choices():
        cone = collect_fanin_cone(net, owner, set(leaves))
        for n in sorted(cone, key=pos_of.get):
            e0, e1 = net.fanins(n)
            a = vals[e0.target] ^ (full if e0.compl else 0)
            b = vals[e1.target] ^ (full if e1.compl else 0)
            vals[n] = a & b
        return vals[owner]
    for step in collect_cover_forward(net, owner, leaves):
        if step[0] == "and":
            n = step[1]
            e0, e1 = net.fanins(n)
            a = vals[e0.target] ^ (full if e0.compl else 0)
            b = vals[e1.target] ^ (full if e1.compl else 0)
            vals[n] = a & b
        else:
            _, n, sibling, compl = step
            vals[n] = vals[sibling] ^ (full if compl else 0)
    return vals[owner]


def derive_final_mapping(
    net: Network, sel: dict[NodeId, Cut]
) -> tuple[MappedNetwork, CorrespondingPairSet]:
    """Instantiate one LUT per used node and emit the (fn, sn) pair set.

    Used nodes are discovered in reverse topological order from the outputs
    (the pair set keeps that discovery order); blocks are laid out in
    ascending topological order so every leaf precedes its user.
    """
    order = topo_order(net)
    pos_of = {n: i for i, n in enumerate(order)}
    out_targets = _resolved_out_targets(net)

    used_flag = bytearray(len(net))
    for e in out_targets:
        if net.is_and(e.target):
            used_flag[e.target] = 1
    discovery: list[NodeId] = []
    for n in reversed(order):
        if used_flag[n] and net.is_and(n):
            discovery.append(n)
            cut = sel[n]
            if cut.trivial:
                raise TrivialRepresentative(f"used node {n} has a trivial cut")
            for l in cut.leaves:
                if net.is_and(l):
                    used_flag[l] = 1

    used_sorted = [n for n in order if used_flag[n] and net.is_and(n)]
    block_id = {n: i for i, n in enumerate(used_sorted)}
    input_index = {n: i for i, n in enumerate(net.comb_inputs())}

    def make_ref(n: NodeId) -> Ref:
        if n == CONST0:
            return CONST_REF
        if net.is_input(n):
            return Ref("pi", input_index[n])
        return Ref("block", block_id[n])

    mg = MappedNetwork(n_pis=len(net.pis), n_latches=len(net.latches))
    for n in used_sorted:
        cut = sel[n]
        mg.blocks.append(
            Block(
                leaves=[make_ref(l) for l in cut.leaves],
                tt=_cone_tt(net, cut, n, pos_of),
                src=n,
            )
        )
    n_real_pos = len(net.pos)
    for i, e in enumerate(out_targets):
        entry = (make_ref(e.target), e.compl)
        if i < n_real_pos:
            mg.pos.append(entry)
        else:
            mg.latch_ins.append(entry)

    cps = CorrespondingPairSet([CorrespondingPair(n, block_id[n]) for n in discovery])
    check_cover(net, mg)
    return mg, cps


def topologize_cps(cps: CorrespondingPairSet, net: Network) -> CorrespondingPairSet:
    """Reorder pairs so every fn follows its fanin-side used nodes (stable)."""
    pos_of = {n: i for i, n in enumerate(topo_order(net))}
    return CorrespondingPairSet(sorted(cps.pairs, key=lambda p: pos_of[p.fn]))


def check_cover(og: Network, mg: MappedNetwork) -> None:
    """Assert the Theorem-style global cover of the mapping.

    Every combinational output must land on a block root, an input, or the
    constant; every block leaf likewise; and for choice-free networks, every
    node reachable backward from the outputs must be a block leaf or sit
    inside some block's covered cone.  Raises UncoveredNode on violation.
    """
    covered: set[NodeId] = set()
    leaf_nodes_all: set[NodeId] = set()
    srcs = {blk.src for blk in mg.blocks}
    has_choices = og.has_choices()
    for blk in mg.blocks:
        leaf_nodes = [og_node_of_ref(og, mg, r) for r in blk.leaves]
        if has_choices:
            cone = {s[1] for s in collect_cover_forward(og, blk.src, leaf_nodes)}
        else:
            cone = collect_fanin_cone(og, blk.src, set(leaf_nodes))
        covered |= cone
        covered.add(blk.src)
        leaf_nodes_all |= set(leaf_nodes)
        for l in leaf_nodes:
            if og.is_and(l) and l not in srcs:
                raise UncoveredNode(f"block leaf {l} is not a mapped node")
    for e in _resolved_out_targets(og):
        if og.is_and(e.target) and e.target not in srcs:
            raise UncoveredNode(f"output root {e.target} is not a mapped node")
    if og.has_choices():
        return
    reach: set[NodeId] = set()
    stack = [e.target for e in _resolved_out_targets(og) if og.is_and(e.target)]
    while stack:
        n = stack.pop()
        if n in reach:
            continue
        reach.add(n)
        for e in og.fanins(n):
            if og.is_and(e.target):
                stack.append(e.target)
    stray = reach - covered - leaf_nodes_all
    if stray:
        raise UncoveredNode(f"nodes outside every block: {sorted(stray)[:5]}")


def map_network(
    net: Network, config: Optional[MapConfig] = None
) -> tuple[MappedNetwork, CorrespondingPairSet]:
    """The end-to-end mapping flow over an (optionally choice) network."""
    cfg = config or MapConfig()
    cutmap = enumerate_cuts(net, cfg.k, cfg.cuts_per_node)
    sel = depth_oriented_mapping(net, cutmap)
    sel = area_recovery(net, cutmap, sel, cfg.area_rounds)
    return derive_final_mapping(net, sel)
