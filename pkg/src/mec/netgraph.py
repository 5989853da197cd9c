"""And-inverter graph with complemented edges, latches, and choice classes.

A network is a dense array of nodes: node 0 is the constant-0 node, primary
inputs have no fanins, and every other node is a 2-input AND.  Inverters live
on edges.  A choice class links functionally equivalent (or complementary)
nodes into a list headed by a representative; only the representative carries
fanouts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

from .errors import (
    BudgetExhausted,
    CycleDetected,
    InterfaceMismatch,
    NotACut,
    OutputMismatch,
    RootUnreached,
)

NodeId = int
CONST0: NodeId = 0


class Edge(NamedTuple):
    """A wire to `target`, optionally passing through an inverter."""

    target: NodeId
    compl: bool = False

    def invert(self) -> "Edge":
        return Edge(self.target, not self.compl)

    def lit(self) -> int:
        """Pack into an AIGER-style literal (2*target + compl)."""
        return self.target * 2 + int(self.compl)


def edge_from_lit(lit: int) -> Edge:
    return Edge(lit >> 1, bool(lit & 1))


FALSE_EDGE = Edge(CONST0, False)
TRUE_EDGE = Edge(CONST0, True)


@dataclass
class ChoiceRec:
    """Choice-class bookkeeping for one node.

    A representative has repr_node=None and next_choice pointing at the first
    member; a member points back at its representative and forward along the
    member list.
    """

    repr_node: Optional[NodeId]
    next_choice: Optional[NodeId] = None
    compl_to_repr: bool = False


class Network:
    """Mutable while being built; treat as immutable once handed around."""

    def __init__(self):
        self._fanins: list[Optional[tuple[Edge, Edge]]] = [None]  # node 0 = const
        self.pis: list[NodeId] = []
        self.pos: list[Edge] = []
        self.latches: list[tuple[NodeId, Edge]] = []
        self.choice: dict[NodeId, ChoiceRec] = {}
        self._strash: dict[tuple[int, int], NodeId] = {}

    # -- construction -------------------------------------------------------

    def add_pi(self) -> NodeId:
        n = len(self._fanins)
        self._fanins.append(None)
        self.pis.append(n)
        return n

    def add_and(self, e0: Edge, e1: Edge) -> NodeId:
        """Append a raw AND node; no hashing, no folding."""
        n = len(self._fanins)
        self._fanins.append((e0, e1))
        return n

    def add_and_hashed(self, e0: Edge, e1: Edge) -> Edge:
        """Structurally hashed AND with constant/idempotence folding."""
        if e0.lit() > e1.lit():
            e0, e1 = e1, e0
        if e0 == FALSE_EDGE:
            return FALSE_EDGE
        if e0 == TRUE_EDGE:
            return e1
        if e0 == e1:
            return e0
        if e0.target == e1.target:  # x & ~x
            return FALSE_EDGE
        key = (e0.lit(), e1.lit())
        hit = self._strash.get(key)
        if hit is not None:
            return Edge(hit, False)
        n = self.add_and(e0, e1)
        self._strash[key] = n
        return Edge(n, False)

    def reserve_and(self) -> NodeId:
        """Allocate an AND node whose fanins are filled in later (parsers)."""
        n = len(self._fanins)
        self._fanins.append((FALSE_EDGE, FALSE_EDGE))
        return n

    def set_fanins(self, n: NodeId, e0: Edge, e1: Edge) -> None:
        self._fanins[n] = (e0, e1)

    def add_po(self, e: Edge) -> int:
        self.pos.append(e)
        return len(self.pos) - 1

    def add_latch(self) -> NodeId:
        """Create a latch; its output is a fresh pseudo-PI node."""
        n = len(self._fanins)
        self._fanins.append(None)
        self.latches.append((n, FALSE_EDGE))
        return n

    def set_latch_next(self, idx: int, e: Edge) -> None:
        out, _ = self.latches[idx]
        self.latches[idx] = (out, e)

    # -- inspection ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._fanins)

    def nodes(self) -> range:
        return range(len(self._fanins))

    def is_const(self, n: NodeId) -> bool:
        return n == CONST0

    def is_and(self, n: NodeId) -> bool:
        return self._fanins[n] is not None

    def is_input(self, n: NodeId) -> bool:
        return n != CONST0 and self._fanins[n] is None

    def fanins(self, n: NodeId) -> tuple[Edge, Edge]:
        fi = self._fanins[n]
        if fi is None:
            raise ValueError(f"node {n} has no fanins")
        return fi

    def n_ands(self) -> int:
        return sum(1 for fi in self._fanins if fi is not None)

    def comb_inputs(self) -> list[NodeId]:
        """PIs plus latch outputs: the combinational input boundary."""
        return self.pis + [out for out, _ in self.latches]

    def comb_outputs(self) -> list[Edge]:
        """POs plus latch next-state edges: the combinational output boundary."""
        return self.pos + [nxt for _, nxt in self.latches]

    def has_choices(self) -> bool:
        return bool(self.choice)

    def is_choice_member(self, n: NodeId) -> bool:
        rec = self.choice.get(n)
        return rec is not None and rec.repr_node is not None

    def class_members(self, r: NodeId) -> Iterator[NodeId]:
        """Members of r's class, excluding r itself."""
        rec = self.choice.get(r)
        m = rec.next_choice if rec is not None else None
        while m is not None:
            yield m
            m = self.choice[m].next_choice

    def link_choice(self, repr_node: NodeId, member: NodeId, compl: bool) -> None:
        rec = self.choice.setdefault(repr_node, ChoiceRec(repr_node=None))
        self.choice[member] = ChoiceRec(
            repr_node=repr_node, next_choice=rec.next_choice, compl_to_repr=compl
        )
        rec.next_choice = member

    def fanout_counts(self) -> list[int]:
        counts = [0] * len(self._fanins)
        for fi in self._fanins:
            if fi is not None:
                counts[fi[0].target] += 1
                counts[fi[1].target] += 1
        for e in self.pos:
            counts[e.target] += 1
        for _, e in self.latches:
            counts[e.target] += 1
        return counts

    def gate_levels(self) -> int:
        """Depth of the AND graph in gates (unit delay, inverters free)."""
        depth = [0] * len(self._fanins)
        worst = 0
        for n in topo_order(self):
            if self.is_and(n):
                e0, e1 = self.fanins(n)
                depth[n] = 1 + max(depth[e0.target], depth[e1.target])
                worst = max(worst, depth[n])
        return worst


def representative(net: Network, n: NodeId) -> tuple[NodeId, bool]:
    """Resolve n to its class representative and the complement relation."""
    rec = net.choice.get(n)
    if rec is None or rec.repr_node is None:
        return n, False
    return rec.repr_node, rec.compl_to_repr


def resolve_edge(net: Network, e: Edge) -> Edge:
    r, c = representative(net, e.target)
    return Edge(r, e.compl ^ c)


def topo_order(net: Network) -> list[NodeId]:
    """All nodes, fanins before users, members before their representative.

    The constant node and the inputs come first, in declaration order.
    Raises CycleDetected on corrupt graphs.
    """
    n_total = len(net)
    order: list[NodeId] = [CONST0] + net.comb_inputs()
    state = bytearray(n_total)  # 0 new, 1 on stack, 2 done
    for n in order:
        state[n] = 2

    def deps(n: NodeId) -> list[NodeId]:
        e0, e1 = net.fanins(n)
        d = [e0.target, e1.target]
        rec = net.choice.get(n)
        if rec is not None and rec.repr_node is None:
            d.extend(net.class_members(n))
        return d

    for start in range(n_total):
        if state[start]:
            continue
        stack: list[tuple[NodeId, Iterator[NodeId]]] = [(start, iter(deps(start)))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for d in it:
                if state[d] == 1:
                    raise CycleDetected(f"cycle through node {d}")
                if state[d] == 0:
                    state[d] = 1
                    stack.append((d, iter(deps(d))))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                state[node] = 2
                order.append(node)
    return order


def collect_fanin_cone(net: Network, root: NodeId, leaves) -> set[NodeId]:
    """Nodes on paths from root down to (excluding) the leaves, root included.

    Raises NotACut if the backward traversal escapes the leaf set.
    """
    leaves = set(leaves)
    if root in leaves:
        return {root}
    cone: set[NodeId] = set()
    stack = [root]
    while stack:
        n = stack.pop()
        if n in cone:
            continue
        if not net.is_and(n):
            raise NotACut(f"reached terminal node {n} outside the leaves")
        cone.add(n)
        for e in net.fanins(n):
            if e.target not in leaves:
                stack.append(e.target)
    return cone


def topo_positions(net: Network) -> dict[NodeId, int]:
    cache = getattr(net, "_topo_pos_cache", None)
    if cache is None or len(cache) != len(net):
        cache = {n: i for i, n in enumerate(topo_order(net))}
        net._topo_pos_cache = cache
    return cache


def fanout_adjacency(net: Network) -> dict[NodeId, list[NodeId]]:
    cache = getattr(net, "_fanout_adj_cache", None)
    if cache is None or len(cache) != len(net):
        cache = {n: [] for n in net.nodes()}
        for n in net.nodes():
            if net.is_and(n):
                e0, e1 = net.fanins(n)
                cache[e0.target].append(n)
                if e1.target != e0.target:
                    cache[e1.target].append(n)
        net._fanout_adj_cache = cache
    return cache


# A cover step tells how one covered node is determined from what is already
# available: ("and", n) via its own fanins, or ("alias", n, sibling, compl)
# via a choice-class sibling.
CoverStep = tuple


def collect_cover_forward(net: Network, root: NodeId, leaves) -> list[CoverStep]:
    """Sweep upward from the leaves, gathering every determinable node.

    A node is gathered once both fanins are available, or once a member of
    its choice class is; the sweep stops at root's topological position, so
    the result may contain redundant nodes but never anything above the
    root.  Raises RootUnreached if the root is never gathered.
    """
    pos = topo_positions(net)
    limit = pos[root]
    leaves = set(leaves)
    fanouts = fanout_adjacency(net)
    avail: set[NodeId] = set(leaves)
    steps: list[CoverStep] = []

    def gather_mode(n: NodeId) -> Optional[CoverStep]:
        if n in avail or pos.get(n, limit + 1) > limit:
            return None
        if net.is_and(n):
            e0, e1 = net.fanins(n)
            if e0.target in avail and e1.target in avail:
                return ("and", n)
        rec = net.choice.get(n)
        if rec is not None and rec.repr_node is None:
            for m in net.class_members(n):
                if m in avail:
                    return ("alias", n, m, net.choice[m].compl_to_repr)
        return None

    worklist = sorted(leaves, key=lambda n: pos.get(n, -1))
    while worklist:
        x = worklist.pop()
        neighbours = list(fanouts.get(x, ()))
        rec = net.choice.get(x)
        if rec is not None and rec.repr_node is not None:
            neighbours.append(rec.repr_node)
        for n in neighbours:
            step = gather_mode(n)
            if step is not None:
                avail.add(n)
                steps.append(step)
                worklist.append(n)
    if root not in avail:
        raise RootUnreached(f"forward sweep never reached root {root}")
    steps.sort(key=lambda s: pos[s[1]])
    return steps


def prune_cover_steps(
    net: Network, steps: list[CoverStep], root: NodeId, leaves
) -> list[CoverStep]:
    """Drop steps the root does not depend on: the exact covered set."""
    leaves = set(leaves)
    needed = {root}
    kept: list[CoverStep] = []
    for step in reversed(steps):
        n = step[1]
        if n not in needed:
            continue
        kept.append(step)
        if step[0] == "and":
            for e in net.fanins(n):
                if e.target not in leaves:
                    needed.add(e.target)
        else:
            needed.add(step[2])
    kept.reverse()
    return kept


@dataclass
class ChoiceMergeConfig:
    """Proof budget for pairing nodes during a choice merge."""

    exhaustive_support_bound: int = 12
    n_random_vectors: int = 256
    sat_conflicts: int = 100_000
    sat_seconds: float = 10.0
    seed: int = 0xC0FFEE


@dataclass
class _MergeState:
    net: Network
    width: int
    full_mask: int
    sims: list[int] = field(default_factory=list)
    supports: list[int] = field(default_factory=list)
    by_sig: dict[int, list[NodeId]] = field(default_factory=dict)


def merge_choice(
    net_a: Network, net_b: Network, config: ChoiceMergeConfig | None = None
) -> Network:
    """Merge two functionally equivalent networks into one choice network.

    Both inputs must expose identical PI/PO/latch interfaces.  Structurally
    shared nodes are hashed together; the remaining functionally equivalent
    (or complementary) pairs are proven -- exhaustively when the joint input
    support is small, by a SAT query otherwise -- and linked into choice
    classes whose representative carries all fanouts.
    """
    cfg = config or ChoiceMergeConfig()
    if len(net_a.pis) != len(net_b.pis) or len(net_a.pos) != len(net_b.pos):
        raise InterfaceMismatch(
            f"PI/PO arity differs: {len(net_a.pis)}/{len(net_a.pos)} vs "
            f"{len(net_b.pis)}/{len(net_b.pos)}"
        )
    if len(net_a.latches) != len(net_b.latches):
        raise InterfaceMismatch("latch counts differ")

    merged = Network()
    n_inputs = len(net_a.comb_inputs())
    rng = random.Random(cfg.seed)
    width = cfg.n_random_vectors
    st = _MergeState(net=merged, width=width, full_mask=(1 << width) - 1)

    def register(n: NodeId, sim: int, support: int) -> None:
        while len(st.sims) <= n:
            st.sims.append(0)
            st.supports.append(0)
        st.sims[n] = sim
        st.supports[n] = support
        key = min(sim, sim ^ st.full_mask)
        st.by_sig.setdefault(key, []).append(n)

    register(CONST0, 0, 0)
    input_sims: dict[NodeId, int] = {}
    for i in range(len(net_a.pis)):
        p = merged.add_pi()
        input_sims[p] = rng.getrandbits(width)
        register(p, input_sims[p], 1 << i)
    for i in range(len(net_a.latches)):
        p = merged.add_latch()
        input_sims[p] = rng.getrandbits(width)
        register(p, input_sims[p], 1 << (len(net_a.pis) + i))

    def copy_network(src: Network, link: bool) -> dict[NodeId, Edge]:
        emap: dict[NodeId, Edge] = {CONST0: FALSE_EDGE}
        src_inputs = src.comb_inputs()
        for i, n in enumerate(src_inputs):
            emap[n] = Edge(merged.comb_inputs()[i], False)
        for n in topo_order(src):
            if not src.is_and(n):
                continue
            f0, f1 = src.fanins(n)
            e0 = _map_edge(emap[f0.target], f0.compl)
            e1 = _map_edge(emap[f1.target], f1.compl)
            e0 = resolve_edge(merged, e0)
            e1 = resolve_edge(merged, e1)
            before = len(merged)
            out = merged.add_and_hashed(e0, e1)
            emap[n] = out
            if len(merged) == before:
                continue  # folded or hashed into an existing node
            m = out.target
            sim = _and_sim(st, e0, e1)
            support = st.supports[e0.target] | st.supports[e1.target]
            register(m, sim, support)
            if link:
                _try_link(st, m, cfg, n_inputs, input_sims)
        return emap

    amap = copy_network(net_a, link=False)
    bmap = copy_network(net_b, link=True)

    for ea in net_a.pos:
        merged.add_po(_map_edge(amap[ea.target], ea.compl))
    for i, (_, ea) in enumerate(net_a.latches):
        merged.set_latch_next(i, _map_edge(amap[ea.target], ea.compl))

    # verify the PO pairing; the merged network keeps net_a's outputs
    for i, (ea, eb) in enumerate(zip(net_a.comb_outputs(), net_b.comb_outputs())):
        edge_a = resolve_edge(merged, _map_edge(amap[ea.target], ea.compl))
        edge_b = resolve_edge(merged, _map_edge(bmap[eb.target], eb.compl))
        want = edge_a.compl ^ edge_b.compl
        try:
            verdict = _prove_pair(st, edge_a.target, edge_b.target, cfg, n_inputs, input_sims)
        except BudgetExhausted:
            raise BudgetExhausted(f"could not prove output pair {i} within budget")
        if verdict is None or verdict != want:
            raise OutputMismatch(f"output {i} differs between the merged networks")
    return merged


def _map_edge(e: Edge, extra_compl: bool) -> Edge:
    return Edge(e.target, e.compl ^ extra_compl)


def _and_sim(st: _MergeState, e0: Edge, e1: Edge) -> int:
    a = st.sims[e0.target] ^ (st.full_mask if e0.compl else 0)
    b = st.sims[e1.target] ^ (st.full_mask if e1.compl else 0)
    return a & b


def _try_link(st, m: NodeId, cfg, n_inputs: int, input_sims) -> None:
    sim = st.sims[m]
    key = min(sim, sim ^ st.full_mask)
    for cand in st.by_sig.get(key, []):
        if cand == m or cand == CONST0:
            continue
        if st.net.is_choice_member(cand):
            continue
        try:
            verdict = _prove_pair(st, cand, m, cfg, n_inputs, input_sims)
        except BudgetExhausted:
            continue
        if verdict is None:
            continue
        if _link_would_cycle(st.net, cand, m):
            continue
        st.net.link_choice(cand, m, verdict)
        return


def _prove_pair(st, a: NodeId, b: NodeId, cfg, n_inputs: int, input_sims):
    """Return False for equivalent, True for complementary, None for neither.

    a and b are nodes of the merged network; equality is decided exhaustively
    over the joint support when it is small enough, by SAT otherwise.
    Raises BudgetExhausted when the SAT query gives up.
    """
    from . import satcore, simulate

    if a == b:
        return False
    sim_a, sim_b = st.sims[a], st.sims[b]
    if sim_a != sim_b and sim_a != sim_b ^ st.full_mask:
        return None
    guess_compl = sim_a != sim_b
    support = st.supports[a] | st.supports[b]
    n_sup = bin(support).count("1")
    if n_sup <= cfg.exhaustive_support_bound:
        sup_vars = [i for i in range(n_inputs) if support >> i & 1]
        positions = {v: j for j, v in enumerate(sup_vars)}
        patterns = simulate.input_patterns(len(sup_vars))
        pi_ints = {}
        for i, node in enumerate(st.net.comb_inputs()):
            j = positions.get(i)
            pi_ints[node] = patterns[j] if j is not None else 0
        width = 1 << len(sup_vars)
        vals = simulate.eval_network_ints(
            st.net, pi_ints, width, roots=[a, b], check_choices=False
        )
        full = (1 << width) - 1
        if vals[a] == vals[b]:
            return False
        if vals[a] == vals[b] ^ full:
            return True
        return None
    # SAT query on the pair's cones
    cnf = satcore.CnfFormula()
    lits = _encode_cones(st.net, [a, b], cnf)
    budget = satcore.SolveBudget(max_conflicts=cfg.sat_conflicts, max_seconds=cfg.sat_seconds)
    x = cnf.add_xor(lits[a], -lits[b] if guess_compl else lits[b])
    cnf.add_clause([x])
    res = satcore.solve(cnf, budget)
    if res.status == "unsat":
        return guess_compl
    if res.status == "unknown":
        raise BudgetExhausted(res.reason or "pair proof budget exhausted")
    return None


def _encode_cones(net: Network, roots, cnf) -> dict[NodeId, int]:
    """Tseitin-encode the fanin cones of `roots` over shared node variables."""
    needed: set[NodeId] = set()
    stack = list(roots)
    while stack:
        n = stack.pop()
        if n in needed:
            continue
        needed.add(n)
        if net.is_and(n):
            for e in net.fanins(n):
                stack.append(e.target)
    varmap: dict[NodeId, int] = {}
    for n in topo_order(net):
        if n not in needed:
            continue
        if not net.is_and(n):
            v = cnf.fresh_var()
            varmap[n] = v
            if n == CONST0:
                cnf.add_clause([-v])
            continue
        e0, e1 = net.fanins(n)
        a = varmap[e0.target] * (-1 if e0.compl else 1)
        b = varmap[e1.target] * (-1 if e1.compl else 1)
        varmap[n] = cnf.add_and2(a, b)
    return varmap


def _link_would_cycle(net: Network, repr_node: NodeId, member: NodeId) -> bool:
    """Would 'repr depends on member' close a loop in the augmented order?"""
    target = repr_node
    seen: set[NodeId] = set()
    stack = [member]
    while stack:
        n = stack.pop()
        if n == target:
            return True
        if n in seen:
            continue
        seen.add(n)
        if net.is_and(n):
            for e in net.fanins(n):
                stack.append(e.target)
        rec = net.choice.get(n)
        if rec is not None and rec.repr_node is None:
            stack.extend(net.class_members(n))
    return False
