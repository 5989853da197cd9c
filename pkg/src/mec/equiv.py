"""Equivalence checking of a mapping against its source network.

Two routes are provided.  The fine-grained route walks the ordered
(source node, block) pairs and proves each LUT equivalent to the cone it
covers with a small, fresh SAT instance per block; the first failing block
yields a leaf-local counterexample.  The baseline route builds one miter
over both whole designs and solves it in a single SAT call.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .cuts import Cut
from .errors import (
    BudgetExhausted,
    InterfaceMismatch,
    MappingMismatch,
    NotACut,
    RegisterMismatch,
    RootUnreached,
)
from .mapper import (
    CorrespondingPair,
    CorrespondingPairSet,
    MappedNetwork,
    og_node_of_ref,
    topologize_cps,
)
from .netgraph import (
    CONST0,
    Network,
    NodeId,
    collect_cover_forward,
    collect_fanin_cone,
    prune_cover_steps,
    resolve_edge,
    topo_order,
    topo_positions,
)
from .satcore import CnfFormula, SatVerdict, SolveBudget, solve


@dataclass
class EcReport:
    verdict: str  # 'equivalent' | 'non_equivalent' | 'unknown'
    method: str  # 'mec' | 'miter'
    failing_pair: Optional[CorrespondingPair] = None
    cex: Optional[dict[int, bool]] = None
    cex_kind: str = ""  # 'leaf_local' (og node ids) or 'primary_input' (input indices)
    blocks_checked: int = 0
    per_block_times: list[float] = field(default_factory=list)
    reason: Optional[str] = None
    total_seconds: float = 0.0

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}", f"method: {self.method}"]
        if self.method == "mec":
            lines.append(f"blocks checked: {self.blocks_checked}")
        if self.failing_pair is not None:
            lines.append(
                f"failing pair: fn={self.failing_pair.fn} sn={self.failing_pair.sn}"
            )
        if self.cex is not None:
            asg = " ".join(f"{k}={int(v)}" for k, v in sorted(self.cex.items()))
            lines.append(f"counterexample ({self.cex_kind}): {asg}")
        if self.reason:
            lines.append(f"reason: {self.reason}")
        lines.append(f"time: {self.total_seconds:.4f} s")
        return "\n".join(lines)

    def to_machine(self) -> str:
        """Stable key=value serialization; timings are deliberately omitted."""
        items = [("verdict", self.verdict), ("method", self.method)]
        items.append(("blocks_checked", str(self.blocks_checked)))
        if self.failing_pair is not None:
            items.append(("failing_fn", str(self.failing_pair.fn)))
            items.append(("failing_sn", str(self.failing_pair.sn)))
        if self.cex is not None:
            items.append(("cex_kind", self.cex_kind))
            items.append(
                ("cex", ",".join(f"{k}:{int(v)}" for k, v in sorted(self.cex.items())))
            )
        if self.reason:
            items.append(("reason", self.reason))
        return "\n".join(f"{k}={v}" for k, v in items)


Design = Union[Network, MappedNetwork]


# -- miter construction -----------------------------------------------------


def _encode_network(
    net: Network, cnf: CnfFormula, input_vars: list[int]
) -> list[int]:
    """Tseitin-encode the output cones of a network over shared input vars.

    Returns one literal per combinational output.  Only the representative
    structure reachable from the outputs is encoded.
    """
    inputs = net.comb_inputs()
    varmap: dict[NodeId, int] = {n: v for n, v in zip(inputs, input_vars)}
    out_edges = [resolve_edge(net, e) for e in net.comb_outputs()]
    needed: set[NodeId] = set()
    stack = [e.target for e in out_edges]
    while stack:
        n = stack.pop()
        if n in needed:
            continue
        needed.add(n)
        if net.is_and(n):
            stack.extend(resolve_edge(net, e).target for e in net.fanins(n))
    const_var = None
    if CONST0 in needed:
        const_var = cnf.fresh_var()
        cnf.add_clause([-const_var])
        varmap[CONST0] = const_var
    for n in topo_order(net):
        if n not in needed or not net.is_and(n):
            continue
        e0, e1 = (resolve_edge(net, e) for e in net.fanins(n))
        a = varmap[e0.target] * (-1 if e0.compl else 1)
        b = varmap[e1.target] * (-1 if e1.compl else 1)
        varmap[n] = cnf.add_and2(a, b)
    return [varmap[e.target] * (-1 if e.compl else 1) for e in out_edges]


def _encode_mapped(
    mg: MappedNetwork, cnf: CnfFormula, input_vars: list[int]
) -> list[int]:
    """Truth-table-encode each block of a LUT netlist over shared input vars."""
    const_var = None

    def get_const() -> int:
        nonlocal const_var
        if const_var is None:
            const_var = cnf.fresh_var()
            cnf.add_clause([-const_var])
        return const_var

    block_vars: list[int] = []
    for blk in mg.blocks:
        leaf_lits = []
        for r in blk.leaves:
            if r.kind == "pi":
                leaf_lits.append(input_vars[r.index])
            elif r.kind == "block":
                leaf_lits.append(block_vars[r.index])
            else:
                leaf_lits.append(get_const())
        block_vars.append(cnf.add_tt_constraint(blk.tt, leaf_lits))
    outs = []
    for ref, compl in mg.comb_outputs():
        if ref.kind == "pi":
            lit = input_vars[ref.index]
        elif ref.kind == "block":
            lit = block_vars[ref.index]
        else:
            lit = get_const()
        outs.append(-lit if compl else lit)
    return outs


def _design_arity(design: Design) -> tuple[int, int]:
    if isinstance(design, Network):
        return len(design.comb_inputs()), len(design.comb_outputs())
    return design.n_inputs(), len(design.comb_outputs())


def build_miter(f: Design, g: Design) -> tuple[CnfFormula, int, list[int]]:
    """CNF of both designs over shared inputs, XOR per output, one big OR.

    Returns (formula, output literal, input variables); asserting the output
    literal makes the formula satisfiable exactly when some input assignment
    drives corresponding outputs apart.
    """
    if _design_arity(f) != _design_arity(g):
        raise InterfaceMismatch(
            f"miter interfaces differ: {_design_arity(f)} vs {_design_arity(g)}"
        )
    cnf = CnfFormula()
    n_in, _ = _design_arity(f)
    input_vars = [cnf.fresh_var() for _ in range(n_in)]
    outs_f = (
        _encode_network(f, cnf, input_vars)
        if isinstance(f, Network)
        else _encode_mapped(f, cnf, input_vars)
    )
    outs_g = (
        _encode_network(g, cnf, input_vars)
        if isinstance(g, Network)
        else _encode_mapped(g, cnf, input_vars)
    )
    xors = [cnf.add_xor(a, b) for a, b in zip(outs_f, outs_g)]
    out = cnf.add_or(xors)
    return cnf, out, input_vars


def check_miter(
    f: Design, g: Design, budget: Optional[SolveBudget] = None
) -> EcReport:
    """Baseline whole-design check: equivalent iff the miter is UNSAT."""
    t0 = time.perf_counter()
    cnf, out, input_vars = build_miter(f, g)
    cnf.add_clause([out])
    res = solve(cnf, budget or SolveBudget())
    elapsed = time.perf_counter() - t0
    if res.status == "unsat":
        return EcReport("equivalent", "miter", total_seconds=elapsed)
    if res.status == "sat":
        cex = {i: res.model[v] for i, v in enumerate(input_vars)}
        return EcReport(
            "non_equivalent",
            "miter",
            cex=cex,
            cex_kind="primary_input",
            total_seconds=elapsed,
        )
    return EcReport("unknown", "miter", reason=res.reason, total_seconds=elapsed)


# -- covered-cone collection ------------------------------------------------


def collect_covered_regular(og: Network, fn: NodeId, leaves) -> list[NodeId]:
    """Exact covered cone by backward traversal from fn to the leaves."""
    cone = collect_fanin_cone(og, fn, set(leaves))
    pos = topo_positions(og)
    return sorted(cone, key=pos.get)


def collect_covered_choice(og: Network, fn: NodeId, leaves) -> list[NodeId]:
    """Candidate covered set by a forward sweep from the leaves toward fn.

    Gathers every node at or below fn whose fanins are already gathered or
    leaves, following choice links from gathered members to their
    representative.  The result may contain redundant nodes; the block
    verdict is unaffected.  Raises RootUnreached if fn is never gathered.
    """
    return [s[1] for s in collect_cover_forward(og, fn, leaves)]


# -- block-level checking ---------------------------------------------------


def block_cover_steps(og: Network, fn: NodeId, leaf_nodes) -> list:
    """Cover steps for one block: backward cone on regular networks,
    forward sweep on choice networks."""
    if og.has_choices():
        return collect_cover_forward(og, fn, leaf_nodes)
    leaves = set(leaf_nodes)
    return [("and", n) for n in collect_covered_regular(og, fn, leaf_nodes) if n not in leaves]


def _emit_cover_steps(
    og: Network,
    fn: NodeId,
    steps,
    leaf_vars: dict[NodeId, int],
    cnf: CnfFormula,
) -> int:
    """Add CNF constraints realizing the cover steps; returns fn's variable.

    An "and" step becomes a Tseitin AND over its fanin literals; an "alias"
    step ties a node to its choice sibling with equality or inverter
    clauses.
    """
    varmap: dict[NodeId, int] = dict(leaf_vars)

    def var_of(n: NodeId) -> int:
        v = varmap.get(n)
        if v is None:
            if n != CONST0:
                raise NotACut(f"covered node depends on unconstrained node {n}")
            v = cnf.fresh_var()
            cnf.add_clause([-v])
            varmap[n] = v
        return v

    for step in steps:
        n = step[1]
        if n in varmap:
            continue
        if step[0] == "and":
            e0, e1 = og.fanins(n)
            a = var_of(e0.target) * (-1 if e0.compl else 1)
            b = var_of(e1.target) * (-1 if e1.compl else 1)
            varmap[n] = cnf.add_and2(a, b)
        else:
            _, _, sibling, compl = step
            linked = var_of(sibling)
            v = cnf.fresh_var()
            if compl:
                cnf.add_clause([v, linked])
                cnf.add_clause([-v, -linked])
            else:
                cnf.add_clause([v, -linked])
                cnf.add_clause([-v, linked])
            varmap[n] = v
    if fn not in varmap:
        raise RootUnreached(f"root {fn} not constrained")
    return varmap[fn]


def checking_logic_block(
    np: CorrespondingPair,
    og: Network,
    mg: MappedNetwork,
    budget: Optional[SolveBudget] = None,
    cover_mode: str = "auto",
) -> tuple[bool, Optional[dict[int, bool]]]:
    """Prove one block equivalent to its covered cone with a fresh solver.

    The block side becomes a truth-table constraint over shared leaf
    variables; the covered side is Tseitin over the cone (collected backward
    for regular networks, forward for choice networks, or from the recorded
    member root in 'exact' mode).  Returns (equivalent, leaf counterexample).
    Raises BudgetExhausted if the solver gives up.
    """
    blk = mg.blocks[np.sn]
    fn = np.fn
    cnf = CnfFormula()
    leaf_nodes = [og_node_of_ref(og, mg, r) for r in blk.leaves]
    leaf_vars: dict[NodeId, int] = {}
    leaf_lits = []
    for l in leaf_nodes:
        if l not in leaf_vars:
            leaf_vars[l] = cnf.fresh_var()
        leaf_lits.append(leaf_vars[l])
    v1 = cnf.add_tt_constraint(blk.tt, leaf_lits)

    mode = cover_mode
    if mode == "auto":
        mode = "choice" if og.has_choices() else "regular"
    if mode == "regular":
        nodes = collect_covered_regular(og, fn, leaf_nodes)
        steps = [("and", n) for n in nodes if n not in leaf_vars]
    elif mode == "choice":
        steps = collect_cover_forward(og, fn, leaf_nodes)
    elif mode == "exact":
        forward = collect_cover_forward(og, fn, leaf_nodes)
        steps = prune_cover_steps(og, forward, fn, leaf_nodes)
    else:
        raise ValueError(f"unknown cover mode {cover_mode!r}")
    v2 = _emit_cover_steps(og, fn, steps, leaf_vars, cnf)

    x = cnf.add_xor(v1, v2)
    cnf.add_clause([x])
    res = solve(cnf, budget or SolveBudget())
    if res.status == "unsat":
        return True, None
    if res.status == "sat":
        cex = {l: res.model[v] for l, v in leaf_vars.items()}
        return False, cex
    raise BudgetExhausted(res.reason or "block check budget exhausted")


def _validate_correspondence(og: Network, mg: MappedNetwork) -> None:
    og_outs = [resolve_edge(og, e) for e in og.comb_outputs()]
    mg_outs = mg.comb_outputs()
    if len(og_outs) != len(mg_outs):
        raise InterfaceMismatch(
            f"output counts differ: {len(og_outs)} vs {len(mg_outs)}"
        )
    if len(og.comb_inputs()) != mg.n_inputs():
        raise InterfaceMismatch(
            f"input counts differ: {len(og.comb_inputs())} vs {mg.n_inputs()}"
        )
    inputs = og.comb_inputs()
    for i, (oe, (ref, compl)) in enumerate(zip(og_outs, mg_outs)):
        src = og_node_of_ref(og, mg, ref)
        if src != oe.target or compl != oe.compl:
            raise MappingMismatch(
                f"output {i} binds to node {src} (compl={compl}), "
                f"expected node {oe.target} (compl={oe.compl})"
            )
    srcs = mg.block_by_src()
    for idx, blk in enumerate(mg.blocks):
        if blk.src in srcs and srcs[blk.src] != idx:
            raise MappingMismatch(f"duplicate blocks for node {blk.src}")
        if not og.is_and(blk.src):
            raise MappingMismatch(f"block {idx} roots non-AND node {blk.src}")


def mec_verify(
    og: Network,
    mg: MappedNetwork,
    cps: Optional[CorrespondingPairSet] = None,
    budget: Optional[SolveBudget] = None,
    cover_mode: str = "auto",
) -> EcReport:
    """Fine-grained verification: check blocks in topological order.

    Stops at the first failing block, reporting that pair and its leaf-local
    counterexample.  Unknown blocks make the whole verdict unknown; nothing
    is ever downgraded to equivalent.
    """
    t0 = time.perf_counter()
    _validate_correspondence(og, mg)
    if cps is None:
        cps = CorrespondingPairSet(
            [CorrespondingPair(blk.src, i) for i, blk in enumerate(mg.blocks)]
        )
    for p in cps:
        if mg.blocks[p.sn].src != p.fn:
            raise MappingMismatch(f"pair {p} does not match block source")
    ordered = topologize_cps(cps, og)
    times: list[float] = []
    for i, pair in enumerate(ordered.pairs):
        tb = time.perf_counter()
        if pair.fn == CONST0:
            times.append(time.perf_counter() - tb)
            continue  # constant pairs hold trivially
        try:
            ok, cex = checking_logic_block(pair, og, mg, budget, cover_mode)
        except BudgetExhausted as e:
            times.append(time.perf_counter() - tb)
            return EcReport(
                "unknown",
                "mec",
                blocks_checked=i + 1,
                per_block_times=times,
                reason=str(e),
                total_seconds=time.perf_counter() - t0,
            )
        times.append(time.perf_counter() - tb)
        if not ok:
            return EcReport(
                "non_equivalent",
                "mec",
                failing_pair=pair,
                cex=cex,
                cex_kind="leaf_local",
                blocks_checked=i + 1,
                per_block_times=times,
                total_seconds=time.perf_counter() - t0,
            )
    return EcReport(
        "equivalent",
        "mec",
        blocks_checked=len(ordered.pairs),
        per_block_times=times,
        total_seconds=time.perf_counter() - t0,
    )


def mec_verify_sequential(
    og: Network,
    mg: MappedNetwork,
    cps: Optional[CorrespondingPairSet] = None,
    budget: Optional[SolveBudget] = None,
) -> EcReport:
    """Sequential designs: registers stay put, so check the combinational core
    with latch outputs as inputs and latch inputs as outputs."""
    if len(og.latches) != mg.n_latches:
        raise RegisterMismatch(
            f"latch counts differ: {len(og.latches)} vs {mg.n_latches}"
        )
    return mec_verify(og, mg, cps, budget)
