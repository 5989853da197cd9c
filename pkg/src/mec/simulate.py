"""Bit-parallel simulation of networks and LUT netlists.

Vectors are packed into Python integers, one bit per input pattern, so a
single pass evaluates hundreds of patterns (or the full 2^n space) at once.
Serves as the independent oracle the SAT-based checkers are validated
against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ChoiceViolation, InterfaceMismatch
from .netgraph import CONST0, Network, NodeId, topo_order

SimVector = Sequence[bool]


def input_patterns(n: int) -> list[int]:
    """Exhaustive stimulus: pattern p asserts input i iff bit i of p is set.

    Returns one 2^n-bit integer per input; bit p of integer i is input i's
    value under pattern p.
    """
    masks = []
    total = 1 << n
    for i in range(n):
        block = 1 << i
        unit = ((1 << block) - 1) << block  # `block` zeros then `block` ones
        step = 2 * block
        val = 0
        for start in range(0, total, step):
            val |= unit << start
        masks.append(val)
    return masks


def eval_network_ints(
    net: Network,
    pi_ints,
    width: int,
    roots: Optional[Sequence[NodeId]] = None,
    check_choices: bool = True,
) -> dict[NodeId, int]:
    """Evaluate AND nodes over packed vectors; returns node -> value int.

    `pi_ints` maps each combinational input node to its packed stimulus
    (a list in input order also works).  With `roots` given, only the
    transitive fanin of those nodes is evaluated.  Choice members are
    evaluated independently and checked against their representative.
    """
    full = (1 << width) - 1
    values: dict[NodeId, int] = {CONST0: 0}
    inputs = net.comb_inputs()
    if not isinstance(pi_ints, dict):
        pi_ints = {n: v for n, v in zip(inputs, pi_ints)}
    for n in inputs:
        values[n] = pi_ints.get(n, 0) & full

    if roots is None:
        needed = None
    else:
        needed = set()
        stack = list(roots)
        while stack:
            n = stack.pop()
            if n in needed:
                continue
            needed.add(n)
            if net.is_and(n):
                stack.extend(e.target for e in net.fanins(n))

    for n in topo_order(net):
        if not net.is_and(n) or (needed is not None and n not in needed):
            continue
        e0, e1 = net.fanins(n)
        a = values[e0.target] ^ (full if e0.compl else 0)
        b = values[e1.target] ^ (full if e1.compl else 0)
        values[n] = a & b

    if check_choices and net.has_choices():
        for n, rec in net.choice.items():
            if rec.repr_node is None or n not in values or rec.repr_node not in values:
                continue
            expect = values[rec.repr_node] ^ (full if rec.compl_to_repr else 0)
            if values[n] != expect:
                raise ChoiceViolation(
                    f"choice node {n} disagrees with representative {rec.repr_node}"
                )
    return values


def eval_mapped_ints(mg, pi_ints: Sequence[int], width: int) -> tuple[list[int], list[int]]:
    """Evaluate a LUT netlist over packed vectors; returns (po, block) values."""
    full = (1 << width) - 1
    block_vals: list[int] = []

    def ref_value(ref) -> int:
        if ref.kind == "pi":
            return pi_ints[ref.index] & full
        if ref.kind == "block":
            return block_vals[ref.index]
        return 0  # const

    for blk in mg.blocks:
        leaf_vals = [ref_value(r) for r in blk.leaves]
        out = 0
        for p in range(1 << len(blk.leaves)):
            if not (blk.tt >> p) & 1:
                continue
            term = full
            for i, lv in enumerate(leaf_vals):
                term &= lv if (p >> i) & 1 else ~lv
                if not term:
                    break
            out |= term
        block_vals.append(out & full)

    po_vals = []
    for ref, compl in mg.comb_outputs():
        v = ref_value(ref)
        po_vals.append((v ^ full) if compl else v)
    return po_vals, block_vals


def _design_arity(design) -> tuple[int, int]:
    if isinstance(design, Network):
        return len(design.comb_inputs()), len(design.comb_outputs())
    return design.n_inputs(), len(design.comb_outputs())


def _design_outputs_ints(design, pi_ints: Sequence[int], width: int) -> list[int]:
    if isinstance(design, Network):
        full = (1 << width) - 1
        values = eval_network_ints(design, list(pi_ints), width)
        return [
            values[e.target] ^ (full if e.compl else 0) for e in design.comb_outputs()
        ]
    po_vals, _ = eval_mapped_ints(design, pi_ints, width)
    return po_vals


def eval(design, v: SimVector) -> list[bool]:
    """Single-vector evaluation; returns one boolean per combinational output."""
    n_in, _ = _design_arity(design)
    if len(v) != n_in:
        raise InterfaceMismatch(f"vector width {len(v)} != {n_in} inputs")
    ints = [1 if bit else 0 for bit in v]
    outs = _design_outputs_ints(design, ints, 1)
    return [bool(o & 1) for o in outs]


@dataclass
class SimVerdict:
    status: str  # "equivalent" | "non_equivalent" | "too_large"
    cex: Optional[list[bool]] = None


def exhaustive_equiv(a, b, max_pis: int = 14) -> SimVerdict:
    """Compare two designs on all input patterns (if few enough inputs)."""
    n_in_a, n_out_a = _design_arity(a)
    n_in_b, n_out_b = _design_arity(b)
    if (n_in_a, n_out_a) != (n_in_b, n_out_b):
        raise InterfaceMismatch(
            f"interfaces differ: {n_in_a}/{n_out_a} vs {n_in_b}/{n_out_b}"
        )
    if n_in_a > max_pis:
        return SimVerdict("too_large")
    width = 1 << n_in_a
    patterns = input_patterns(n_in_a)
    outs_a = _design_outputs_ints(a, patterns, width)
    outs_b = _design_outputs_ints(b, patterns, width)
    for va, vb in zip(outs_a, outs_b):
        diff = va ^ vb
        if diff:
            p = (diff & -diff).bit_length() - 1
            return SimVerdict(
                "non_equivalent", cex=[bool((p >> i) & 1) for i in range(n_in_a)]
            )
    return SimVerdict("equivalent")


def random_equiv(a, b, n_vectors: int, seed: int = 0) -> SimVerdict:
    """Compare two designs on packed random vectors (not a proof)."""
    import random

    n_in_a, _ = _design_arity(a)
    rng = random.Random(seed)
    width = n_vectors
    pi_ints = [rng.getrandbits(width) for _ in range(n_in_a)]
    outs_a = _design_outputs_ints(a, pi_ints, width)
    outs_b = _design_outputs_ints(b, pi_ints, width)
    for va, vb in zip(outs_a, outs_b):
        diff = va ^ vb
        if diff:
            p = (diff & -diff).bit_length() - 1
            return SimVerdict(
                "non_equivalent",
                cex=[bool((pi_ints[i] >> p) & 1) for i in range(n_in_a)],
            )
    return SimVerdict("equivalent")
