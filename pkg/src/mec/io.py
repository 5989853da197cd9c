"""On-disk formats: AIGER in (ASCII and binary), AIGER out (ASCII),
LUT netlists as a BLIF subset, DOT debug dumps, DIMACS CNF export.

BLIF net naming is the round-trip contract: inputs are x<i>, latch outputs
lq<i>, LUT blocks n<src> (src = the source-network node the block maps),
primary outputs po<j> driven through explicit buffer/inverter stubs, latch
inputs li<i> likewise.
"""

from __future__ import annotations

import re
from typing import Iterable, Optional, Union

from .errors import ParseError
from .mapper import Block, CONST_REF, MappedNetwork, Ref
from .netgraph import CONST0, Edge, Network, NodeId, topo_order
from .satcore import CnfFormula

Data = Union[bytes, str]


def _to_bytes(data: Data) -> bytes:
    return data.encode() if isinstance(data, str) else data


# -- AIGER ------------------------------------------------------------------


def read_aiger(data: Data) -> Network:
    """Parse an AIGER file (ASCII 'aag' or binary 'aig') into a Network.

    Latches become (pseudo-input, pseudo-output) pairs; initial values are
    accepted and ignored.
    """
    raw = _to_bytes(data)
    if raw.startswith(b"aag "):
        return _read_aag(raw)
    if raw.startswith(b"aig "):
        return _read_aig_binary(raw)
    raise ParseError("not an AIGER file (expected 'aag' or 'aig' header)", line=1)


def _parse_header(line: bytes, lineno: int) -> tuple[int, int, int, int, int]:
    parts = line.split()
    if len(parts) != 6:
        raise ParseError("malformed AIGER header", line=lineno)
    try:
        m, i, l, o, a = (int(p) for p in parts[1:])
    except ValueError:
        raise ParseError("non-numeric AIGER header field", line=lineno)
    if m < i + l + a:
        raise ParseError(f"header M={m} < I+L+A={i + l + a}", line=lineno)
    return m, i, l, o, a


class _VarMap:
    def __init__(self, max_var: int):
        self.max_var = max_var
        self.node_of: dict[int, NodeId] = {0: CONST0}

    def define(self, lit: int, node: NodeId, lineno: int) -> None:
        if lit & 1:
            raise ParseError(f"literal {lit} must be even here", line=lineno)
        var = lit >> 1
        if var == 0 or var > self.max_var:
            raise ParseError(f"literal {lit} out of range", line=lineno)
        if var in self.node_of:
            raise ParseError(f"variable {var} defined twice", line=lineno)
        self.node_of[var] = node

    def edge(self, lit: int, lineno: int) -> Edge:
        if lit < 0 or lit > 2 * self.max_var + 1:
            raise ParseError(f"literal {lit} out of range", line=lineno)
        var = lit >> 1
        if var not in self.node_of:
            raise ParseError(f"literal {lit} references undefined variable", line=lineno)
        return Edge(self.node_of[var], bool(lit & 1))


def _read_aag(raw: bytes) -> Network:
    lines = raw.decode("ascii", errors="replace").splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    m, i, l, o, a = _parse_header(lines[0].encode(), 1)
    net = Network()
    vm = _VarMap(m)

    def ints(lineno: int, expect: int) -> list[int]:
        if lineno > len(lines):
            raise ParseError("unexpected end of file", line=lineno)
        parts = lines[lineno - 1].split()
        if len(parts) < expect:
            raise ParseError(f"expected {expect} fields", line=lineno)
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise ParseError("non-numeric literal", line=lineno)

    ln = 2
    for _ in range(i):
        (lit,) = ints(ln, 1)[:1]
        vm.define(lit, net.add_pi(), ln)
        ln += 1
    latch_specs = []
    for _ in range(l):
        fields = ints(ln, 2)
        vm.define(fields[0], net.add_latch(), ln)
        latch_specs.append((fields[1], ln))
        ln += 1
    out_specs = []
    for _ in range(o):
        (lit,) = ints(ln, 1)[:1]
        out_specs.append((lit, ln))
        ln += 1
    and_specs = []
    for _ in range(a):
        lhs, rhs0, rhs1 = ints(ln, 3)[:3]
        vm.define(lhs, net.reserve_and(), ln)
        and_specs.append((lhs, rhs0, rhs1, ln))
        ln += 1
    for lhs, rhs0, rhs1, lineno in and_specs:
        n = vm.node_of[lhs >> 1]
        net.set_fanins(n, vm.edge(rhs0, lineno), vm.edge(rhs1, lineno))
    for lit, lineno in out_specs:
        net.add_po(vm.edge(lit, lineno))
    for idx, (lit, lineno) in enumerate(latch_specs):
        net.set_latch_next(idx, vm.edge(lit, lineno))
    topo_order(net)  # validates acyclicity
    return net


def _read_aig_binary(raw: bytes) -> Network:
    nl = raw.find(b"\n")
    if nl < 0:
        raise ParseError("missing header newline", line=1)
    m, i, l, o, a = _parse_header(raw[:nl], 1)
    net = Network()
    vm = _VarMap(m)
    for _ in range(i):
        vm.define(2 * (len(net.pis) + 1), net.add_pi(), 1)
    pos = nl + 1
    lineno = 2
    latch_specs = []
    for idx in range(l):
        end = raw.find(b"\n", pos)
        if end < 0:
            raise ParseError("unexpected end of latch section", line=lineno)
        fields = raw[pos:end].split()
        if not fields:
            raise ParseError("empty latch line", line=lineno)
        node = net.add_latch()
        vm.define(2 * (i + idx + 1), node, lineno)
        try:
            latch_specs.append((int(fields[0]), lineno))
        except ValueError:
            raise ParseError("non-numeric latch literal", line=lineno)
        pos = end + 1
        lineno += 1
    out_specs = []
    for _ in range(o):
        end = raw.find(b"\n", pos)
        if end < 0:
            raise ParseError("unexpected end of output section", line=lineno)
        try:
            out_specs.append((int(raw[pos:end]), lineno))
        except ValueError:
            raise ParseError("non-numeric output literal", line=lineno)
        pos = end + 1
        lineno += 1

    def read_delta(at: int) -> tuple[int, int]:
        x = 0
        shift = 0
        while True:
            if at >= len(raw):
                raise ParseError("truncated delta encoding", offset=at)
            byte = raw[at]
            at += 1
            x |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return x, at
            shift += 7

    for j in range(a):
        lhs = 2 * (i + l + j + 1)
        delta0, pos = read_delta(pos)
        delta1, pos = read_delta(pos)
        rhs0 = lhs - delta0
        rhs1 = rhs0 - delta1
        if rhs0 < 0 or rhs1 < 0:
            raise ParseError(f"negative literal in gate {lhs}", offset=pos)
        node = net.reserve_and()
        vm.define(lhs, node, lineno)
        net.set_fanins(node, vm.edge(rhs0, lineno), vm.edge(rhs1, lineno))
    for lit, ll in out_specs:
        net.add_po(vm.edge(lit, ll))
    for idx, (lit, ll) in enumerate(latch_specs):
        net.set_latch_next(idx, vm.edge(lit, ll))
    topo_order(net)
    return net


def write_aiger(net: Network) -> bytes:
    """Serialize a choice-free network as ASCII AIGER."""
    if net.has_choices():
        raise ValueError("choice networks have no AIGER representation")
    order = [n for n in topo_order(net) if net.is_and(n)]
    var_of: dict[NodeId, int] = {CONST0: 0}
    for idx, n in enumerate(net.pis):
        var_of[n] = idx + 1
    for idx, (out, _) in enumerate(net.latches):
        var_of[out] = len(net.pis) + idx + 1
    base = len(net.pis) + len(net.latches)
    for idx, n in enumerate(order):
        var_of[n] = base + idx + 1

    def lit(e: Edge) -> int:
        return var_of[e.target] * 2 + int(e.compl)

    m = base + len(order)
    out = [f"aag {m} {len(net.pis)} {len(net.latches)} {len(net.pos)} {len(order)}"]
    for n in net.pis:
        out.append(str(var_of[n] * 2))
    for outn, nxt in net.latches:
        out.append(f"{var_of[outn] * 2} {lit(nxt)}")
    for e in net.pos:
        out.append(str(lit(e)))
    for n in order:
        e0, e1 = net.fanins(n)
        l0, l1 = lit(e0), lit(e1)
        if l0 < l1:
            l0, l1 = l1, l0
        out.append(f"{var_of[n] * 2} {l0} {l1}")
    return ("\n".join(out) + "\n").encode()


# -- BLIF -------------------------------------------------------------------


def _ref_net(mg: MappedNetwork, ref: Ref) -> str:
    if ref.kind == "const":
        return "gnd"
    if ref.kind == "pi":
        if ref.index < mg.n_pis:
            return f"x{ref.index}"
        return f"lq{ref.index - mg.n_pis}"
    return f"n{mg.blocks[ref.index].src}"


def write_lut_blif(mg: MappedNetwork, model: str = "mapped") -> str:
    """Emit the LUT netlist; cover rows are exactly the truth-table minterms."""
    lines = [f".model {model}"]
    lines.append(".inputs " + " ".join(f"x{i}" for i in range(mg.n_pis)))
    lines.append(".outputs " + " ".join(f"po{j}" for j in range(len(mg.pos))))
    for i in range(mg.n_latches):
        lines.append(f".latch li{i} lq{i} 0")
    needs_gnd = any(
        r.kind == "const" for blk in mg.blocks for r in blk.leaves
    )
    if needs_gnd:
        lines.append(".names gnd")
    for blk in mg.blocks:
        nets = [_ref_net(mg, r) for r in blk.leaves]
        lines.append(".names " + " ".join(nets) + f" n{blk.src}")
        for p in range(1 << len(blk.leaves)):
            if (blk.tt >> p) & 1:
                row = "".join("1" if (p >> i) & 1 else "0" for i in range(len(blk.leaves)))
                lines.append(f"{row} 1")

    def stub(ref: Ref, compl: bool, out_net: str) -> None:
        if ref.kind == "const":
            lines.append(f".names {out_net}")
            if compl:
                lines.append("1")
        else:
            lines.append(f".names {_ref_net(mg, ref)} {out_net}")
            lines.append("0 1" if compl else "1 1")

    for j, (ref, compl) in enumerate(mg.pos):
        stub(ref, compl, f"po{j}")
    for i, (ref, compl) in enumerate(mg.latch_ins):
        stub(ref, compl, f"li{i}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


_NAME_RE = re.compile(r"^n(\d+)$")


def read_lut_blif(data: Data) -> MappedNetwork:
    """Parse a LUT netlist written by write_lut_blif (subset BLIF)."""
    text = _to_bytes(data).decode("ascii", errors="replace")
    inputs: list[str] = []
    outputs: list[str] = []
    latches: list[tuple[str, str]] = []  # (in_net, out_net)
    names: list[tuple[list[str], str, list[str], int]] = []  # ins, out, rows, line
    current: Optional[tuple[list[str], str, list[str], int]] = None
    lineno = 0
    pending = ""
    for rawline in text.splitlines():
        lineno += 1
        line = rawline.split("#", 1)[0].rstrip()
        if not line:
            continue
        if line.endswith("\\"):
            pending += line[:-1] + " "
            continue
        line = pending + line
        pending = ""
        tokens = line.split()
        cmd = tokens[0]
        if cmd.startswith("."):
            current = None
            if cmd == ".model":
                continue
            if cmd == ".inputs":
                inputs.extend(tokens[1:])
            elif cmd == ".outputs":
                outputs.extend(tokens[1:])
            elif cmd == ".latch":
                if len(tokens) < 3:
                    raise ParseError(".latch needs input and output", line=lineno)
                latches.append((tokens[1], tokens[2]))
            elif cmd == ".names":
                current = (tokens[1:-1], tokens[-1], [], lineno)
                names.append(current)
            elif cmd == ".end":
                break
            else:
                raise ParseError(f"unsupported construct {cmd}", line=lineno)
        else:
            if current is None:
                raise ParseError("cover row outside .names", line=lineno)
            current[2].append(line)
    return _build_mapped(inputs, outputs, latches, names)


def _rows_to_tt(ins: list[str], rows: list[str], lineno: int) -> int:
    n = len(ins)
    tt = 0
    for row in rows:
        parts = row.split()
        if n == 0:
            pattern, value = "", parts[0]
        elif len(parts) == 2:
            pattern, value = parts
        else:
            raise ParseError(f"malformed cover row {row!r}", line=lineno)
        if value != "1":
            raise ParseError("only ON-set covers are supported", line=lineno)
        if len(pattern) != n:
            raise ParseError("cover row width mismatch", line=lineno)
        idxs = [0]
        for i, ch in enumerate(pattern):
            if ch == "1":
                idxs = [p | (1 << i) for p in idxs]
            elif ch == "-":
                idxs = idxs + [p | (1 << i) for p in idxs]
            elif ch != "0":
                raise ParseError(f"bad cover character {ch!r}", line=lineno)
        for p in idxs:
            tt |= 1 << p
    return tt


def _build_mapped(inputs, outputs, latches, names) -> MappedNetwork:
    n_pis = len(inputs)
    mg = MappedNetwork(n_pis=n_pis, n_latches=len(latches))
    input_index = {net: i for i, net in enumerate(inputs)}
    for i, (_, out_net) in enumerate(latches):
        input_index[out_net] = n_pis + i

    out_nets = set(outputs) | {in_net for in_net, _ in latches}
    block_defs: dict[str, tuple[list[str], list[str], int]] = {}
    stub_defs: dict[str, tuple[list[str], list[str], int]] = {}
    const_nets: set[str] = set()
    for ins, out, rows, lineno in names:
        if out in out_nets:
            stub_defs[out] = (ins, rows, lineno)
        elif not ins and not rows:
            const_nets.add(out)
        else:
            if out in block_defs:
                raise ParseError(f"net {out} defined twice", line=lineno)
            block_defs[out] = (ins, rows, lineno)

    # topologically order the blocks
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(net_name: str, lineno: int) -> None:
        stack = [(net_name, None)]
        while stack:
            nm, it = stack.pop()
            if it is None:
                if state.get(nm) == 2:
                    continue
                if state.get(nm) == 1:
                    raise ParseError(f"combinational loop at {nm}", line=lineno)
                state[nm] = 1
                deps = [
                    d
                    for d in block_defs[nm][0]
                    if d in block_defs and state.get(d) != 2
                ]
                stack.append((nm, deps))
                stack.extend((d, None) for d in deps)
            else:
                state[nm] = 2
                order.append(nm)

    for nm in block_defs:
        if state.get(nm) != 2:
            visit(nm, block_defs[nm][2])

    block_index: dict[str, int] = {}

    def ref_of(net_name: str, lineno: int) -> Ref:
        if net_name in input_index:
            return Ref("pi", input_index[net_name])
        if net_name in block_index:
            return Ref("block", block_index[net_name])
        if net_name in const_nets:
            return CONST_REF
        raise ParseError(f"undefined net {net_name}", line=lineno)

    for nm in order:
        ins, rows, lineno = block_defs[nm]
        m = _NAME_RE.match(nm)
        if not m:
            raise ParseError(
                f"block net {nm!r} does not follow the n<src> convention", line=lineno
            )
        refs = [ref_of(x, lineno) for x in ins]
        tt = _rows_to_tt(ins, rows, lineno)
        block_index[nm] = len(mg.blocks)
        mg.blocks.append(Block(leaves=refs, tt=tt, src=int(m.group(1))))

    def stub_to_entry(out_net: str) -> tuple[Ref, bool]:
        if out_net not in stub_defs:
            raise ParseError(f"output net {out_net} is never driven")
        ins, rows, lineno = stub_defs[out_net]
        if not ins:
            return CONST_REF, _rows_to_tt(ins, rows, lineno) == 1
        if len(ins) != 1:
            raise ParseError(
                f"output {out_net} must be driven by a buffer or inverter", line=lineno
            )
        tt = _rows_to_tt(ins, rows, lineno)
        if tt == 0b10:
            compl = False
        elif tt == 0b01:
            compl = True
        else:
            raise ParseError(
                f"output stub for {out_net} is neither buffer nor inverter",
                line=lineno,
            )
        return ref_of(ins[0], lineno), compl

    for out_net in outputs:
        mg.pos.append(stub_to_entry(out_net))
    for in_net, _ in latches:
        mg.latch_ins.append(stub_to_entry(in_net))
    return mg


# -- DOT --------------------------------------------------------------------


def write_dot_block(
    og: Network,
    mg: MappedNetwork,
    pair,
    cex: Optional[dict[int, bool]] = None,
) -> str:
    """Render one checked block: the LUT, its covered cone, choice links,
    and (optionally) the node values under a leaf counterexample."""
    from .equiv import block_cover_steps
    from .mapper import og_node_of_ref

    blk = mg.blocks[pair.sn]
    leaf_nodes = [og_node_of_ref(og, mg, r) for r in blk.leaves]
    steps = block_cover_steps(og, pair.fn, leaf_nodes)

    values: dict[int, int] = {}
    lut_val: Optional[int] = None
    if cex is not None:
        for l in leaf_nodes:
            values[l] = 1 if cex.get(l) else 0
        for step in steps:
            n = step[1]
            if step[0] == "and":
                e0, e1 = og.fanins(n)
                a = values[e0.target] ^ int(e0.compl)
                b = values[e1.target] ^ int(e1.compl)
                values[n] = a & b
            else:
                values[n] = values[step[2]] ^ int(step[3])
        p = sum((values[l] & 1) << i for i, l in enumerate(leaf_nodes))
        lut_val = (blk.tt >> p) & 1

    def label(n: int) -> str:
        base = f"n{n}"
        if n in values:
            base += f"={values[n]}"
        return base

    lines = [f'digraph "block_fn{pair.fn}_sn{pair.sn}" {{', "  rankdir=BT;"]
    shown = set(leaf_nodes) | {s[1] for s in steps}
    for l in dict.fromkeys(leaf_nodes):
        lines.append(f'  n{l} [shape=box, style=filled, fillcolor=lightgrey, label="{label(l)}"];')
    for step in steps:
        n = step[1]
        lines.append(f'  n{n} [shape=ellipse, label="{label(n)}"];')
        if step[0] == "and":
            for e in og.fanins(n):
                style = "dashed" if e.compl else "solid"
                lines.append(f"  n{e.target} -> n{n} [style={style}];")
    # choice links among displayed nodes
    for n in shown:
        rec = og.choice.get(n)
        if rec is not None and rec.repr_node is not None and rec.repr_node in shown:
            style = "dotted" if rec.compl_to_repr else "solid"
            lines.append(
                f"  n{n} -> n{rec.repr_node} [dir=both, style={style}, color=blue];"
            )
    tt_str = format(blk.tt, f"0{1 << len(blk.leaves)}b")[::-1]
    lut_label = f"lut sn{pair.sn}\\ntt={tt_str}"
    if lut_val is not None:
        lut_label += f"\\nout={lut_val}"
    lines.append(f'  lut{pair.sn} [shape=box3d, label="{lut_label}"];')
    for l in dict.fromkeys(leaf_nodes):
        lines.append(f"  n{l} -> lut{pair.sn} [color=darkgreen];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- DIMACS -----------------------------------------------------------------


def write_dimacs(cnf: CnfFormula) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"
