import random

import pytest

from genutil import gen_random_aig, restructure
from mec import simulate
from mec.errors import CycleDetected, InterfaceMismatch, NotACut, OutputMismatch
from mec.netgraph import (
    ChoiceMergeConfig,
    Edge,
    Network,
    collect_fanin_cone,
    merge_choice,
    representative,
    topo_order,
)


def single_and():
    net = Network()
    a, b = net.add_pi(), net.add_pi()
    c = net.add_and(Edge(a), Edge(b))
    net.add_po(Edge(c))
    return net, a, b, c


class TestTopoOrder:
    def test_single_and_gate(self):
        net, a, b, c = single_and()
        assert topo_order(net) == [0, a, b, c]

    def test_pis_only_keep_declaration_order(self):
        net = Network()
        pis = [net.add_pi() for _ in range(5)]
        assert topo_order(net) == [0] + pis

    def test_random_dag_fanins_precede_nodes(self):
        rng = random.Random(1)
        net = gen_random_aig(rng, 6, 50, 2)
        order = topo_order(net)
        assert sorted(order) == list(net.nodes())  # permutation
        pos = {n: i for i, n in enumerate(order)}
        for n in net.nodes():
            if net.is_and(n):
                e0, e1 = net.fanins(n)
                assert pos[e0.target] < pos[n]
                assert pos[e1.target] < pos[n]

    def test_cycle_detected(self):
        net = Network()
        a = net.add_pi()
        n1 = net.reserve_and()
        n2 = net.add_and(Edge(a), Edge(n1))
        net.set_fanins(n1, Edge(a), Edge(n2))
        with pytest.raises(CycleDetected):
            topo_order(net)

    def test_choice_members_before_representative(self):
        rng = random.Random(2)
        na = gen_random_aig(rng, 5, 25, 2)
        cg = merge_choice(na, restructure(na, rng))
        pos = {n: i for i, n in enumerate(topo_order(cg))}
        for n, rec in cg.choice.items():
            if rec.repr_node is not None:
                assert pos[n] < pos[rec.repr_node]


class TestCollectFaninCone:
    def test_one_gate(self):
        net, a, b, c = single_and()
        assert collect_fanin_cone(net, c, {a, b}) == {c}

    def test_trivial_cut_is_the_node_itself(self):
        net, a, b, c = single_and()
        for n in (a, b, c):
            assert collect_fanin_cone(net, n, {n}) == {n}

    def test_chain_cone_equals_brute_force_paths(self):
        # 5-node chain; the oracle enumerates PI-to-root paths directly
        net = Network()
        pis = [net.add_pi() for _ in range(6)]
        e = Edge(pis[0])
        internals = []
        for p in pis[1:]:
            n = net.add_and(e, Edge(p))
            internals.append(n)
            e = Edge(n)
        net.add_po(e)
        root = internals[-1]
        leaves = set(pis)

        def paths_to(n, acc, out):
            if n in leaves:
                return
            out.add(n)
            for edge in net.fanins(n):
                paths_to(edge.target, acc, out)

        oracle = set()
        paths_to(root, [], oracle)
        assert collect_fanin_cone(net, root, leaves) == oracle == set(internals)

    def test_not_a_cut(self):
        net, a, b, c = single_and()
        with pytest.raises(NotACut):
            collect_fanin_cone(net, c, {a})


class TestRepresentative:
    def build_pair(self, rng_seed=3):
        rng = random.Random(rng_seed)
        na = gen_random_aig(rng, 5, 30, 2)
        return na, restructure(na, rng)

    def test_plain_node_is_its_own_representative(self):
        net, a, b, c = single_and()
        assert representative(net, c) == (c, False)

    def test_member_resolves_to_repr(self):
        na, nb = self.build_pair()
        cg = merge_choice(na, nb)
        members = [(n, r) for n, r in cg.choice.items() if r.repr_node is not None]
        assert members, "expected at least one choice pair"
        for n, rec in members:
            assert representative(cg, n) == (rec.repr_node, rec.compl_to_repr)
            assert representative(cg, rec.repr_node) == (rec.repr_node, False)

    def test_complement_member(self):
        # xor and xnor-with-inverted-output share a class with compl flag set
        def xor_net(invert_root):
            net = Network()
            x, y = net.add_pi(), net.add_pi()
            n1 = net.add_and(Edge(x), Edge(y, True))
            n2 = net.add_and(Edge(x, True), Edge(y))
            r = net.add_and(Edge(n1, True), Edge(n2, True))  # = ~xor
            net.add_po(Edge(r, True))
            return net

        def xor_other():
            net = Network()
            x, y = net.add_pi(), net.add_pi()
            u1 = net.add_and(Edge(x), Edge(y))
            u2 = net.add_and(Edge(x, True), Edge(y, True))
            r = net.add_and(Edge(u1, True), Edge(u2, True))  # = xor
            net.add_po(Edge(r))
            return net

        cg = merge_choice(xor_net(True), xor_other())
        compl_members = [
            (n, rec) for n, rec in cg.choice.items()
            if rec.repr_node is not None and rec.compl_to_repr
        ]
        assert compl_members, "the two roots are complementary functions"
        # independent confirmation by exhaustive simulation
        patterns = simulate.input_patterns(len(cg.pis))
        vals = simulate.eval_network_ints(cg, patterns, 4)
        full = 0b1111
        for n, rec in compl_members:
            assert vals[n] == vals[rec.repr_node] ^ full


class TestMergeChoice:
    def test_identical_networks_leave_no_choices(self):
        net, *_ = single_and()
        other, *_ = single_and()
        cg = merge_choice(net, other)
        assert not cg.has_choices()
        assert cg.n_ands() == net.n_ands()

    def test_reassociation_links_roots(self):
        na = Network()
        a, b, c = (na.add_pi() for _ in range(3))
        r1 = na.add_and(Edge(b), Edge(c))
        root_a = na.add_and(Edge(a), Edge(r1))
        na.add_po(Edge(root_a))
        nb = Network()
        a2, b2, c2 = (nb.add_pi() for _ in range(3))
        r2 = nb.add_and(Edge(a2), Edge(b2))
        root_b = nb.add_and(Edge(r2), Edge(c2))
        nb.add_po(Edge(root_b))
        # oracle: both roots compute the same 8-row truth table
        ta = simulate.eval_network_ints(na, simulate.input_patterns(3), 8)[root_a]
        tb = simulate.eval_network_ints(nb, simulate.input_patterns(3), 8)[root_b]
        assert ta == tb
        cg = merge_choice(na, nb)
        classes = [rec for rec in cg.choice.values() if rec.repr_node is not None]
        assert len(classes) == 1
        assert not classes[0].compl_to_repr

    def test_collapsed_output_matches_original_on_random_vectors(self):
        rng = random.Random(11)
        for seed in range(6):
            na = gen_random_aig(rng, 6, 40, 3)
            cg = merge_choice(na, restructure(na, rng))
            assert simulate.random_equiv(na, cg, 256, seed=seed).status == "equivalent"

    def test_choice_nodes_have_no_regular_fanouts(self):
        rng = random.Random(12)
        na = gen_random_aig(rng, 5, 35, 2)
        cg = merge_choice(na, restructure(na, rng))
        fanouts = cg.fanout_counts()
        for n, rec in cg.choice.items():
            if rec.repr_node is not None:
                assert fanouts[n] == 0

    def test_members_simulate_equal_or_complement(self):
        rng = random.Random(13)
        na = gen_random_aig(rng, 7, 45, 2)
        cg = merge_choice(na, restructure(na, rng))
        n_in = len(cg.comb_inputs())
        width = 1 << n_in
        vals = simulate.eval_network_ints(cg, simulate.input_patterns(n_in), width)
        full = (1 << width) - 1
        for n, rec in cg.choice.items():
            if rec.repr_node is not None:
                expect = vals[rec.repr_node] ^ (full if rec.compl_to_repr else 0)
                assert vals[n] == expect

    def test_output_mismatch_detected(self):
        na, *_ = single_and()
        nb = Network()
        a, b = nb.add_pi(), nb.add_pi()
        c = nb.add_and(Edge(a), Edge(b, True))  # different function
        nb.add_po(Edge(c))
        with pytest.raises(OutputMismatch):
            merge_choice(na, nb)

    def test_interface_mismatch(self):
        na, *_ = single_and()
        nb = Network()
        for _ in range(3):
            nb.add_pi()
        nb.add_po(Edge(nb.pis[0], False))
        with pytest.raises(InterfaceMismatch):
            merge_choice(na, nb)

    def test_sat_proof_path(self):
        # force the exhaustive bound to zero so pairing must go through SAT
        rng = random.Random(14)
        na = gen_random_aig(rng, 6, 30, 2)
        nb = restructure(na, rng)
        cfg = ChoiceMergeConfig(exhaustive_support_bound=0)
        cg = merge_choice(na, nb, cfg)
        assert simulate.exhaustive_equiv(na, cg).status == "equivalent"
        if cg.has_choices():
            n_in = len(cg.comb_inputs())
            width = 1 << n_in
            vals = simulate.eval_network_ints(
                cg, simulate.input_patterns(n_in), width
            )
            full = (1 << width) - 1
            for n, rec in cg.choice.items():
                if rec.repr_node is not None:
                    expect = vals[rec.repr_node] ^ (full if rec.compl_to_repr else 0)
                    assert vals[n] == expect
