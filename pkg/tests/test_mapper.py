import itertools
import random

import pytest

from genutil import gen_choice_network, gen_random_aig
from mec import simulate
from mec.cuts import enumerate_cuts
from mec.errors import TrivialRepresentative
from mec.mapper import (
    CorrespondingPair,
    CorrespondingPairSet,
    MapConfig,
    area_recovery,
    check_cover,
    depth_oriented_mapping,
    derive_final_mapping,
    lut_count,
    map_network,
    mapped_depth,
    topologize_cps,
)
from mec.netgraph import Edge, Network, topo_order
from tests_cut_oracle import min_depth_oracle


def and_net():
    net = Network()
    a, b = net.add_pi(), net.add_pi()
    c = net.add_and(Edge(a), Edge(b))
    net.add_po(Edge(c))
    return net, a, b, c


class TestDepthOrientedMapping:
    def test_single_and(self):
        net, a, b, c = and_net()
        cm = enumerate_cuts(net, 2, 8)
        sel = depth_oriented_mapping(net, cm)
        assert sel[c].leaves == (a, b)
        assert sel[c].depth == 1

    def test_balanced_tree_k4(self):
        net = Network()
        a, b, c, d = (net.add_pi() for _ in range(4))
        ab = net.add_and(Edge(a), Edge(b))
        cd = net.add_and(Edge(c), Edge(d))
        f = net.add_and(Edge(ab), Edge(cd))
        net.add_po(Edge(f))
        cm = enumerate_cuts(net, 4, 8)
        sel = depth_oriented_mapping(net, cm)
        assert sel[f].leaves == (a, b, c, d)
        assert mapped_depth(net, sel) == 1 == min_depth_oracle(net, 4)

    def test_chain_depth_below_gate_depth(self):
        net = Network()
        pis = [net.add_pi() for _ in range(7)]
        e = Edge(pis[0])
        first = None
        for p in pis[1:]:
            n = net.add_and(e, Edge(p))
            if first is None:
                first = n
            e = Edge(n)
        net.add_po(e)
        cm = enumerate_cuts(net, 6, 8)
        sel = depth_oriented_mapping(net, cm)
        assert sel[first].depth == 1
        gate_depth = net.gate_levels()
        assert mapped_depth(net, sel) < gate_depth
        assert mapped_depth(net, sel) == min_depth_oracle(net, 6)

    def test_matches_exhaustive_depth_oracle(self):
        rng = random.Random(31)
        for _ in range(10):
            net = gen_random_aig(rng, rng.randint(2, 4), rng.randint(2, 10), 1)
            if len(net) > 15:
                continue
            for k in (2, 3, 4):
                cm = enumerate_cuts(net, k, cuts_per_node=64)
                sel = depth_oriented_mapping(net, cm)
                assert mapped_depth(net, sel) == min_depth_oracle(net, k)


class TestAreaRecovery:
    def test_rounds_zero_is_identity(self):
        rng = random.Random(32)
        net = gen_random_aig(rng, 5, 40, 2)
        cm = enumerate_cuts(net, 4, 8)
        sel = depth_oriented_mapping(net, cm)
        assert area_recovery(net, cm, sel, 0) == sel

    def test_already_optimal_tree_unchanged(self):
        net = Network()
        a, b, c, d = (net.add_pi() for _ in range(4))
        ab = net.add_and(Edge(a), Edge(b))
        cd = net.add_and(Edge(c), Edge(d))
        f = net.add_and(Edge(ab), Edge(cd))
        net.add_po(Edge(f))
        cm = enumerate_cuts(net, 4, 8)
        sel = depth_oriented_mapping(net, cm)
        sel2 = area_recovery(net, cm, sel, 2)
        assert lut_count(net, sel2) == lut_count(net, sel) == 1
        assert sel2[f].leaves == (a, b, c, d)

    def test_diamond_deduplicates_block(self):
        # reconvergent shared logic: a wider cut absorbs a duplicated block,
        # strictly reducing the LUT count at unchanged depth
        net = Network()
        p1, p2, p3, p4 = (net.add_pi() for _ in range(4))
        n5 = net.add_and(Edge(p1, True), Edge(p3, True))
        n6 = net.add_and(Edge(p2, True), Edge(n5, True))
        net.add_and(Edge(p3), Edge(n6, True))  # dead side branch
        n8 = net.add_and(Edge(p4), Edge(n6, True))
        net.add_po(Edge(n5, True))
        net.add_po(Edge(n8))
        cm = enumerate_cuts(net, 3, 8)
        sel = depth_oriented_mapping(net, cm)
        before = lut_count(net, sel)
        sel2 = area_recovery(net, cm, sel, 2)
        after = lut_count(net, sel2)
        assert mapped_depth(net, sel2) == mapped_depth(net, sel)
        assert (before, after) == (3, 2)

    def test_depth_preserved_and_count_monotone_on_100_networks(self):
        rng = random.Random(33)
        for _ in range(100):
            net = gen_random_aig(rng, rng.randint(3, 10), rng.randint(5, 190), 2)
            k = rng.choice([3, 4, 5, 6])
            cm = enumerate_cuts(net, k, 8)
            sel = depth_oriented_mapping(net, cm)
            sel2 = area_recovery(net, cm, sel, rng.choice([1, 2, 3]))
            assert mapped_depth(net, sel2) == mapped_depth(net, sel)
            assert lut_count(net, sel2) <= lut_count(net, sel)


class TestDeriveFinalMapping:
    def test_identity_buffer_po(self):
        net = Network()
        p = net.add_pi()
        net.add_po(Edge(p, False))
        mg, cps = map_network(net)
        assert mg.blocks == [] and len(cps) == 0
        assert mg.pos[0][0].kind == "pi"

    def test_constant_po_wires_directly(self):
        net = Network()
        net.add_pi()
        net.add_po(Edge(0, True))
        mg, cps = map_network(net)
        assert mg.blocks == []
        assert mg.pos[0][0].kind == "const" and mg.pos[0][1] is True

    def test_and_block_truth_table_convention(self):
        net, a, b, c = and_net()
        mg, cps = map_network(net, MapConfig(k=2))
        assert len(mg.blocks) == 1
        blk = mg.blocks[0]
        # oracle: simulate the cone on all 4 leaf patterns; bit i of the
        # pattern is leaf i's value
        tt = 0
        for p in range(4):
            va = bool(p & 1)
            vb = bool(p >> 1 & 1)
            if va and vb:
                tt |= 1 << p
        assert blk.tt == tt == 0b1000

    def test_cps_discovery_is_reverse_topological(self):
        rng = random.Random(34)
        for _ in range(10):
            net = gen_random_aig(rng, 6, 50, 2)
            mg, cps = map_network(net, MapConfig(k=4))
            pos = {n: i for i, n in enumerate(topo_order(net))}
            fns = [p.fn for p in cps]
            # reverse topological: every fn appears after all users of it
            assert fns == sorted(fns, key=lambda n: -pos[n])
            assert len(cps) == len(mg.blocks)

    def test_trivial_representative_rejected(self):
        net, a, b, c = and_net()
        cm = enumerate_cuts(net, 2, 8)
        sel = {c: cm[c].cuts[-1]}  # the trivial cut
        assert sel[c].trivial
        with pytest.raises(TrivialRepresentative):
            derive_final_mapping(net, sel)

    def test_mapping_simulates_identically_on_1000_vectors(self):
        rng = random.Random(35)
        for _ in range(10):
            net = gen_random_aig(rng, rng.randint(4, 10), rng.randint(10, 150), 3)
            mg, _ = map_network(net, MapConfig(k=rng.choice([4, 5, 6])))
            v = simulate.random_equiv(net, mg, 1000, seed=rng.randrange(1 << 30))
            assert v.status == "equivalent"


class TestTopologizeCps:
    def test_single_pair_unchanged(self):
        net, a, b, c = and_net()
        mg, cps = map_network(net, MapConfig(k=2))
        assert topologize_cps(cps, net).pairs == cps.pairs

    def test_reverse_discovery_becomes_ascending(self):
        rng = random.Random(36)
        net = gen_random_aig(rng, 6, 60, 2)
        mg, cps = map_network(net, MapConfig(k=4))
        ordered = topologize_cps(cps, net)
        pos = {n: i for i, n in enumerate(topo_order(net))}
        fns = [p.fn for p in ordered.pairs]
        assert fns == sorted(fns, key=pos.get)
        assert sorted(ordered.pairs) == sorted(cps.pairs)
        # every fanin-side used node of a pair precedes it
        srcs = {p.fn: i for i, p in enumerate(ordered.pairs)}
        for i, p in enumerate(ordered.pairs):
            blk = mg.blocks[p.sn]
            for r in blk.leaves:
                if r.kind == "block":
                    leaf_fn = mg.blocks[r.index].src
                    assert srcs[leaf_fn] < i

    def test_stability_for_independent_cones(self):
        net = Network()
        a, b, c, d = (net.add_pi() for _ in range(4))
        n1 = net.add_and(Edge(a), Edge(b))
        n2 = net.add_and(Edge(c), Edge(d))
        net.add_po(Edge(n1))
        net.add_po(Edge(n2))
        cps = CorrespondingPairSet(
            [CorrespondingPair(n2, 1), CorrespondingPair(n1, 0)]
        )
        ordered = topologize_cps(cps, net)
        # ascending topological position; n1 precedes n2 in the node array
        assert [p.fn for p in ordered.pairs] == [n1, n2]
        cps2 = CorrespondingPairSet(
            [CorrespondingPair(n1, 0), CorrespondingPair(n2, 1)]
        )
        assert [p.fn for p in topologize_cps(cps2, net).pairs] == [n1, n2]


class TestCoverProperty:
    def test_cover_on_random_mappings(self):
        rng = random.Random(37)
        for _ in range(25):
            net = gen_random_aig(rng, rng.randint(3, 9), rng.randint(5, 120), 2)
            mg, _ = map_network(net, MapConfig(k=rng.choice([3, 4, 6])))
            check_cover(net, mg)  # must not raise

    def test_cover_on_choice_mappings(self):
        rng = random.Random(38)
        for _ in range(10):
            cg = gen_choice_network(rng, rng.randint(4, 7), rng.randint(10, 60), 2)
            mg, _ = map_network(cg, MapConfig(k=4))
            check_cover(cg, mg)
