"""k-LUT technology mapping for and-inverter graphs with block-level
equivalence checking, a miter baseline, and a simulation oracle."""

from .cuts import Cut, CutSet, enumerate_cuts, merge_cutsets, sort_priority
from .equiv import (
    EcReport,
    build_miter,
    check_miter,
    checking_logic_block,
    collect_covered_choice,
    collect_covered_regular,
    mec_verify,
    mec_verify_sequential,
)
from .mapper import (
    Block,
    CorrespondingPair,
    CorrespondingPairSet,
    MapConfig,
    MappedNetwork,
    Ref,
    area_recovery,
    check_cover,
    depth_oriented_mapping,
    derive_final_mapping,
    map_network,
    topologize_cps,
)
from .netgraph import (
    ChoiceMergeConfig,
    Edge,
    Network,
    collect_fanin_cone,
    merge_choice,
    representative,
    topo_order,
)
from .satcore import CnfFormula, SatVerdict, SolveBudget, solve
from .simulate import SimVerdict, eval, exhaustive_equiv

__version__ = "0.1.0"
