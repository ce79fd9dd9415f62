"""Reachable simulation preorders and partitions on labeled transition systems.

The library computes the principals of the simulation preorder and the
blocks of the simulation partition that touch the reachable states, by
interleaving reachability and refinement rather than computing either side
whole.  Three engines share the data model: an explicit per-state engine, a
partition-precise variant with frontier expansion, and a symbolic engine
over 2PR triples that also runs on infinite-state interval systems.
"""

from .algebra import FiniteRegionSystem, IntervalRegionSystem
from .explicit import run_explicit, run_refalgo, sim_fixpoint
from .generate import gen_random, unroll
from .intervals import IntervalRegion, SymbolicSystem, region_pre, witness_successor
from .lts import (
    AutParseError,
    Lts,
    LtsError,
    load_lts,
    parse_aut,
    post_a,
    post_star,
    pre_a,
    save_lts,
    serialize_aut,
)
from .oracle import (
    GroundTruth,
    compute_rsim_pairwise,
    ground_truth,
    partition_from_preorder,
    reachable_blocks,
    reachable_principals,
)
from .partition_engine import PartitionEngineState, expand_step, run_partition
from .relations import (
    Partition,
    PreorderInputError,
    PreorderReport,
    Relation,
    TwoPr,
    induce_twopr,
    induced_partition,
    meet,
    parse_preorder_spec,
    preorder_check,
    reflexive_transitive_closure,
    twopr_to_relation,
)
from .runtime import Counters, EngineOutcome, Strategy
from .statesets import StateSet
from .twopr_engine import TwoPrEngine, run_twopr, universal_twopr

__version__ = "0.1.0"
