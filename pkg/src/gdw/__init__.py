"""Gamut dimension witnesses from two-dit quantum random access codes.

Bounds on the success probability for every product structure of a
dimension, the +/-1 mutually unbiased bases and encodings that reach the
quantum optimum, a Poissonian single-detector simulator, and certification of
irreducibility from click counts.
"""

from gdw.certify import (
    CertificationReport,
    Verdict,
    certify,
    certify_estimate,
    estimate_asp,
    ingest_click_log,
)
from gdw.errors import (
    ClickLogError,
    DomainError,
    GDWError,
    InvalidDimensionError,
    NoClicksError,
    StructureParseError,
)
from gdw.mub import (
    EncodedState,
    MubPair,
    build_mub,
    curve_state,
    encode_optimal,
    measurement_overlap,
)
from gdw.oracles import (
    OracleReport,
    classical_rac_exhaustive,
    tradeoff_grid_check,
    two_factor_grid_bound,
)
from gdw.simulate import (
    ClickTally,
    SimConfig,
    expected_click_rates,
    fom_closed_form,
    fom_first_order,
    simulate,
)
from gdw.solver import BoundResult, SolverConfig, Status, bound_table, objective, solve_bound
from gdw.structures import (
    Factor,
    Filter,
    Kind,
    ProductStructure,
    enumerate_structures,
    parse_structure,
)
from gdw.tradeoff import (
    optimal_asp_single,
    tradeoff_c,
    tradeoff_fixed_point,
    tradeoff_q,
    tradeoff_q_trig,
)

__version__ = "0.1.0"
