"""agglogic: a [0,1]-valued logic over finite relational structures where
aggregation functions replace quantifiers, with sequence pseudometrics,
empirical continuity probes, random-structure sampling, and an asymptotic
aggregation-elimination engine."""

from .catalog import (
    AM,
    AND,
    AggregatorDef,
    ConnectiveDef,
    GM,
    HARTIG,
    IMPLIES,
    LENGTH_INV,
    MAX,
    MIN,
    MostowskiQuantifier,
    NOT,
    OR,
    PROD,
    RESCHER,
    TSUM,
    builtin_aggregators,
    builtin_connectives,
    length_inverse,
    prebuilt_quantifiers,
    proportional_aggregator,
    proportional_quantifier,
    quantifier_to_agg,
)
from .logic import (
    Agg,
    Atom,
    Conn,
    Const,
    Eq,
    Formula,
    Signature,
    Structure,
    all_structures,
    defined_set,
    evaluate,
    evaluate_grid,
    free_vars,
    satisfies,
)
from .seqmetrics import (
    FreqParams,
    MU1_DIST,
    StepFunction,
    mu1_unordered,
    mu1_unordered_tuple,
    muinf_ordered,
    muinf_ordered_tuple,
    ordered_rep,
    tuple_distance,
    unordered_rep,
)
from .continuity import (
    CTSeqSpec,
    Counterexample,
    ProbeConfig,
    ProbeReport,
    ct_probe,
    largest_remainder_counts,
    make_ct_sequence,
    nudge,
    probe_both,
    up_probe,
)
from .worlds import (
    EquivalenceReport,
    FreqEstimate,
    IidModel,
    analytic_alpha,
    estimate_equivalence,
    estimate_freq_params,
    load_model,
    sample,
)
from .basic import (
    BasicFormula,
    LiteralConjunction,
    TOP_GUARD,
    atom_to_basic,
    combine_connective,
    complete_types,
    is_complete_type,
    literal_sat,
)
from .eliminate import (
    EliminateOptions,
    EliminationTrace,
    eliminate,
    eliminate_aggregation,
    frequency_params,
    limit_value,
    validate,
)
from .grammar import parse, pretty
from .pagerank import out_share, pagerank_stage
from . import errors

__version__ = "0.1.0"
