//! Constructive diagram transformations.

mod dichotomy;
mod dldd;
mod family_obdd;
mod multioutput;
mod transversal;
mod unit_rule;

pub use dichotomy::{
    build_dichotomy_fbdd, build_dichotomy_fbdd_with_stats, classify_dichotomy, dichotomy_size_bound, Dichotomy,
    DichotomyStats, DICHOTOMY_C,
};
pub use dldd::{dldd_to_fbdd, quasi_poly_bound};
pub use family_obdd::{
    build_family_obdd, build_family_obdd_with, family_size_bound, FamilyObdd, FamilyStats,
    DEFAULT_MAX_TRANSVERSALS,
};
pub use multioutput::{fbdd_to_multioutput, fbdd_to_multioutput_with_stats, MultiOutputStats};
pub use transversal::{
    find_transversals, hk_units, hk_units_by_definition, restricted_family, TransversalSet,
};
pub use unit_rule::{follows_unit_rule, to_unit_rule, to_unit_rule_with_ledger, EdgeRef, UnitLedger};
