//! Symbols L(a, ξ̃) = Σ ξ̃j Aj(a) and their hyperbolicity.

pub mod cone;
pub mod double;
pub mod expr;
pub mod family;
pub mod full;
pub mod hyperbolic;

pub use cone::{cone_explore, direction_change_constant, ConeBudget, ConeChart, ConeEntry};
pub use double::{symmetrize_2x2, Symmetrize2x2};
pub use family::{combine, eval_symbol, ASlot, FamilySpec, SymbolFamily};
pub use full::{
    change_time_direction, full_from_symmetrizer, full_positivity_check, homotopy_positivity, symmetrizer_from_full,
    FullSymmetrizerField,
};
pub use hyperbolic::{
    hyperbolicity_check, necessary_condition_probe, strong_hyperbolicity_in_direction, SamplePlan, SymbolCertificate,
};
