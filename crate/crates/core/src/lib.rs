//! Extraction of well-conditioned column submatrices.
//!
//! Given `X` with unit-norm columns and `eps` in `(0, 1)`, [`run_selection`]
//! greedily picks `R` columns, where `R ln R <= eps^2 p / (4 (1 + eps) ||X||^2)`,
//! such that every singular value of the extracted submatrix lies in
//! `[1 - eps, 1 + eps]`. Each intermediate spectrum is checked against an
//! explicit per-eigenvalue envelope and the whole run is returned as a
//! [`SelectionReport`].
//!
//! ```
//! use wellcond_core::{generate, run_selection, Family, GeneratorSpec, SelectorConfig};
//!
//! let x = generate(&GeneratorSpec::new(Family::RandomSphere, 50, 200, 42)).unwrap();
//! let report = run_selection(&x, 0.75, &SelectorConfig::default()).unwrap();
//! assert!(report.certified);
//! assert_eq!(report.selected.len(), report.params.budget);
//! ```

pub mod baselines;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod secular;
pub mod selector;

pub use baselines::{
    first_r_select, random_subset_select, BaselineMethod, BaselineResult, ConditionSummary,
};
pub use error::{Error, Result};
pub use generators::{generate, Family, FamilyParams, GeneratorSpec};
pub use linalg::{
    gram, normalize_columns, operator_norm_sq, sym_eig, DenseMatrix, SpectralState, SymEig,
};
pub use secular::{
    append_column_spectrum, arrowhead_eigenvectors, check_interlacing, secular_eval,
    ArrowheadSpectrum, Couplings,
};
pub use selector::{
    compute_budget, envelope_bounds, replay_selection, run_selection, score_column, select_next,
    verify_average_bound, verify_envelopes, BudgetParams, SelectionReport, SelectionState,
    Selector, SelectorConfig, SpectralPath,
};
