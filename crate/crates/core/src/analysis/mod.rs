//! Exact objects behind the random path/cycle clusterings: circular intervals,
//! join matrices and their expectations, spectra, cross terms and relative
//! concentration.

pub mod concentration;
pub mod intervals;
pub mod join;

pub use concentration::{relative_concentration, structural_witness, zeta_bound_check, RelativeConcentration, ZetaCheck};
pub use intervals::{large_interval, small_interval, CircularInterval};
pub use join::{
    cross_term_max, expected_join_matrix, join_matrix, min_eigenvalue, min_eigenvalue_dense, quadratic_form,
    ExpectedJoinMatrix, JoinMatrix,
};
