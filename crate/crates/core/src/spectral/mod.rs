//! Transition matrix `A(B, r)` of the expected block counts under even
//! splitting, and the spectral facts used to predict fullness from it.
//!
//! Blocks are indexed by size `d..=B` with `d = (B + 1) / 2`. Starting from a
//! single block of size `d`, only sizes in the support set `S = d + <r>`
//! (`<r>` the subgroup of `Z_d` generated by `r`) ever appear, so the analysis
//! works with the principal submatrix `A_S`.

mod eigen;
mod margin;
mod matrix;

pub use eigen::{
    intra_class_check, principal_eigenvector, principal_eigenvector_with, spectral_projection,
    EigenSolution, IntraClassReport, NullSpaceMethod, SpectralProjection,
};
pub use margin::{perron_margin, MarginReport};
pub use matrix::{support_set, RestrictedMatrix, SupportSet, TransitionMatrix};

use crate::error::Result;
use crate::params::SplitParams;

/// Builds `A_S` and solves for its principal eigenvector.
pub fn analyze(params: SplitParams) -> Result<EigenSolution> {
    let a = TransitionMatrix::build(params)?;
    let s = support_set(params)?;
    principal_eigenvector(&a.restrict(&s)?, params.batch())
}

/// Asymptotic even-split fullness `<u, w_S> / (B <u, 1>)`.
pub fn predicted_fullness(params: SplitParams) -> Result<f64> {
    Ok(analyze(params)?.predicted_fullness)
}
