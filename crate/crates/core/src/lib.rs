//! Bivariate Daubechies-type scaling functions supported on `[0, 3]²`.
//!
//! A scaling function here is fixed by a 4×4 refinement mask. The crate
//! builds masks from closed-form solution families ([`mask`]), checks the
//! defining equations ([`verify`]), samples φ with the bi-cascade algorithm
//! ([`cascade`]), reproduces planes from translates ([`reproduction`]) and
//! cross-checks the closed forms by multistart Newton ([`oracle`]).

// `!(a <= b)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cascade;
pub mod cli;
pub mod error;
pub mod mask;
pub mod oracle;
pub mod reproduction;
pub mod verify;

pub use cascade::{cascade, key_point_fixed_point, DyadicSurface, KeyPointVector, TransitionMatrix};
pub use error::{Error, Result};
pub use mask::{build_mask, discriminant, FreeParameters, Mask, SolutionFamily};
pub use reproduction::{LinearFunctional, ReproductionPlan, TranslateRange, Window};
pub use verify::{verify, ConstraintReport, ShiftPair};
