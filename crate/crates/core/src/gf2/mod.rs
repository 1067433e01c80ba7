//! `GF(2^s)` arithmetic and the `GF(2)` linear algebra behind the linear
//! backend: Reed-Solomon evaluation as a matrix, row assembly from
//! inner products, Gaussian elimination and indexed affine solution spaces.

mod affine;
mod field;
mod matrix;
mod reed_solomon;

pub use affine::{solve_affine, AffineSpace};
pub use field::{Field2s, IRREDUCIBLE_MODULI, MAX_FIELD_DEGREE};
pub use matrix::Gf2Matrix;
pub use reed_solomon::{eval_matrix, row_assemble, rs_eval};
