//! Balanced extractor graphs and list approximation for increasing
//! Kolmogorov complexity.
//!
//! The crate is organised bottom-up:
//!
//! - [`bits`], [`rational`], [`prng`]: small value types shared everywhere.
//! - [`graph`]: extractor graphs as total functions `EXT(x, y)`, prefix views
//!   and the `BGEX` binary format.
//! - [`gf2`]: `GF(2^s)` arithmetic, Reed-Solomon evaluation, bit-packed
//!   `GF(2)` matrices and indexed affine solution spaces.
//! - [`random`]: seeded random tables, exact and sampled extractor
//!   verification, balanced-graph search and the coupon-collector bound.
//! - [`linear`]: the linear backend `EXT(x, y) = A_y x` and indexed
//!   preimage lists.
//! - [`listapprox`]: light/heavy classification, bad-set detection and the
//!   go-right-then-go-left list `f(x)`.
//! - [`oracle`]: computable stand-ins for the complexity function that
//!   produce the sets `B = {x : C(x) <= k}`.
//!
//! Data-parallel loops go through [`par::Exec`]. With the `parallel`
//! feature (default) they run on rayon, otherwise sequentially; results are
//! identical either way.

pub mod bits;
pub mod error;
pub mod gf2;
pub mod graph;
pub mod linear;
pub mod listapprox;
pub mod oracle;
pub mod par;
pub mod prng;
pub mod random;
pub mod rational;

pub use bits::Bits;
pub use error::{Error, Result};
pub use graph::{BalanceParams, ExtractorGraph, PrefixView};
pub use par::Exec;
pub use rational::{Rational, Surd};
