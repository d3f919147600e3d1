//! Forward iteration of finite Blaschke products fixing the origin.
//!
//! * [`product`]: Blaschke factors and finite products.
//! * [`roots`]: preimages `B⁻¹(w)` by simultaneous iteration.
//! * [`composition`]: zero-tracked composites `Bₙ = bₙ ∘ ⋯ ∘ b₁`, nested
//!   evaluation and truncated infinite products.
//! * [`diagnostics`]: classification, Frostman and Blaschke sums, interior
//!   Cauchy gauges.
//! * [`boundary`]: boundary circle maps, `L¹` distances of boundary
//!   extensions, measure preservation.
//! * [`counterexample`]: sequences whose interior limit exists while the
//!   boundary extensions drift.
//! * [`verify`]: the property checks run by `blaschke verify`.

// `!(x < y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod boundary;
pub mod composition;
pub mod counterexample;
pub mod diagnostics;
pub mod error;
pub mod families;
pub mod product;
pub mod roots;
pub mod stats;
pub mod verify;

pub use angle::CircleAngle;
pub use composition::{compose_step, CompositionSequence, PartialLimit};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use product::{BlaschkeFactor, BlaschkeProduct};
pub use roots::preimages;

/// Numbers in reports: 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}
