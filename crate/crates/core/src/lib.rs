#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod params;
pub mod propagator_nr;
pub mod propagator_rel;
pub mod quadrature;
pub mod special;
pub mod tunneling;
pub mod wigner;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/propagator.md")]
    mod propagator {}
    #[doc = include_str!("../../../book/src/contours.md")]
    mod contours {}
    #[doc = include_str!("../../../book/src/wigner.md")]
    mod wigner {}
    #[doc = include_str!("../../../book/src/crossed_field.md")]
    mod crossed_field {}
}
