//! Special functions used by the closed-form reference propagators.

pub mod airy;

pub use airy::{airy, Airy};
