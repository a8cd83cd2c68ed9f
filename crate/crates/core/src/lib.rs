//! Ground states of frozen-coefficient quasilinear problems, the energy
//! landscape Σ(z) they induce, and the search for concentration points.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod energy;
pub mod error;
pub mod expr;
pub mod field;
pub mod hull;
pub mod locator;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod sigma;

pub use error::{Error, Result};
