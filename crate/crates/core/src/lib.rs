#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod config;
pub mod error;
pub mod experiments;
pub mod hermite;
pub mod measure;
pub mod ou;
pub mod poisson;
pub mod quadrature;
