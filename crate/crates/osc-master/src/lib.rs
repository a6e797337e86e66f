#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Master-equation coefficients for a charged harmonic oscillator coupled to a
//! Drude-cutoff thermal radiation bath, with closed forms, quadrature oracles
//! and moment dynamics.

pub mod cli;
pub mod coeffs;
pub mod dynamics;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod special_fn;
