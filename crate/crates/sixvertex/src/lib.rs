//! Stochastic six-vertex model with step initial condition, and the
//! numerical machinery around its lower-tail behaviour.
//!
//! The crate is organized around six pieces:
//!
//! - [`height`]: gradient-constrained height surfaces on the face lattice,
//!   disagreement regions, and the shift/involution/contraction maps.
//! - [`model`]: vertex weights, exact Boltzmann enumeration, Markovian
//!   sampling, the corner height observable, and the weak log-concavity
//!   verifiers.
//! - [`qseries`]: q-products, the Theta and q-geometric shift laws, the
//!   q-Laplace transform of the height, and the CDF identity tying them.
//! - [`schur`]: partitions, z-measures, the moment-matching identity with
//!   the q-Laplace transform, and the discrete log-gas decomposition.
//! - [`potential`]: logarithmic energy integrals, the box-constrained
//!   equilibrium-measure solver, and the closed-form equilibrium data.
//! - [`rate`]: the limit shape constant, the energy-based rate function,
//!   infimal convolution/deconvolution, and the lower-tail rate function.
//!
//! Everything is desk-scale verifiable: exact enumeration, quadrature, and
//! closed forms back every quantity the library produces. See the
//! `examples/` directory for one runnable walk-through per capability and
//! [`cli`] for the command-line front end.

pub mod cli;
pub mod error;
pub mod height;
pub mod model;
pub mod potential;
pub mod qseries;
pub mod quad;
pub mod rate;
pub mod schur;

pub use error::{Error, Result};
