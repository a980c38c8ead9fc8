//! Numerical laboratory for exchange-assisted tunneling between two wells in
//! one dimension: grids and quadrature, potentials, tridiagonal spectra, WKB
//! actions, exchange integrals, a first-order exchange correction with its
//! under-barrier tail, an exact two-fermion oracle, and scaling scans.

pub mod error;
pub mod exchange;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod hartree_fock;
pub mod oracle2p;
pub mod potentials;
pub mod semiclassics;
pub mod spectrum;
pub mod tridiag;

pub use error::{Error, Result};
