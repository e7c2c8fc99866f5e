//! Spectral and pseudospectral analysis of elliptic quadratic differential operators
//! `q(x, ξ)^w` on `L²(R^n)`.

pub mod band;
pub mod bracket;
pub mod contour;
pub mod error;
pub mod fixtures;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod order;
pub mod reduction;
pub mod report;
pub mod resolvent;
pub mod sector;
pub mod spectrum;
pub mod symbol;
pub mod witness;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
