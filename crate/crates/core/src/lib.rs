//! Truncated matrix models for reduced free products of finite-dimensional
//! C*-algebras: free-product word spaces, full Fock spaces, Toeplitz-Pimsner
//! spaces, completely positive maps and the experiment runners built on them.

pub mod cpmaps;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod freeprod;
pub mod hilbert;
pub mod io;
pub mod linalg;
pub mod ncpoly;
pub mod norms;
pub mod pimsner;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, SpMat, C64};
