//! Quantum and classical Cramér–Rao limits for resolving two incoherent
//! point sources in a 2-D imaging system.
//!
//! The crate is organised bottom-up:
//! - [`psf`]: point-spread functions and their momentum-space moments;
//! - [`qfim`]: closed-form quantum Fisher information and the `H_r`, `H_α` limits;
//! - [`azimuth`]: optimisation of the small-separation precision over the azimuth;
//! - [`direct`]: classical Fisher information of direct imaging and a Monte Carlo MLE harness;
//! - [`oracle`]: brute-force Gram-subspace verification of the quantum closed forms;
//! - [`scan`], [`report`] and [`verify`]: parameter scans, per-scene reports and named verification suites.

// Negated comparisons deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod azimuth;
pub mod direct;
pub mod exec;
pub mod fisher;
pub mod oracle;
pub mod psf;
pub mod qfim;
pub mod quad;
pub mod report;
pub mod scan;
pub mod scene;
pub mod verify;

pub use error::{Error, Result};
pub use fisher::{FisherKind, FisherMatrix};
pub use psf::{BaseMoments, GaussianPsf, GeometryMoments, GridPsf, Psf};
pub use scene::SceneParams;
