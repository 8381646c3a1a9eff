//! Cramér-Rao bounds for finite-dimensional multiparameter quantum models.
//!
//! The crate evaluates three lower bounds on the weighted error `tr(G Σ)` of
//! any locally unbiased estimator:
//!
//! - the Helstrom bound `C_S = tr(G F⁻¹)` built from symmetric logarithmic
//!   derivatives ([`helstrom`]),
//! - the Holevo bound `C_H = min_X tr Re Q(X) + ||Im Q(X)||₁`, solved as a
//!   small dense LMI program by a from-scratch ADMM solver ([`holevo`], [`sdp`]),
//! - the Yuen-Lax RLD bound `C_R` ([`holevo::rld_bound`]).
//!
//! [`analysis`] checks the chain `max{C_S, C_R} ≤ C_H ≤ 3 C_S` together with
//! the rank-one and rank-two refinements over fixture and random ensembles.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod helstrom;
pub mod holevo;
pub mod linalg;
pub mod model;
pub mod sdp;

pub use error::{Error, Result};
pub use model::{CostMatrix, QuantumStatisticalModel};
