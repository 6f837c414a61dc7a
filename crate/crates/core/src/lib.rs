//! Reading polynomials out of one-hidden-layer ReLU regressors, and the reverse.
//!
//! A ReLU network is a linear spline: on every region where the set of active
//! hidden units is fixed it computes an affine map whose slope is a masked
//! product of its weights. This crate uses that fact in two directions.
//!
//! - [`taylor`] trains a root network on samples, then trains one network per
//!   multi-index on the *exact* gradient of its parent, evaluates the whole
//!   chain at a center and expands the resulting Taylor series into monomials.
//! - [`construct`] goes the other way and writes down two-hidden-layer ReLU
//!   weights for a 1D function directly, one gated line segment per interval,
//!   with the slope of every segment equal to the function's midpoint
//!   derivative.
//!
//! Supporting pieces: [`mlp`] (network, loss, seeded Adam trainer),
//! [`spline`] (activation patterns, gradients, affine pieces, knots),
//! [`poly`] (sparse multivariate polynomials) and [`degree`] (heuristics
//! for picking the expansion order).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, CSV and the
//! command-line driver live in the `splinetaylor` crate.
#![no_std]

extern crate alloc;

pub mod construct;
pub mod degree;
mod error;
pub mod mlp;
pub mod poly;
pub mod spline;
pub mod taylor;

pub use construct::{ConstructedNet, SegmentPlan};
pub use degree::{DegreeEstimate, DegreeMethod, LogLogMode};
pub use error::{Error, Result};
pub use mlp::{Bounds, Dataset, Network, TrainConfig};
pub use poly::{MultiIndex, Polynomial};
pub use spline::{ActivationPattern, AffinePiece};
pub use taylor::{DerivativeChain, ExtractConfig, ExtractionReport};

/// Anything that maps `R^n -> R` as a continuous piecewise-affine function and
/// can report its slope exactly.
///
/// Both the trained one-hidden-layer [`Network`] and the hand-built
/// [`ConstructedNet`] implement this, so derivative chains can be assembled
/// from either.
pub trait PiecewiseLinear {
    /// Number of inputs.
    fn input_dim(&self) -> usize;

    /// Network output at `x`.
    fn output(&self, x: &[f64]) -> Result<f64>;

    /// Exact gradient at `x`. Units sitting exactly on zero count as inactive.
    fn slope(&self, x: &[f64]) -> Result<alloc::vec::Vec<f64>>;
}
