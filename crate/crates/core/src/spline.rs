//! Weight-level inspection of a one-hidden-layer network.
//!
//! Everything here reads the weights directly: no sampling, no numerical
//! differentiation. A unit counts as active only when its pre-activation is
//! strictly positive, so a probe sitting exactly on a knot sees the unit off.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::mlp::{Bounds, Network};

/// Knots closer than this are reported once.
pub const KNOT_DEDUP_TOL: f64 = 1e-12;

/// Which hidden units are strictly active at a probe input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern {
    pub active: Vec<bool>,
}

impl ActivationPattern {
    pub fn count_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }
}

/// The affine map `x -> w · x + b` a network computes on one linear region.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub w: Vec<f64>,
    pub b: f64,
}

impl AffinePiece {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b
    }
}

pub fn activation_pattern(net: &Network, x: &[f64]) -> Result<ActivationPattern> {
    check_len(net.input_dim(), x.len())?;
    let active = (0..net.hidden_width()).map(|k| net.pre_activation(k, x) > 0.0).collect();
    Ok(ActivationPattern { active })
}

/// Exact gradient: `g_i = sum over active k of w1[k][i] * w2[k]`.
pub fn gradient(net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    check_len(net.input_dim(), x.len())?;
    let n = net.input_dim();
    let mut g = vec![0.0; n];
    for k in 0..net.hidden_width() {
        if net.pre_activation(k, x) > 0.0 {
            let w2 = net.w2()[k];
            for (gi, w) in g.iter_mut().zip(net.w1_row(k)) {
                *gi += w * w2;
            }
        }
    }
    Ok(g)
}

/// Slope and intercept of the piece containing `x`.
pub fn local_affine(net: &Network, x: &[f64]) -> Result<AffinePiece> {
    check_len(net.input_dim(), x.len())?;
    let mut w = vec![0.0; net.input_dim()];
    let mut b = net.b2();
    for k in 0..net.hidden_width() {
        if net.pre_activation(k, x) > 0.0 {
            let w2 = net.w2()[k];
            for (wi, w1) in w.iter_mut().zip(net.w1_row(k)) {
                *wi += w1 * w2;
            }
            b += w2 * net.b1()[k];
        }
    }
    Ok(AffinePiece { w, b })
}

/// Sorted, deduplicated knot locations of a 1-input network inside `interval`.
///
/// Each unit with a nonzero weight contributes the zero of its pre-activation,
/// `-b1[k] / w1[k]`. Units with zero weight never switch and contribute nothing.
pub fn knots_1d(net: &Network, interval: &Bounds) -> Result<Vec<f64>> {
    if net.input_dim() != 1 {
        return Err(Error::Dimensionality(net.input_dim()));
    }
    if interval.dim() != 1 {
        return Err(Error::Dimensionality(interval.dim()));
    }
    let (a, b) = (interval.lo()[0], interval.hi()[0]);
    if a >= b {
        return Err(Error::Domain("knot interval must have a < b".into()));
    }
    let mut knots: Vec<f64> = (0..net.hidden_width())
        .filter_map(|k| {
            let w = net.w1()[k];
            (w != 0.0).then(|| -net.b1()[k] / w)
        })
        .filter(|x| *x >= a && *x <= b)
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|later, earlier| *later - *earlier <= KNOT_DEDUP_TOL);
    Ok(knots)
}

/// Distance from `x` to the nearest activation boundary, measured in input
/// space (`|pre-activation| / ||w1_k||`). Infinite when no unit can switch.
pub fn boundary_distance(net: &Network, x: &[f64]) -> Result<f64> {
    check_len(net.input_dim(), x.len())?;
    let mut best = f64::INFINITY;
    for k in 0..net.hidden_width() {
        let norm = libm::sqrt(net.w1_row(k).iter().map(|w| w * w).sum::<f64>());
        if norm > 0.0 {
            best = best.min(libm::fabs(net.pre_activation(k, x)) / norm);
        }
    }
    Ok(best)
}
