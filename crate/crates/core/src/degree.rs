//! Heuristics for choosing the Taylor order.
//!
//! Neither method can be certain from finite data, so every estimate carries a
//! confidence and a residual. Choosing `m` from an estimate is left to callers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::PiecewiseLinear;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMethod {
    FiniteDifference,
    LogLog,
}

impl DegreeMethod {
    pub fn name(self) -> &'static str {
        match self {
            DegreeMethod::FiniteDifference => "finite_difference",
            DegreeMethod::LogLog => "loglog",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeEstimate {
    pub degree: u32,
    /// In `[0, 1]`.
    pub confidence: f64,
    pub method: DegreeMethod,
    /// Finite differences: `max |Δ^k y|` at the stopping level.
    /// Log-log: distance from the raw estimate to the reported integer.
    pub residual: f64,
    /// Log-log only: `log h(x) / log x` at the largest probe.
    pub raw: Option<f64>,
}

/// Degree from a forward-difference table of evenly spaced samples.
///
/// Differences are taken until the first level `k` where
/// `max |Δ^k y| <= noise_tol * max |y|`; the degree is `k - 1` (0 when the data
/// itself is zero). Confidence is `1 - max |Δ^k y| / (noise_tol * max |y|)`,
/// clamped to `[0, 1]`.
pub fn finite_difference_degree(ys: &[f64], noise_tol: f64) -> Result<DegreeEstimate> {
    if ys.len() < 3 {
        return Err(Error::InsufficientSamples(format!("need at least 3 samples, got {}", ys.len())));
    }
    if !(noise_tol.is_finite() && noise_tol >= 0.0) {
        return Err(Error::Config("noise_tol must be finite and non-negative".into()));
    }
    if let Some(y) = ys.iter().find(|y| !y.is_finite()) {
        return Err(Error::NonFinite(*y));
    }
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(libm::fabs(*y)));
    let limit = noise_tol * scale;
    let mut diffs: Vec<f64> = ys.to_vec();
    let mut level = 0u32;
    loop {
        let max = diffs.iter().fold(0.0f64, |m, d| m.max(libm::fabs(*d)));
        if max <= limit {
            let confidence = if limit > 0.0 { (1.0 - max / limit).clamp(0.0, 1.0) } else { 1.0 };
            return Ok(DegreeEstimate {
                degree: level.saturating_sub(1),
                confidence,
                method: DegreeMethod::FiniteDifference,
                residual: max,
                raw: None,
            });
        }
        if diffs.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "differences still above tolerance at level {level} with {} samples",
                ys.len()
            )));
        }
        diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        level += 1;
    }
}

/// Which function's logarithm is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogLogMode {
    /// `log f(x) / log x`.
    Direct,
    /// `log(-f(x)) / log x`, for a negative leading coefficient.
    Negated,
    /// `log(f(x) + k) / log x`, for functions that dip below zero.
    Lifted(f64),
}

/// Degree from the growth rate `log h(x) / log x` at large `x`.
///
/// The value at the largest probe is the raw estimate. A ReLU network grows
/// only linearly outside its training region, so probing one far away
/// reports 1 whatever it learned; the caller picks the probe range.
pub fn loglog_degree<F: Fn(f64) -> f64>(probe: F, x_values: &[f64], mode: LogLogMode) -> Result<DegreeEstimate> {
    if x_values.is_empty() {
        return Err(Error::InsufficientSamples("need at least one probe".into()));
    }
    if x_values.iter().any(|x| !(*x > 1.0 && x.is_finite())) {
        return Err(Error::Domain("log-log probes must be finite and > 1".into()));
    }
    if x_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("log-log probes must be increasing".into()));
    }
    let mut raw = f64::NAN;
    for &x in x_values {
        let fx = probe(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let h = match mode {
            LogLogMode::Direct => fx,
            LogLogMode::Negated => -fx,
            LogLogMode::Lifted(k) => fx + k,
        };
        if h <= 0.0 {
            return Err(Error::LogDomain { x, value: h });
        }
        raw = libm::log(h) / libm::log(x);
    }
    let degree = libm::round(raw).max(0.0);
    let residual = libm::fabs(raw - degree);
    Ok(DegreeEstimate {
        degree: degree as u32,
        confidence: (1.0 - 2.0 * residual).clamp(0.0, 1.0),
        method: DegreeMethod::LogLog,
        residual,
        raw: Some(raw),
    })
}

/// `log h(x) / log x` at every probe, for inspecting convergence.
pub fn loglog_curve<F: Fn(f64) -> f64>(probe: F, x_values: &[f64], mode: LogLogMode) -> Result<Vec<f64>> {
    (0..x_values.len()).map(|i| loglog_degree(&probe, &x_values[i..=i], mode).map(|e| e.raw.unwrap_or(f64::NAN))).collect()
}

/// The 1D slice `t -> net(x)` with every axis but `free_axis` pinned.
pub fn projection_1d<'a, M: PiecewiseLinear>(
    net: &'a M,
    fixed: &BTreeMap<usize, f64>,
    free_axis: usize,
) -> Result<impl Fn(f64) -> f64 + 'a> {
    let n = net.input_dim();
    if free_axis >= n {
        return Err(Error::Domain(format!("free axis {free_axis} out of range for {n} inputs")));
    }
    let mut base = alloc::vec![0.0; n];
    for axis in (0..n).filter(|a| *a != free_axis) {
        base[axis] = *fixed
            .get(&axis)
            .ok_or_else(|| Error::Config(format!("axis {axis} is neither fixed nor free")))?;
    }
    if let Some(extra) = fixed.keys().find(|a| **a >= n) {
        return Err(Error::Domain(format!("fixed axis {extra} out of range")));
    }
    Ok(move |t: f64| {
        let mut x = base.clone();
        x[free_axis] = t;
        net.output(&x).expect("projection assembles a full-length input")
    })
}
