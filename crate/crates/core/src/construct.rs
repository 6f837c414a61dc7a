//! Training-free construction of a ReLU spline for a 1D function.
//!
//! Segment `i` covers `(x_{i-1}, x_i]` and owns three first-layer units:
//!
//! - left gate `relu(-x + x_{i-1})`, on when `x < x_{i-1}`
//! - carrier `relu(x - x_{i-1})`
//! - right gate `relu(x - x_i)`, on when `x > x_i`
//!
//! and one second-layer unit summing them with weights `(-M, slope_i, -M)`.
//! A large `M` makes any open gate drive the sum negative so the summing
//! ReLU outputs 0; with both gates closed it outputs the segment line. The
//! output unit adds all summing units with weight 1.
//!
//! Within `~|line| / M` of a breakpoint a barely-open gate does not fully
//! cancel its segment, and exactly at an interior breakpoint both neighbours
//! contribute. Error grids skip a small band around breakpoints for that reason.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::mlp::relu;
use crate::PiecewiseLinear;

/// Breakpoints plus the midpoint slope and value of every segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPlan {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    anchors: Vec<f64>,
}

impl SegmentPlan {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, anchors: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Data("a plan needs at least one segment".into()));
        }
        let s = breakpoints.len() - 1;
        check_len(s, slopes.len())?;
        check_len(s, anchors.len())?;
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Data("breakpoints must be strictly increasing".into()));
        }
        if let Some(v) = breakpoints.iter().chain(&slopes).chain(&anchors).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(SegmentPlan { breakpoints, slopes, anchors })
    }

    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.breakpoints[i] + self.breakpoints[i + 1])
    }

    /// Value of segment `i`'s line at `x`.
    pub fn line(&self, i: usize, x: f64) -> f64 {
        self.slopes[i] * (x - self.midpoint(i)) + self.anchors[i]
    }

    /// Segment whose half-open interval `(x_{i-1}, x_i]` holds `x`. The
    /// leftmost breakpoint itself maps to the first segment.
    pub fn segment_of(&self, x: f64) -> Option<usize> {
        let bp = &self.breakpoints;
        if x < bp[0] || x > bp[bp.len() - 1] {
            return None;
        }
        Some(bp[1..].partition_point(|b| *b < x).min(self.segments() - 1))
    }

    /// Same plan with every anchor raised by `lift`.
    pub fn lifted(&self, lift: f64) -> SegmentPlan {
        SegmentPlan { anchors: self.anchors.iter().map(|a| a + lift).collect(), ..self.clone() }
    }

    /// Smallest line value over each segment's closed interval.
    fn segment_minima(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.segments()).map(|i| self.line(i, self.breakpoints[i]).min(self.line(i, self.breakpoints[i + 1])))
    }

    /// Gate weight that silences a segment as soon as a gate opens by
    /// `1e-6` of the plan's largest line value or segment length.
    pub fn default_gate_magnitude(&self) -> f64 {
        let worst = (0..self.segments())
            .map(|i| {
                let (l, r) = (self.breakpoints[i], self.breakpoints[i + 1]);
                libm::fabs(self.line(i, l)).max(libm::fabs(self.line(i, r))).max(r - l)
            })
            .fold(0.0f64, f64::max);
        1e6 * (1.0 + worst)
    }
}

/// Uniform breakpoints on `[a, b]`; slopes are `df` and anchors `f` at the
/// segment midpoints.
pub fn plan_segments<F, D>(f: F, df: D, a: f64, b: f64, count: usize) -> Result<SegmentPlan>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if count == 0 {
        return Err(Error::Config("need at least one segment".into()));
    }
    if !(a < b) {
        return Err(Error::Domain(format!("interval [{a}, {b}] is empty")));
    }
    let width = (b - a) / count as f64;
    let mut breakpoints: Vec<f64> = (0..=count).map(|i| a + width * i as f64).collect();
    breakpoints[count] = b;
    let mut slopes = Vec::with_capacity(count);
    let mut anchors = Vec::with_capacity(count);
    for i in 0..count {
        let mid = 0.5 * (breakpoints[i] + breakpoints[i + 1]);
        let (d, v) = (df(mid), f(mid));
        if !d.is_finite() || !v.is_finite() {
            return Err(Error::NonFinite(mid));
        }
        slopes.push(d);
        anchors.push(v);
    }
    SegmentPlan::new(breakpoints, slopes, anchors)
}

/// Two-hidden-layer, single-input ReLU network.
///
/// Layer 1 has `3s` units, layer 2 has `s`; layer-2 weights are stored dense
/// (row-major `s x 3s`) so the forward and gradient code do not depend on the
/// triple structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedNet {
    plan: SegmentPlan,
    gate_magnitude: f64,
    lift: f64,
    l1_w: Vec<f64>,
    l1_b: Vec<f64>,
    l2_w: Vec<f64>,
    l2_b: Vec<f64>,
    out_w: Vec<f64>,
    out_b: f64,
}

impl ConstructedNet {
    /// Reassembles a network from stored weights, e.g. after loading a file.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        plan: SegmentPlan,
        gate_magnitude: f64,
        lift: f64,
        l1_w: Vec<f64>,
        l1_b: Vec<f64>,
        l2_w: Vec<f64>,
        l2_b: Vec<f64>,
        out_w: Vec<f64>,
        out_b: f64,
    ) -> Result<Self> {
        let h1 = l1_w.len();
        let h2 = l2_b.len();
        if h1 == 0 || h2 == 0 {
            return Err(Error::Data("both hidden layers need at least one unit".into()));
        }
        check_len(h1, l1_b.len())?;
        check_len(h1 * h2, l2_w.len())?;
        check_len(h2, out_w.len())?;
        let all = l1_w.iter().chain(&l1_b).chain(&l2_w).chain(&l2_b).chain(&out_w);
        if let Some(v) = all.chain([&out_b, &gate_magnitude, &lift]).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(ConstructedNet { plan, gate_magnitude, lift, l1_w, l1_b, l2_w, l2_b, out_w, out_b })
    }

    pub fn plan(&self) -> &SegmentPlan {
        &self.plan
    }

    pub fn gate_magnitude(&self) -> f64 {
        self.gate_magnitude
    }

    /// Constant added to every anchor and subtracted again at the output.
    pub fn lift(&self) -> f64 {
        self.lift
    }

    pub fn layer1_weights(&self) -> &[f64] {
        &self.l1_w
    }

    pub fn layer1_biases(&self) -> &[f64] {
        &self.l1_b
    }

    /// Row-major, one row of layer-1 weights per layer-2 unit.
    pub fn layer2_weights(&self) -> &[f64] {
        &self.l2_w
    }

    pub fn layer2_biases(&self) -> &[f64] {
        &self.l2_b
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.out_w
    }

    pub fn output_bias(&self) -> f64 {
        self.out_b
    }

    fn layer1(&self, x: f64) -> Vec<f64> {
        self.l1_w.iter().zip(&self.l1_b).map(|(w, b)| w * x + b).collect()
    }

    fn layer2_pre(&self, h1: &[f64]) -> Vec<f64> {
        let width = h1.len();
        self.l2_b
            .iter()
            .enumerate()
            .map(|(i, b)| self.l2_w[i * width..(i + 1) * width].iter().zip(h1).map(|(w, h)| w * relu(*h)).sum::<f64>() + b)
            .collect()
    }

    pub fn forward(&self, x: f64) -> f64 {
        let z2 = self.layer2_pre(&self.layer1(x));
        self.out_w.iter().zip(&z2).map(|(w, z)| w * relu(*z)).sum::<f64>() + self.out_b
    }

    /// Layered masked product: units with non-positive pre-activation pass
    /// no derivative.
    pub fn gradient(&self, x: f64) -> f64 {
        let z1 = self.layer1(x);
        let d1: Vec<f64> = z1.iter().zip(&self.l1_w).map(|(z, w)| if *z > 0.0 { *w } else { 0.0 }).collect();
        let z2 = self.layer2_pre(&z1);
        let width = z1.len();
        let mut g = 0.0;
        for (i, z) in z2.iter().enumerate() {
            if *z > 0.0 {
                let row = &self.l2_w[i * width..(i + 1) * width];
                g += self.out_w[i] * row.iter().zip(&d1).map(|(w, d)| w * d).sum::<f64>();
            }
        }
        g
    }
}

impl PiecewiseLinear for ConstructedNet {
    fn input_dim(&self) -> usize {
        1
    }

    fn output(&self, x: &[f64]) -> Result<f64> {
        check_len(1, x.len())?;
        Ok(self.forward(x[0]))
    }

    fn slope(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(1, x.len())?;
        Ok(vec![self.gradient(x[0])])
    }
}

/// Writes down the gated-triple network for `plan` with gate weight `-M`.
///
/// The summing unit of segment `i` gets bias `anchor_i - slope_i * Δ_i / 2`
/// so its line passes through the midpoint anchor. Lines that go negative
/// inside their segment would be clipped by the summing ReLU; those plans are
/// rejected with the lift that would fix them.
pub fn construct_1d(plan: &SegmentPlan, gate_magnitude: f64) -> Result<ConstructedNet> {
    build(plan.clone(), gate_magnitude, 0.0)
}

/// Like [`construct_1d`] but adds `lift` to the target and subtracts it again
/// at the output bias. Outside every segment the network outputs `-lift`.
pub fn construct_1d_lifted(plan: &SegmentPlan, gate_magnitude: f64, lift: f64) -> Result<ConstructedNet> {
    if !lift.is_finite() {
        return Err(Error::NonFinite(lift));
    }
    build(plan.lifted(lift), gate_magnitude, lift)
}

fn build(plan: SegmentPlan, gate_magnitude: f64, lift: f64) -> Result<ConstructedNet> {
    if !(gate_magnitude.is_finite() && gate_magnitude > 0.0) {
        return Err(Error::Config(format!("gate magnitude {gate_magnitude} must be positive")));
    }
    let minima: Vec<f64> = plan.segment_minima().collect();
    let worst = minima.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(segment) = minima.iter().position(|m| *m < -1e-12 * (1.0 + libm::fabs(*m))) {
        return Err(Error::OffsetInfeasible { segment, min_value: minima[segment], needed_lift: -worst });
    }

    let s = plan.segments();
    let width = 3 * s;
    let mut l1_w = Vec::with_capacity(width);
    let mut l1_b = Vec::with_capacity(width);
    let mut l2_w = vec![0.0; s * width];
    let mut l2_b = Vec::with_capacity(s);
    for i in 0..s {
        let (left, right) = (plan.breakpoints[i], plan.breakpoints[i + 1]);
        l1_w.extend_from_slice(&[-1.0, 1.0, 1.0]);
        l1_b.extend_from_slice(&[left, -left, -right]);
        let row = &mut l2_w[i * width..(i + 1) * width];
        row[3 * i] = -gate_magnitude;
        row[3 * i + 1] = plan.slopes[i];
        row[3 * i + 2] = -gate_magnitude;
        l2_b.push(plan.anchors[i] - plan.slopes[i] * (plan.midpoint(i) - left));
    }
    ConstructedNet::from_parts(plan, gate_magnitude, lift, l1_w, l1_b, l2_w, l2_b, vec![1.0; s], -lift)
}

/// Error of a constructed network against `f` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionReport {
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    /// Network slope equals the planned slope (within 1e-9) at every grid
    /// point inside a segment.
    pub slope_match: bool,
    /// Grid points left after excluding the breakpoint margins.
    pub points_used: usize,
}

/// Compares `net` with `f` on `grid` evenly spaced points of `[a, b]`,
/// skipping points closer than one grid step to a breakpoint.
pub fn verify_construction<F: Fn(f64) -> f64>(net: &ConstructedNet, f: F, a: f64, b: f64, grid: usize) -> Result<ConstructionReport> {
    if grid < 2 {
        return Err(Error::Config("grid needs at least 2 points".into()));
    }
    if !(a < b) {
        return Err(Error::Domain(format!("interval [{a}, {b}] is empty")));
    }
    let step = (b - a) / (grid - 1) as f64;
    let plan = net.plan();
    let (mut sum, mut max, mut used, mut slope_match) = (0.0f64, 0.0f64, 0usize, true);
    for j in 0..grid {
        let x = a + step * j as f64;
        if plan.breakpoints().iter().any(|bp| libm::fabs(x - bp) < step) {
            continue;
        }
        let err = libm::fabs(net.forward(x) - f(x));
        sum += err;
        max = max.max(err);
        used += 1;
        if let Some(i) = plan.segment_of(x) {
            slope_match &= libm::fabs(net.gradient(x) - plan.slopes()[i]) <= 1e-9;
        }
    }
    let mean = if used > 0 { sum / used as f64 } else { f64::NAN };
    Ok(ConstructionReport { max_abs_error: max, mean_abs_error: mean, slope_match, points_used: used })
}
