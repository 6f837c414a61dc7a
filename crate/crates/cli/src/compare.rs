//! Grid comparisons of a polynomial and a network against the true expression.

use serde::{Deserialize, Serialize};
use splinetaylor_core::{Bounds, PiecewiseLinear, Polynomial};

use crate::error::{CliError, Result};
use crate::expr::Expression;
use crate::formats::BoundsDoc;

pub const DEFAULT_GRID: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: BoundsDoc,
    pub points_per_axis: usize,
    pub total_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format_version: u32,
    pub expression: String,
    /// Max `|poly - truth|` on the grid.
    pub abs_error_upper_bound: f64,
    pub mean_abs_error_poly: f64,
    pub mean_abs_error_net: f64,
    pub max_abs_error_net: f64,
    pub grid: GridSpec,
}

/// Evaluates all three on an evenly spaced lattice over `domain`.
pub fn compare(
    expr: &Expression,
    net: &dyn PiecewiseLinear,
    poly: &Polynomial,
    domain: &Bounds,
    points_per_axis: usize,
) -> Result<ComparisonReport> {
    let n = domain.dim();
    expr.require_dim(n)?;
    if net.input_dim() != n || poly.dim() != n {
        return Err(CliError::data(format!(
            "dimension mismatch: domain {n}, model {}, polynomial {}",
            net.input_dim(),
            poly.dim()
        )));
    }
    if points_per_axis < 2 {
        return Err(CliError::usage("grid needs at least 2 points per axis"));
    }
    let lattice = domain.lattice(points_per_axis);
    let (mut sum_p, mut max_p, mut sum_n, mut max_n) = (0.0, 0.0f64, 0.0, 0.0f64);
    for x in &lattice {
        let t = expr.eval(x);
        let ep = (poly.eval(x)? - t).abs();
        let en = (net.output(x)? - t).abs();
        sum_p += ep;
        sum_n += en;
        max_p = max_p.max(ep);
        max_n = max_n.max(en);
    }
    let count = lattice.len() as f64;
    Ok(ComparisonReport {
        format_version: 1,
        expression: expr.id.clone(),
        abs_error_upper_bound: max_p,
        mean_abs_error_poly: sum_p / count,
        mean_abs_error_net: sum_n / count,
        max_abs_error_net: max_n,
        grid: GridSpec { domain: domain.into(), points_per_axis, total_points: lattice.len() },
    })
}

/// A 1D slice through the domain for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSlice {
    pub free_axis: usize,
    /// Full input vector with the free coordinate ignored.
    pub base: Vec<f64>,
}

/// Parses `axis=value,...` pins; exactly one axis must stay free.
pub fn parse_slice(spec: Option<&str>, dim: usize) -> Result<PlotSlice> {
    let mut base = vec![f64::NAN; dim];
    if let Some(spec) = spec {
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let (axis, value) =
                part.split_once('=').ok_or_else(|| CliError::usage(format!("slice '{part}' must look like axis=value")))?;
            let axis: usize = axis.trim().parse().map_err(|_| CliError::usage(format!("bad slice axis '{axis}'")))?;
            let value: f64 = value.trim().parse().map_err(|_| CliError::usage(format!("bad slice value '{value}'")))?;
            if axis >= dim {
                return Err(CliError::usage(format!("slice axis {axis} out of range for {dim} inputs")));
            }
            base[axis] = value;
        }
    }
    let free: Vec<usize> = (0..dim).filter(|a| base[*a].is_nan()).collect();
    if free.len() != 1 {
        return Err(CliError::usage(format!(
            "plot needs exactly one free axis; pin the others with --slice axis=value ({} free)",
            free.len()
        )));
    }
    Ok(PlotSlice { free_axis: free[0], base })
}

/// What a plot row carries besides the inputs and the truth.
pub struct PlotSources<'a> {
    pub net: Option<&'a dyn PiecewiseLinear>,
    pub poly: Option<&'a Polynomial>,
    pub slopes: bool,
}

/// Rows of `x1..xn, truth[, net][, poly][, truth_slope[, net_slope]]`,
/// sweeping the free axis of `slice` over `[lo, hi]`.
pub fn plot_rows(expr: &Expression, src: &PlotSources, slice: &PlotSlice, range: (f64, f64), points: usize) -> Result<Vec<Vec<f64>>> {
    if points < 2 {
        return Err(CliError::usage("plot needs at least 2 points"));
    }
    let (lo, hi) = range;
    let mut rows = Vec::with_capacity(points);
    let mut x = slice.base.clone();
    for i in 0..points {
        x[slice.free_axis] = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let mut row = x.clone();
        row.push(expr.eval(&x));
        if let Some(net) = src.net {
            row.push(net.output(&x)?);
        }
        if let Some(p) = src.poly {
            row.push(p.eval(&x)?);
        }
        if src.slopes {
            row.push(expr.gradient(&x)[slice.free_axis]);
            if let Some(net) = src.net {
                row.push(net.slope(&x)?[slice.free_axis]);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn plot_header(dim: usize, src: &PlotSources) -> Vec<String> {
    let mut h: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    h.push("truth".into());
    if src.net.is_some() {
        h.push("net".into());
    }
    if src.poly.is_some() {
        h.push("poly".into());
    }
    if src.slopes {
        h.push("truth_slope".into());
        if src.net.is_some() {
            h.push("net_slope".into());
        }
    }
    h
}
