//! Synthetic datasets sampled from a registry expression.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splinetaylor_core::{Bounds, Dataset};

use crate::error::{CliError, Result};
use crate::expr::Expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    /// Denser near the ends: `u -> (1 - cos(pi u)) / 2` per axis.
    Nonuniform,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub samples: usize,
    pub bounds: Bounds,
    pub spacing: Spacing,
    /// Multiplicative noise `y (1 + u pct / 100)`, `u ~ U[-1, 1]`.
    pub noise_pct: f64,
    pub seed: u64,
}

/// Parses `a:b` or `a:b,c:d,...` into a box.
pub fn parse_domain(s: &str) -> Result<Bounds> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("domain '{s}' must look like lo:hi[,lo:hi...]")))?;
        let a: f64 = a.trim().parse().map_err(|_| CliError::usage(format!("bad domain bound '{a}'")))?;
        let b: f64 = b.trim().parse().map_err(|_| CliError::usage(format!("bad domain bound '{b}'")))?;
        lo.push(a);
        hi.push(b);
    }
    let b = Bounds::new(lo, hi).map_err(|e| CliError::usage(e.to_string()))?;
    b.require_extent().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(b)
}

/// Points per axis so that `k^n >= samples`.
pub fn per_axis(samples: usize, dim: usize) -> usize {
    let mut k = (samples as f64).powf(1.0 / dim as f64).round().max(1.0) as usize;
    while k.pow(dim as u32) < samples {
        k += 1;
    }
    while k > 1 && (k - 1).pow(dim as u32) >= samples {
        k -= 1;
    }
    k
}

/// In 1D exactly `samples` points; in nD a `k^n` lattice with `k^n >= samples`.
pub fn synth(expr: &Expression, spec: &SynthSpec) -> Result<Dataset> {
    expr.require_dim(spec.bounds.dim())?;
    if spec.samples < 2 {
        return Err(CliError::usage("need at least 2 samples"));
    }
    if !(spec.noise_pct.is_finite() && spec.noise_pct >= 0.0) {
        return Err(CliError::usage("noise percentage must be finite and non-negative"));
    }
    let n = spec.bounds.dim();
    let k = if n == 1 { spec.samples } else { per_axis(spec.samples, n) };
    let unit: Vec<f64> = (0..k)
        .map(|i| {
            let u = i as f64 / (k - 1) as f64;
            match spec.spacing {
                Spacing::Uniform => u,
                Spacing::Nonuniform => 0.5 * (1.0 - (PI * u).cos()),
            }
        })
        .collect();
    let total = k.pow(n as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut inputs = Vec::with_capacity(total * n);
    let mut targets = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let x: Vec<f64> = (0..n).map(|a| spec.bounds.lo()[a] + spec.bounds.width(a) * unit[idx[a]]).collect();
        let mut y = expr.eval(&x);
        if spec.noise_pct > 0.0 {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            y *= 1.0 + u * spec.noise_pct / 100.0;
        }
        inputs.extend_from_slice(&x);
        targets.push(y);
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < k {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(Dataset::new(n, inputs, targets)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::lookup;

    #[test]
    fn per_axis_rounds_up() {
        assert_eq!(per_axis(400, 2), 20);
        assert_eq!(per_axis(401, 2), 21);
        assert_eq!(per_axis(1000, 3), 10);
        assert_eq!(per_axis(7, 1), 7);
    }

    #[test]
    fn nonuniform_keeps_endpoints() {
        let spec = SynthSpec {
            samples: 200,
            bounds: Bounds::interval(1.0, 26.0).unwrap(),
            spacing: Spacing::Nonuniform,
            noise_pct: 0.0,
            seed: 0,
        };
        let d = synth(&lookup("square").unwrap(), &spec).unwrap();
        assert_eq!(d.len(), 200);
        assert_eq!(d.input(0)[0], 1.0);
        assert_eq!(d.input(199)[0], 26.0);
        // Denser near the ends than in the middle.
        assert!(d.input(1)[0] - d.input(0)[0] < d.input(100)[0] - d.input(99)[0]);
        assert_eq!(d.targets()[10], d.input(10)[0] * d.input(10)[0]);
    }

    #[test]
    fn noise_stays_in_band() {
        let spec = SynthSpec {
            samples: 400,
            bounds: parse_domain("5:10,3:8").unwrap(),
            spacing: Spacing::Uniform,
            noise_pct: 0.1,
            seed: 3,
        };
        let d = synth(&lookup("newton_ma").unwrap(), &spec).unwrap();
        assert_eq!(d.len(), 400);
        for (x, y) in d.inputs().zip(d.targets()) {
            let t = x[0] * x[1];
            assert!((y - t).abs() <= t * 0.001 + 1e-12);
        }
    }

    #[test]
    fn domain_parsing() {
        assert_eq!(parse_domain("1:26").unwrap().hi(), &[26.0]);
        assert!(parse_domain("1-26").is_err());
        assert!(parse_domain("3:3").is_err());
    }
}
