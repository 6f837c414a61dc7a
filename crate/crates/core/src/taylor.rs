//! Derivative chains and Taylor polynomial extraction.
//!
//! The root network is trained on the samples. Every other multi-index `α`
//! gets its own network, trained on the exact gradient of its parent `α - e_i`
//! along axis `i`, sampled on a box shrunk a little further at every level.
//! Indices are only reached by nondecreasing axis sequences, so mixed
//! partials such as `∂²/∂x∂y` are trained once.
//!
//! Extraction then evaluates the chain and expands the Taylor series. If the
//! top-order networks are indistinguishable from zero at the precision of the
//! root fit, the target looks like a finite polynomial: the top order is
//! dropped and expansions at several interior centers are averaged. Otherwise
//! the series was truncated and a single center (the midpoint) is used.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mlp::{train, Bounds, Dataset, Network, TrainConfig};
use crate::poly::{average, taylor_to_monomial, MultiIndex, Polynomial};
use crate::PiecewiseLinear;

/// Points per axis of the zero-test lattice.
pub const ZERO_TEST_POINTS_PER_AXIS: usize = 101;
/// Cap on the total zero-test lattice size.
pub const ZERO_TEST_MAX_POINTS: usize = 10_000;
/// Fraction of the innermost box (centered) that averaging centers span.
pub const CENTER_SPAN: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    /// Taylor order `m`.
    pub order: u32,
    /// Gradient samples drawn for each derivative network.
    pub derivative_sample_count: usize,
    /// Per-side, per-level shrink of the sampling box.
    pub shrink_fraction: f64,
    /// Number of averaging centers in the finite-polynomial case.
    pub centers: usize,
    /// The top order counts as zero when `max |net| <= factor * root RMSE`.
    pub zero_threshold_factor: f64,
    pub train: TrainConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            order: 3,
            derivative_sample_count: 2000,
            shrink_fraction: 0.05,
            centers: 5,
            zero_threshold_factor: 3.0,
            train: TrainConfig::default(),
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.shrink_fraction) {
            return Err(Error::Config(format!("shrink_fraction {} not in [0, 0.5)", self.shrink_fraction)));
        }
        if self.centers == 0 {
            return Err(Error::Config("centers must be at least 1".into()));
        }
        if self.derivative_sample_count < 2 {
            return Err(Error::Config("derivative_sample_count must be at least 2".into()));
        }
        if !(self.zero_threshold_factor.is_finite() && self.zero_threshold_factor >= 0.0) {
            return Err(Error::Config("zero_threshold_factor must be finite and non-negative".into()));
        }
        self.train.validate()
    }
}

/// One network per multi-index `|α| <= order`, plus the sampling box and
/// training error of every level.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeChain<M = Network> {
    dim: usize,
    order: u32,
    nets: BTreeMap<MultiIndex, M>,
    level_rmse: BTreeMap<MultiIndex, f64>,
    bounds: Vec<Bounds>,
}

impl<M: PiecewiseLinear> DerivativeChain<M> {
    /// Assembles a chain from parts, checking that every index up to `order`
    /// is present exactly once and that the per-level boxes are nested.
    pub fn from_parts(
        dim: usize,
        order: u32,
        nets: BTreeMap<MultiIndex, M>,
        level_rmse: BTreeMap<MultiIndex, f64>,
        bounds: Vec<Bounds>,
    ) -> Result<Self> {
        let expected = MultiIndex::all_up_to(dim, order);
        if nets.len() != expected.len() || level_rmse.len() != expected.len() {
            return Err(Error::IncompleteChain(format!(
                "expected {} networks, got {} ({} RMSE entries)",
                expected.len(),
                nets.len(),
                level_rmse.len()
            )));
        }
        for alpha in &expected {
            let net = nets.get(alpha).ok_or_else(|| Error::IncompleteChain(format!("{alpha}")))?;
            if net.input_dim() != dim {
                return Err(Error::Shape { expected: dim, actual: net.input_dim() });
            }
            if !level_rmse.contains_key(alpha) {
                return Err(Error::IncompleteChain(format!("RMSE for {alpha}")));
            }
        }
        if bounds.len() != order as usize + 1 {
            return Err(Error::Data(format!("expected {} level boxes, got {}", order + 1, bounds.len())));
        }
        if bounds.iter().any(|b| b.dim() != dim) || bounds.windows(2).any(|w| !w[0].encloses(&w[1])) {
            return Err(Error::Domain("level boxes must be nested and match the chain dimension".into()));
        }
        Ok(DerivativeChain { dim, order, nets, level_rmse, bounds })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }

    pub fn net(&self, alpha: &MultiIndex) -> Option<&M> {
        self.nets.get(alpha)
    }

    pub fn nets(&self) -> impl Iterator<Item = (&MultiIndex, &M)> {
        self.nets.iter()
    }

    pub fn level_rmse(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.level_rmse
    }

    pub fn root_rmse(&self) -> f64 {
        self.level_rmse[&MultiIndex::zero(self.dim)]
    }

    /// Sampling box of level `k` (level 0 is the data box).
    pub fn bounds(&self, level: usize) -> &Bounds {
        &self.bounds[level]
    }

    pub fn all_bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    /// The most-shrunken box.
    pub fn innermost_bounds(&self) -> &Bounds {
        self.bounds.last().expect("chain has at least one level")
    }
}

/// Derivative samples for the child of `net` along `axis`.
///
/// The box is shrunk by `shrink` of its width on each side; `t` points are
/// laid out evenly (1D) or as the smallest even lattice with at least `t`
/// points (nD), and each target is the exact partial derivative of `net`.
pub fn resample_derivative<M: PiecewiseLinear>(
    net: &M,
    axis: usize,
    bounds: &Bounds,
    t: usize,
    shrink: f64,
) -> Result<Dataset> {
    let n = net.input_dim();
    if axis >= n {
        return Err(Error::Domain(format!("axis {axis} out of range for {n} inputs")));
    }
    if bounds.dim() != n {
        return Err(Error::Shape { expected: n, actual: bounds.dim() });
    }
    if t < 2 {
        return Err(Error::Config("need at least 2 derivative samples".into()));
    }
    let inner = bounds.shrink(shrink)?;
    let points = inner.lattice(lattice_side(t, n));
    let mut targets = Vec::with_capacity(points.len());
    for p in &points {
        targets.push(net.slope(p)?[axis]);
    }
    Dataset::from_rows(&points, targets)
}

/// Smallest `k` with `k^n >= t`.
fn lattice_side(t: usize, n: usize) -> usize {
    let mut k = libm::floor(libm::pow(t as f64, 1.0 / n as f64)) as usize;
    k = k.max(1);
    while k.saturating_pow(n as u32) < t {
        k += 1;
    }
    while k > 1 && (k - 1).saturating_pow(n as u32) >= t {
        k -= 1;
    }
    k
}

/// Trains the root network and every derivative network up to `cfg.order`.
pub fn build_chain(data: &Dataset, cfg: &ExtractConfig) -> Result<DerivativeChain> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(Error::Data("need at least 2 samples to build a chain".into()));
    }
    let n = data.dim();
    let root = MultiIndex::zero(n);
    let (root_net, root_rmse) = train(data, &cfg.train)?;

    let mut bounds = Vec::with_capacity(cfg.order as usize + 1);
    bounds.push(data.bounds().clone());
    let mut nets = BTreeMap::new();
    let mut rmse = BTreeMap::new();
    nets.insert(root.clone(), root_net);
    rmse.insert(root, root_rmse);

    for level in 1..=cfg.order {
        let parent_box = bounds[level as usize - 1].clone();
        let level_cfg = cfg.train.with_seed(cfg.train.seed.wrapping_add(level as u64));
        for alpha in MultiIndex::all_up_to(n, level).into_iter().filter(|a| a.order() == level) {
            let axis = alpha.last_axis().expect("nonzero index has an axis");
            let parent = alpha.lower(axis).expect("last axis has a positive exponent");
            let samples = resample_derivative(&nets[&parent], axis, &parent_box, cfg.derivative_sample_count, cfg.shrink_fraction)?;
            let (net, err) = train(&samples, &level_cfg)?;
            nets.insert(alpha.clone(), net);
            rmse.insert(alpha, err);
        }
        bounds.push(parent_box.shrink(cfg.shrink_fraction)?);
    }
    DerivativeChain::from_parts(n, cfg.order, nets, rmse, bounds)
}

/// Outputs of every chain network at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainValues {
    pub values: BTreeMap<MultiIndex, f64>,
    /// `x0` lies outside the innermost sampling box.
    pub extrapolated: bool,
}

pub fn chain_values<M: PiecewiseLinear>(chain: &DerivativeChain<M>, x0: &[f64]) -> Result<ChainValues> {
    if x0.len() != chain.dim {
        return Err(Error::Shape { expected: chain.dim, actual: x0.len() });
    }
    let values = chain.nets.iter().map(|(alpha, net)| Ok((alpha.clone(), net.output(x0)?))).collect::<Result<_>>()?;
    Ok(ChainValues { values, extrapolated: !chain.innermost_bounds().contains(x0) })
}

/// Evenly spaced centers on the diagonal of the middle of `bounds`.
///
/// One center is the midpoint; `k > 1` centers run from 20% to 80% of every
/// axis together.
pub fn interior_centers(bounds: &Bounds, count: usize) -> Vec<Vec<f64>> {
    let lo_frac = 0.5 * (1.0 - CENTER_SPAN);
    (0..count)
        .map(|i| {
            let t = if count == 1 { 0.5 } else { lo_frac + CENTER_SPAN * i as f64 / (count - 1) as f64 };
            (0..bounds.dim()).map(|a| bounds.lo()[a] + t * bounds.width(a)).collect()
        })
        .collect()
}

/// Verdict of the top-order zero test.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTest {
    pub is_zero: bool,
    /// Largest `|output|` of any top-order network on the probe lattice.
    pub max_abs: f64,
    pub threshold: f64,
}

/// Probes every order-`m` network on a lattice over the innermost box.
pub fn top_order_zero_test<M: PiecewiseLinear>(chain: &DerivativeChain<M>, factor: f64) -> Result<ZeroTest> {
    let n = chain.dim;
    let mut side = ZERO_TEST_POINTS_PER_AXIS;
    while side > 1 && side.saturating_pow(n as u32) > ZERO_TEST_MAX_POINTS {
        side -= 1;
    }
    let probes = chain.innermost_bounds().lattice(side);
    let mut max_abs: f64 = 0.0;
    for (alpha, net) in &chain.nets {
        if alpha.order() != chain.order {
            continue;
        }
        for p in &probes {
            max_abs = max_abs.max(libm::fabs(net.output(p)?));
        }
    }
    let threshold = factor * chain.root_rmse();
    Ok(ZeroTest { is_zero: max_abs <= threshold, max_abs, threshold })
}

/// Diagnostics returned alongside an extracted polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub level_rmse: BTreeMap<MultiIndex, f64>,
    pub level_bounds: Vec<Bounds>,
    pub centers: Vec<Vec<f64>>,
    /// Chain values at each center, in center order.
    pub center_values: Vec<BTreeMap<MultiIndex, f64>>,
    pub zero_test: ZeroTest,
    /// Any center fell outside the innermost box.
    pub extrapolated: bool,
    /// Mean `|poly - target|` over the training samples.
    pub mean_abs_error: f64,
    /// Max `|poly - target|` over the training samples.
    pub max_abs_error: f64,
}

/// Turns a chain into a polynomial, following the zero-test branch.
pub fn polynomial_from_chain<M: PiecewiseLinear>(
    chain: &DerivativeChain<M>,
    centers: usize,
    zero_threshold_factor: f64,
) -> Result<(Polynomial, ExtractionReport)> {
    if centers == 0 {
        return Err(Error::Config("centers must be at least 1".into()));
    }
    let zero_test = top_order_zero_test(chain, zero_threshold_factor)?;
    let inner = chain.innermost_bounds();
    let points = if zero_test.is_zero { interior_centers(inner, centers) } else { alloc::vec![inner.midpoint()] };

    let mut polys = Vec::with_capacity(points.len());
    let mut center_values = Vec::with_capacity(points.len());
    let mut extrapolated = false;
    for c in &points {
        let mut cv = chain_values(chain, c)?;
        extrapolated |= cv.extrapolated;
        if zero_test.is_zero {
            // The top order is indistinguishable from zero; keep it exactly zero.
            for (alpha, v) in cv.values.iter_mut() {
                if alpha.order() == chain.order {
                    *v = 0.0;
                }
            }
        }
        polys.push(taylor_to_monomial(c, &cv.values, chain.order)?);
        center_values.push(cv.values);
    }
    let poly = average(&polys)?;
    let report = ExtractionReport {
        level_rmse: chain.level_rmse.clone(),
        level_bounds: chain.bounds.clone(),
        centers: points,
        center_values,
        zero_test,
        extrapolated,
        mean_abs_error: f64::NAN,
        max_abs_error: f64::NAN,
    };
    Ok((poly, report))
}

/// Full pipeline: chain, zero test, expansion, and error on the samples.
pub fn extract(data: &Dataset, cfg: &ExtractConfig) -> Result<(Polynomial, ExtractionReport)> {
    let chain = build_chain(data, cfg)?;
    extract_from_chain(&chain, data, cfg)
}

/// Extraction from an already built chain; `data` is only used for the
/// empirical error.
pub fn extract_from_chain<M: PiecewiseLinear>(
    chain: &DerivativeChain<M>,
    data: &Dataset,
    cfg: &ExtractConfig,
) -> Result<(Polynomial, ExtractionReport)> {
    let (poly, mut report) = polynomial_from_chain(chain, cfg.centers, cfg.zero_threshold_factor)?;
    let (mut sum, mut max) = (0.0f64, 0.0f64);
    for (x, y) in data.inputs().zip(data.targets()) {
        let e = libm::fabs(poly.eval(x)? - y);
        sum += e;
        max = max.max(e);
    }
    report.mean_abs_error = sum / data.len() as f64;
    report.max_abs_error = max;
    Ok((poly, report))
}
