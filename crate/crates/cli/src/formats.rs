//! On-disk formats: dataset CSV, model files, polynomial files, chain directories.
//!
//! Every JSON document starts with a `format_version` field. Floats are
//! written in shortest round-trip form and parsed exactly, so saving and
//! loading a model reproduces every weight bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use splinetaylor_core::construct::ConstructedNet;
use splinetaylor_core::{Bounds, Dataset, DerivativeChain, ExtractConfig, MultiIndex, Network, PiecewiseLinear, Polynomial, SegmentPlan, TrainConfig};

use crate::error::{CliError, Result};

/// One-hidden-layer model files.
pub const MODEL_VERSION_SHALLOW: u32 = 1;
/// Two-hidden-layer (constructed) model files.
pub const MODEL_VERSION_CONSTRUCTED: u32 = 2;
pub const POLYNOMIAL_VERSION: u32 = 1;
pub const CHAIN_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Dataset CSV

/// Writes `x1,...,xn,y` with 17 significant digits per value.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut header: Vec<String> = (1..=data.dim()).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(csv_err)?;
    for (x, y) in data.inputs().zip(data.targets()) {
        let row: Vec<String> = x.iter().chain(std::iter::once(y)).map(|v| format_f64(*v)).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::data(e)
}

/// Reads a dataset CSV. The header must be `x1,...,xn,y`.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(CliError::data(format!("dataset not found: {}", path.display())));
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    let cols = header.len();
    if cols < 2 || header.get(cols - 1) != Some("y") {
        return Err(CliError::data(format!("{}: header must be x1,...,xn,y", path.display())));
    }
    let dim = cols - 1;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::data(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let values: std::result::Result<Vec<f64>, _> = record.iter().map(|s| s.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| CliError::data(format!("{}: line {line}: {e}", path.display())))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::data(format!("{}: line {line}: non-finite value", path.display())));
        }
        inputs.extend_from_slice(&values[..dim]);
        targets.push(values[dim]);
    }
    Ok(Dataset::new(dim, inputs, targets)?)
}

// ---------------------------------------------------------------------------
// Shared pieces

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl From<&Bounds> for BoundsDoc {
    fn from(b: &Bounds) -> Self {
        BoundsDoc { lo: b.lo().to_vec(), hi: b.hi().to_vec() }
    }
}

impl BoundsDoc {
    pub fn to_bounds(&self) -> Result<Bounds> {
        Ok(Bounds::new(self.lo.clone(), self.hi.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfigDoc {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub hidden_width: usize,
}

impl From<&TrainConfig> for TrainConfigDoc {
    fn from(c: &TrainConfig) -> Self {
        TrainConfigDoc {
            epochs: c.epochs,
            batch_size: c.batch_size,
            learning_rate: c.learning_rate,
            seed: c.seed,
            hidden_width: c.hidden_width,
        }
    }
}

impl From<&TrainConfigDoc> for TrainConfig {
    fn from(c: &TrainConfigDoc) -> Self {
        TrainConfig {
            epochs: c.epochs,
            batch_size: c.batch_size,
            learning_rate: c.learning_rate,
            seed: c.seed,
            hidden_width: c.hidden_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfigDoc {
    pub order: u32,
    pub derivative_sample_count: usize,
    pub shrink_fraction: f64,
    pub centers: usize,
    pub zero_threshold_factor: f64,
    pub train: TrainConfigDoc,
}

impl From<&ExtractConfig> for ExtractConfigDoc {
    fn from(c: &ExtractConfig) -> Self {
        ExtractConfigDoc {
            order: c.order,
            derivative_sample_count: c.derivative_sample_count,
            shrink_fraction: c.shrink_fraction,
            centers: c.centers,
            zero_threshold_factor: c.zero_threshold_factor,
            train: (&c.train).into(),
        }
    }
}

impl From<&ExtractConfigDoc> for ExtractConfig {
    fn from(c: &ExtractConfigDoc) -> Self {
        ExtractConfig {
            order: c.order,
            derivative_sample_count: c.derivative_sample_count,
            shrink_fraction: c.shrink_fraction,
            centers: c.centers,
            zero_threshold_factor: c.zero_threshold_factor,
            train: (&c.train).into(),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path, what: &str) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: malformed {what}: {e}", path.display())))
}

fn version_of(doc: &Value, path: &Path) -> Result<u64> {
    doc.get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| CliError::data(format!("{}: missing format_version", path.display())))
}

// ---------------------------------------------------------------------------
// Model files

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowModelDoc {
    pub format_version: u32,
    pub input_dim: usize,
    pub hidden_width: usize,
    /// Row-major `hidden_width x input_dim`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub train_config: Option<TrainConfigDoc>,
    pub training_rmse: Option<f64>,
    /// Box the training samples came from.
    pub bounds: Option<BoundsDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    pub anchors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructedModelDoc {
    pub format_version: u32,
    pub input_dim: usize,
    pub layer1_width: usize,
    pub layer2_width: usize,
    pub layer1_weights: Vec<f64>,
    pub layer1_biases: Vec<f64>,
    /// Row-major `layer2_width x layer1_width`.
    pub layer2_weights: Vec<f64>,
    pub layer2_biases: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    pub gate_magnitude: f64,
    pub lift: f64,
    pub plan: PlanDoc,
    pub expression: Option<String>,
}

/// A loaded model file of either topology.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Shallow { net: Network, train_config: Option<TrainConfig>, training_rmse: Option<f64>, bounds: Option<Bounds> },
    Constructed { net: ConstructedNet, expression: Option<String> },
}

impl Model {
    pub fn as_piecewise(&self) -> &dyn PiecewiseLinear {
        match self {
            Model::Shallow { net, .. } => net,
            Model::Constructed { net, .. } => net,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.as_piecewise().input_dim()
    }

    /// Training box for trained models, segment span for constructed ones.
    pub fn domain(&self) -> Option<Bounds> {
        match self {
            Model::Shallow { bounds, .. } => bounds.clone(),
            Model::Constructed { net, .. } => {
                let bp = net.plan().breakpoints();
                Bounds::interval(bp[0], bp[bp.len() - 1]).ok()
            }
        }
    }
}

pub fn shallow_doc(net: &Network, cfg: Option<&TrainConfig>, rmse: Option<f64>, bounds: Option<&Bounds>) -> ShallowModelDoc {
    ShallowModelDoc {
        format_version: MODEL_VERSION_SHALLOW,
        input_dim: net.input_dim(),
        hidden_width: net.hidden_width(),
        w1: net.w1().to_vec(),
        b1: net.b1().to_vec(),
        w2: net.w2().to_vec(),
        b2: net.b2(),
        train_config: cfg.map(Into::into),
        training_rmse: rmse,
        bounds: bounds.map(Into::into),
    }
}

pub fn save_network(path: &Path, net: &Network, cfg: Option<&TrainConfig>, rmse: Option<f64>, bounds: Option<&Bounds>) -> Result<()> {
    write_json(path, &shallow_doc(net, cfg, rmse, bounds))
}

pub fn save_constructed(path: &Path, net: &ConstructedNet, expression: Option<&str>) -> Result<()> {
    let plan = net.plan();
    let doc = ConstructedModelDoc {
        format_version: MODEL_VERSION_CONSTRUCTED,
        input_dim: 1,
        layer1_width: net.layer1_weights().len(),
        layer2_width: net.layer2_biases().len(),
        layer1_weights: net.layer1_weights().to_vec(),
        layer1_biases: net.layer1_biases().to_vec(),
        layer2_weights: net.layer2_weights().to_vec(),
        layer2_biases: net.layer2_biases().to_vec(),
        output_weights: net.output_weights().to_vec(),
        output_bias: net.output_bias(),
        gate_magnitude: net.gate_magnitude(),
        lift: net.lift(),
        plan: PlanDoc {
            breakpoints: plan.breakpoints().to_vec(),
            slopes: plan.slopes().to_vec(),
            anchors: plan.anchors().to_vec(),
        },
        expression: expression.map(str::to_owned),
    };
    write_json(path, &doc)
}

pub fn load_model(path: &Path) -> Result<Model> {
    if !path.exists() {
        return Err(CliError::data(format!("model not found: {}", path.display())));
    }
    let doc = read_json(path, "model")?;
    match version_of(&doc, path)? {
        v if v == MODEL_VERSION_SHALLOW as u64 => {
            let d: ShallowModelDoc = serde_json::from_value(doc)?;
            if d.hidden_width != d.b1.len() {
                return Err(CliError::data(format!("{}: hidden_width does not match b1", path.display())));
            }
            let net = Network::new(d.input_dim, d.w1, d.b1, d.w2, d.b2)?;
            let bounds = d.bounds.as_ref().map(BoundsDoc::to_bounds).transpose()?;
            Ok(Model::Shallow {
                net,
                train_config: d.train_config.as_ref().map(Into::into),
                training_rmse: d.training_rmse,
                bounds,
            })
        }
        v if v == MODEL_VERSION_CONSTRUCTED as u64 => {
            let d: ConstructedModelDoc = serde_json::from_value(doc)?;
            let plan = SegmentPlan::new(d.plan.breakpoints, d.plan.slopes, d.plan.anchors)?;
            let net = ConstructedNet::from_parts(
                plan,
                d.gate_magnitude,
                d.lift,
                d.layer1_weights,
                d.layer1_biases,
                d.layer2_weights,
                d.layer2_biases,
                d.output_weights,
                d.output_bias,
            )?;
            Ok(Model::Constructed { net, expression: d.expression })
        }
        v => Err(CliError::data(format!("{}: unsupported model format_version {v}", path.display()))),
    }
}

pub fn load_network(path: &Path) -> Result<Network> {
    match load_model(path)? {
        Model::Shallow { net, .. } => Ok(net),
        Model::Constructed { .. } => Err(CliError::data(format!("{}: expected a one-hidden-layer model", path.display()))),
    }
}

// ---------------------------------------------------------------------------
// Polynomial files

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub format_version: u32,
    pub dim: usize,
    pub var_names: Vec<String>,
    /// Descending graded order.
    pub terms: Vec<TermDoc>,
    /// Rendered form for humans; ignored when loading.
    pub display: String,
}

pub fn polynomial_doc(p: &Polynomial, var_names: &[String]) -> PolynomialDoc {
    let names: Vec<&str> = var_names.iter().map(String::as_str).collect();
    PolynomialDoc {
        format_version: POLYNOMIAL_VERSION,
        dim: p.dim(),
        var_names: var_names.to_vec(),
        terms: p.terms().rev().map(|(a, c)| TermDoc { exponents: a.exponents().to_vec(), coefficient: c }).collect(),
        display: p.format(&names, 2),
    }
}

pub fn save_polynomial(path: &Path, p: &Polynomial, var_names: &[String]) -> Result<()> {
    if var_names.len() != p.dim() {
        return Err(CliError::usage(format!("expected {} variable names, got {}", p.dim(), var_names.len())));
    }
    write_json(path, &polynomial_doc(p, var_names))
}

pub fn load_polynomial(path: &Path) -> Result<(Polynomial, Vec<String>)> {
    if !path.exists() {
        return Err(CliError::data(format!("polynomial not found: {}", path.display())));
    }
    let doc = read_json(path, "polynomial")?;
    let v = version_of(&doc, path)?;
    if v != POLYNOMIAL_VERSION as u64 {
        return Err(CliError::data(format!("{}: unsupported polynomial format_version {v}", path.display())));
    }
    let d: PolynomialDoc = serde_json::from_value(doc)?;
    let p = Polynomial::from_terms(d.dim, d.terms.into_iter().map(|t| (MultiIndex::new(t.exponents), t.coefficient)))?;
    Ok((p, d.var_names))
}

// ---------------------------------------------------------------------------
// Chain directories

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEntryDoc {
    pub index: Vec<u32>,
    pub file: String,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainManifestDoc {
    pub format_version: u32,
    pub dim: usize,
    pub order: u32,
    /// Sampling box per level, level 0 first.
    pub level_bounds: Vec<BoundsDoc>,
    pub networks: Vec<ChainEntryDoc>,
    pub config: Option<ExtractConfigDoc>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn model_file_name(alpha: &MultiIndex) -> String {
    format!("{}.model", alpha.label())
}

/// Writes `manifest.json` plus one `d_*.model` per multi-index into `dir`.
pub fn save_chain(dir: &Path, chain: &DerivativeChain, cfg: Option<&ExtractConfig>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut networks = Vec::with_capacity(chain.len());
    for (alpha, net) in chain.nets() {
        let file = model_file_name(alpha);
        let level = alpha.order() as usize;
        let tc = cfg.map(|c| c.train.with_seed(c.train.seed.wrapping_add(level as u64)));
        let rmse = chain.level_rmse()[alpha];
        save_network(&dir.join(&file), net, tc.as_ref(), Some(rmse), Some(chain.bounds(level)))?;
        networks.push(ChainEntryDoc { index: alpha.exponents().to_vec(), file, rmse });
    }
    let doc = ChainManifestDoc {
        format_version: CHAIN_VERSION,
        dim: chain.dim(),
        order: chain.order(),
        level_bounds: chain.all_bounds().iter().map(Into::into).collect(),
        networks,
        config: cfg.map(Into::into),
    };
    write_json(&dir.join(MANIFEST_NAME), &doc)
}

pub fn load_chain(dir: &Path) -> Result<(DerivativeChain, Option<ExtractConfig>)> {
    let manifest_path: PathBuf = dir.join(MANIFEST_NAME);
    if !manifest_path.exists() {
        return Err(CliError::data(format!("chain manifest not found: {}", manifest_path.display())));
    }
    let doc = read_json(&manifest_path, "chain manifest")?;
    let v = version_of(&doc, &manifest_path)?;
    if v != CHAIN_VERSION as u64 {
        return Err(CliError::data(format!("{}: unsupported chain format_version {v}", manifest_path.display())));
    }
    let m: ChainManifestDoc = serde_json::from_value(doc)?;
    let mut nets = BTreeMap::new();
    let mut rmse = BTreeMap::new();
    for e in &m.networks {
        let alpha = MultiIndex::new(e.index.clone());
        nets.insert(alpha.clone(), load_network(&dir.join(&e.file))?);
        rmse.insert(alpha, e.rmse);
    }
    let bounds = m.level_bounds.iter().map(BoundsDoc::to_bounds).collect::<Result<Vec<_>>>()?;
    let chain = DerivativeChain::from_parts(m.dim, m.order, nets, rmse, bounds)?;
    Ok((chain, m.config.as_ref().map(Into::into)))
}
