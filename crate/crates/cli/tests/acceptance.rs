//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use splinetaylor::cli::main_with_args;
use splinetaylor::formats;
use splinetaylor_core::construct::{construct_1d, plan_segments, verify_construction};
use splinetaylor_core::degree::{finite_difference_degree, loglog_degree};
use splinetaylor_core::mlp::init_network;
use splinetaylor_core::poly::{average, taylor_to_monomial};
use splinetaylor_core::spline::{boundary_distance, gradient, knots_1d};
use splinetaylor_core::taylor::chain_values;
use splinetaylor_core::{Bounds, ConstructedNet, DerivativeChain, LogLogMode, MultiIndex, Network, Polynomial};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cli(args: &[&str]) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["splinetaylor"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out, &mut err);
    assert_eq!(code, 0, "{args:?} failed: {}", String::from_utf8_lossy(&err));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Paths produced by one run of an experiment.
struct Artifacts {
    model: PathBuf,
    poly: PathBuf,
    report: PathBuf,
    comparison: PathBuf,
}

impl Artifacts {
    fn files(&self) -> [&PathBuf; 4] {
        [&self.model, &self.poly, &self.report, &self.comparison]
    }
}

// Root training gets 1000 epochs here (one Adam step per epoch for 200
// samples at batch 256); the 32-epoch default leaves the root net far from
// the data.
fn run_quadratic(dir: &Path) -> Artifacts {
    let data = dir.join("quad.csv");
    let a = Artifacts {
        model: dir.join("quad.model"),
        poly: dir.join("quad.poly.json"),
        report: dir.join("quad.report.json"),
        comparison: dir.join("quad.compare.json"),
    };
    cli(&["synth", "--expr", "quad_0.5_-2_1", "--samples", "200", "--domain", "1:26", "--spacing", "nonuniform", "--out", s(&data)]);
    cli(&[
        "extract", s(&data), "--order", "3", "--epochs", "1000", "--seed", "7", "--prune", "0.005",
        "--out", s(&a.poly), "--report", s(&a.report), "--model-out", s(&a.model), "--canonical",
    ]);
    cli(&["compare", "--model", s(&a.model), "--poly", s(&a.poly), "--expr", "quad_0.5_-2_1", "--out", s(&a.comparison), "--canonical"]);
    a
}

fn run_newton(dir: &Path) -> Artifacts {
    let data = dir.join("ma.csv");
    let a = Artifacts {
        model: dir.join("ma.model"),
        poly: dir.join("ma.poly.json"),
        report: dir.join("ma.report.json"),
        comparison: dir.join("ma.compare.json"),
    };
    cli(&["synth", "--expr", "newton_ma", "--samples", "400", "--domain", "5:10,3:8", "--noise", "0.1", "--seed", "7", "--out", s(&data)]);
    cli(&[
        "extract", s(&data), "--order", "2", "--epochs", "300", "--seed", "7", "--vars", "m,a",
        "--out", s(&a.poly), "--report", s(&a.report), "--model-out", s(&a.model), "--canonical",
    ]);
    cli(&["compare", "--model", s(&a.model), "--poly", s(&a.poly), "--expr", "newton_ma", "--out", s(&a.comparison), "--canonical"]);
    a
}

fn coeff(p: &Polynomial, e: &[u32]) -> f64 {
    p.coefficient(&MultiIndex::new(e.to_vec()))
}

fn criterion_1(a: &Artifacts) -> Outcome {
    let (p, _) = formats::load_polynomial(&a.poly).unwrap();
    let c = json(&a.comparison);
    let mean = c["mean_abs_error_poly"].as_f64().unwrap();
    let bound = c["abs_error_upper_bound"].as_f64().unwrap();
    let c2 = coeff(&p, &[2]);
    let pass = p.degree() == Some(2) && (0.40..=0.60).contains(&c2) && mean <= 1.0 && bound <= 3.0;
    outcome(pass, format!("{p}; degree {:?}, x^2 coeff {c2:.4}, mean abs error {mean:.4}, upper bound {bound:.4}", p.degree()))
}

fn criterion_2(a: &Artifacts) -> Outcome {
    let (p, _) = formats::load_polynomial(&a.poly).unwrap();
    let c = json(&a.comparison);
    let mean = c["mean_abs_error_poly"].as_f64().unwrap();
    let net = c["mean_abs_error_net"].as_f64().unwrap();
    let bound = c["abs_error_upper_bound"].as_f64().unwrap();
    let ma = coeff(&p, &[1, 1]);
    let squares = [coeff(&p, &[2, 0]), coeff(&p, &[0, 2])];
    let checks = [
        ("ma coeff", (0.9..=1.1).contains(&ma)),
        ("pure squares", squares.iter().all(|c| c.abs() <= 0.1)),
        ("mean abs error", mean <= 0.15),
        ("vs network", mean <= 1.5 * net),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "{}; ma {ma:.4}, squares ({:.4}, {:.4}), mean abs error {mean:.4}, network {net:.4} (ratio {:.2}), upper bound {bound:.4}{}",
            p.format(&["m", "a"], 3),
            squares[0],
            squares[1],
            mean / net,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    )
}

fn criterion_3() -> Outcome {
    // (x0, F, F', F'', F''') and the printed expansion (c2, c1, c0) per row.
    let rows: [(f64, [f64; 4], [f64; 3]); 5] = [
        (7.0, [11.5, 4.89, 1.02, 0.00], [0.51, -2.25, 2.26]),
        (8.0, [17.0, 5.91, 1.02, 0.00], [0.51, -2.25, 2.36]),
        (9.0, [23.5, 6.93, 1.02, 0.00], [0.51, -2.25, 2.44]),
        (10.0, [30.6, 7.95, 1.02, 0.00], [0.51, -2.25, 2.1]),
        (11.0, [38.8, 8.97, 1.02, 0.00], [0.51, -2.25, 1.84]),
    ];
    let mut worst = 0.0f64;
    let mut polys = Vec::new();
    for (x0, d, want) in rows {
        let derivs: BTreeMap<MultiIndex, f64> = (0..4).map(|k| (MultiIndex::new(vec![k]), d[k as usize])).collect();
        let p = taylor_to_monomial(&[x0], &derivs, 3).unwrap();
        for (k, w) in want.iter().enumerate() {
            worst = worst.max((coeff(&p, &[2 - k as u32]) - w).abs());
        }
        worst = worst.max(coeff(&p, &[3]).abs());
        polys.push(p);
    }
    let avg = average(&polys).unwrap();
    for (k, w) in [0.51, -2.25, 2.2].iter().enumerate() {
        worst = worst.max((coeff(&avg, &[2 - k as u32]) - w).abs());
    }
    outcome(worst <= 0.01, format!("average {avg}; worst coefficient deviation {worst:.4}"))
}

fn spread_biases(net: &Network, rng: &mut ChaCha8Rng) -> Network {
    let b1: Vec<f64> = net.b1().iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    Network::new(net.input_dim(), net.w1().to_vec(), b1, net.w2().to_vec(), 0.0).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-5;
    let (mut worst, mut probes, mut skipped) = (0.0f64, 0, 0);
    for i in 0..10u64 {
        let n = 1 + (i % 3) as usize;
        let net = spread_biases(&init_network(n, 64, 1000 + i).unwrap(), &mut rng);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if boundary_distance(&net, &x).unwrap() < 1e-4 {
                skipped += 1;
                continue;
            }
            let g = gradient(&net, &x).unwrap();
            for axis in 0..n {
                let (mut p, mut m) = (x.clone(), x.clone());
                p[axis] += h;
                m[axis] -= h;
                let fd = (net.forward(&p).unwrap() - net.forward(&m).unwrap()) / (2.0 * h);
                worst = worst.max((g[axis] - fd).abs());
            }
            probes += 1;
        }
    }
    outcome(worst <= 1e-4, format!("{probes} probes ({skipped} near a boundary skipped), max deviation {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut intervals) = (0.0f64, 0);
    for seed in 0..5u64 {
        let net = spread_biases(&init_network(1, 64, 50 + seed).unwrap(), &mut rng);
        let knots = knots_1d(&net, &Bounds::interval(-1.5, 1.5).unwrap()).unwrap();
        for w in knots.windows(2) {
            let (m, n) = (w[0], w[1]);
            let secant = (net.forward(&[n]).unwrap() - net.forward(&[m]).unwrap()) / (n - m);
            let mid = gradient(&net, &[0.5 * (m + n)]).unwrap()[0];
            worst = worst.max((secant - mid).abs() / mid.abs().max(1e-300));
            intervals += 1;
        }
    }
    outcome(worst <= 1e-8, format!("{intervals} knot-free intervals, max relative deviation {worst:.2e}"))
}

fn build(f: fn(f64) -> f64, df: fn(f64) -> f64, s: usize) -> ConstructedNet {
    let plan = plan_segments(f, df, 1.0, 4.0, s).unwrap();
    construct_1d(&plan, plan.default_gate_magnitude()).unwrap()
}

fn criterion_6() -> Outcome {
    let sq = |x: f64| x * x;
    let net3 = build(sq, |x| 2.0 * x, 3);
    let w = net3.layer1_weights();
    let b = net3.layer1_biases();
    // Left gate (-1, +x0), carrier (1, -x0), right gate (1, -x1).
    let triple = w[..3] == [-1.0, 1.0, 1.0] && b[..3] == [1.0, -1.0, -2.0];
    let r3 = verify_construction(&net3, sq, 1.05, 3.95, 2000).unwrap();
    let net100 = build(sq, |x| 2.0 * x, 100);
    let r100 = verify_construction(&net100, sq, 1.0, 4.0, 5000).unwrap();
    let pass = triple && r3.max_abs_error <= 0.3 && r100.max_abs_error <= 1e-3 && r3.slope_match && r100.slope_match;
    outcome(
        pass,
        format!(
            "first triple w {:?} b {:?}; 3 segments max {:.4}, 100 segments max {:.2e}, slopes match {}",
            &w[..3],
            &b[..3],
            r3.max_abs_error,
            r100.max_abs_error,
            r3.slope_match && r100.slope_match
        ),
    )
}

fn criterion_7() -> Outcome {
    let nets: BTreeMap<MultiIndex, ConstructedNet> = [
        (MultiIndex::new(vec![0]), build(|x| x * x, |x| 2.0 * x, 25)),
        (MultiIndex::new(vec![1]), build(|x| 2.0 * x, |_| 2.0, 25)),
        (MultiIndex::new(vec![2]), build(|_| 2.0, |_| 0.0, 25)),
    ]
    .into_iter()
    .collect();
    let rmse = nets.keys().map(|a| (a.clone(), 0.0)).collect();
    let b = Bounds::interval(1.0, 4.0).unwrap();
    let chain = DerivativeChain::from_parts(1, 2, nets, rmse, vec![b.clone(), b.clone(), b]).unwrap();
    let v = chain_values(&chain, &[2.0]).unwrap();
    let vals: Vec<f64> = v.values.values().copied().collect();
    let p = taylor_to_monomial(&[2.0], &v.values, 2).unwrap();
    let dev = (0..=520).map(|i| 1.2 + 2.6 * i as f64 / 520.0).map(|x| (p.eval(&[x]).unwrap() - x * x).abs()).fold(0.0, f64::max);
    let pass = (vals[0] - 4.0).abs() < 0.01 && (vals[1] - 4.0).abs() < 0.01 && vals[2] == 2.0 && dev <= 0.5;
    outcome(pass, format!("chain at 2: {vals:.4?}; {p}; max deviation on [1.2, 3.8] {dev:.4}"))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut found = Vec::new();
    for d in 0..=4i32 {
        let ys: Vec<f64> = (0..15).map(|i| {
            let x = i as f64 * 0.5 - 2.0;
            (0..=d).map(|k| (k + 1) as f64 * x.powi(k)).sum()
        }).collect();
        let e = finite_difference_degree(&ys, 1e-9).unwrap();
        ok &= e.degree == d as u32;
        found.push(e.degree);
    }
    let x = [1e4];
    let raws = [
        (loglog_degree(|x| x * x, &x, LogLogMode::Direct).unwrap().raw.unwrap(), 2.0),
        (loglog_degree(|x| -x * x * x, &x, LogLogMode::Negated).unwrap().raw.unwrap(), 3.0),
        (loglog_degree(|x| x * x - 100.0, &x, LogLogMode::Lifted(200.0)).unwrap().raw.unwrap(), 2.0),
    ];
    ok &= raws.iter().all(|(r, d)| (r - d).abs() <= 0.05);
    let shown: Vec<String> = raws.iter().map(|r| format!("{:.4}", r.0)).collect();
    outcome(ok, format!("finite differences {found:?}; log-log raw {}", shown.join(", ")))
}

fn criterion_9(first: &[Artifacts], second: &[Artifacts]) -> Outcome {
    let mut differing = Vec::new();
    let mut compared = 0;
    for (a, b) in first.iter().zip(second) {
        for (x, y) in a.files().iter().zip(b.files()) {
            compared += 1;
            if fs::read(x).unwrap() != fs::read(y).unwrap() {
                differing.push(x.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
    }
    outcome(differing.is_empty(), format!("{compared} files compared, differing: {differing:?}"))
}

fn main() {
    // `cargo test -- --list` and filters come through here; this suite has a
    // single entry and ignores them.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let run1 = [run_quadratic(first.path()), run_newton(first.path())];

    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "quadratic recovery", criterion_1(&run1[0])),
        (2, "Newton's-law recovery", criterion_2(&run1[1])),
        (3, "Taylor-table golden", criterion_3()),
        (4, "gradient exactness", criterion_4()),
        (5, "slope identity", criterion_5()),
        (6, "constructive builder", criterion_6()),
        (7, "training-free pipeline", criterion_7()),
        (8, "degree estimation", criterion_8()),
    ];
    let run2 = [run_quadratic(second.path()), run_newton(second.path())];
    results.push((9, "determinism and persistence", criterion_9(&run1, &run2)));

    let mut failures = 0;
    for (n, name, o) in &results {
        if !o.pass {
            failures += 1;
        }
        println!("criterion {n} ({name}): {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failures} failed", results.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
