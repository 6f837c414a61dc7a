use std::collections::BTreeMap;

use splinetaylor_core::construct::{construct_1d, plan_segments, verify_construction};
use splinetaylor_core::poly::taylor_to_monomial;
use splinetaylor_core::taylor::chain_values;
use splinetaylor_core::{Bounds, ConstructedNet, DerivativeChain, MultiIndex, PiecewiseLinear};

fn build(f: fn(f64) -> f64, df: fn(f64) -> f64, a: f64, b: f64, s: usize) -> ConstructedNet {
    let plan = plan_segments(f, df, a, b, s).unwrap();
    construct_1d(&plan, plan.default_gate_magnitude()).unwrap()
}

#[test]
fn hundred_segments_track_the_square_closely() {
    let net = build(|x| x * x, |x| 2.0 * x, 1.0, 4.0, 100);
    let r = verify_construction(&net, |x| x * x, 1.0, 4.0, 3000).unwrap();
    assert!(r.max_abs_error <= 1e-3, "{}", r.max_abs_error);
    assert!(r.slope_match);
    // Midpoint tangents miss a parabola by (h/2)^2 at the segment ends.
    let h: f64 = 3.0 / 100.0;
    assert!(r.max_abs_error <= (h / 2.0).powi(2) + 1e-9);
}

#[test]
fn constructed_chain_recovers_the_square() {
    let f = build(|x| x * x, |x| 2.0 * x, 1.0, 4.0, 25);
    let df = build(|x| 2.0 * x, |_| 2.0, 1.0, 4.0, 25);
    let ddf = build(|_| 2.0, |_| 0.0, 1.0, 4.0, 25);
    let nets: BTreeMap<MultiIndex, ConstructedNet> =
        [(MultiIndex::new(vec![0]), f), (MultiIndex::new(vec![1]), df), (MultiIndex::new(vec![2]), ddf)].into_iter().collect();
    let rmse: BTreeMap<MultiIndex, f64> = nets.keys().map(|a| (a.clone(), 0.0)).collect();
    let box_ = Bounds::interval(1.0, 4.0).unwrap();
    let chain = DerivativeChain::from_parts(1, 2, nets, rmse, vec![box_.clone(), box_.clone(), box_]).unwrap();

    // Breakpoints sit at 1 + 0.12k, so 2 is strictly inside a segment.
    let x0 = 2.0;
    let v = chain_values(&chain, &[x0]).unwrap();
    assert!((v.values[&MultiIndex::new(vec![0])] - 4.0).abs() < 0.01);
    assert!((v.values[&MultiIndex::new(vec![1])] - 4.0).abs() < 0.01);
    assert_eq!(v.values[&MultiIndex::new(vec![2])], 2.0);

    let p = taylor_to_monomial(&[x0], &v.values, 2).unwrap();
    let worst = (0..=260).map(|i| 1.2 + 2.6 * i as f64 / 260.0).map(|x| (p.eval(&[x]).unwrap() - x * x).abs()).fold(0.0, f64::max);
    assert!(worst <= 0.5, "{worst}");
    assert_eq!(chain.net(&MultiIndex::new(vec![2])).unwrap().output(&[3.3]).unwrap(), 2.0);
}
