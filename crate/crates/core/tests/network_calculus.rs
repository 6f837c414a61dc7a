//! Gradients, affine pieces and knots checked against independent numerics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splinetaylor_core::mlp::init_network;
use splinetaylor_core::spline::{activation_pattern, boundary_distance, gradient, knots_1d, local_affine};
use splinetaylor_core::{Bounds, Network};

const STEP: f64 = 1e-5;

fn central_difference(net: &Network, x: &[f64], axis: usize) -> f64 {
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    hi[axis] += STEP;
    lo[axis] -= STEP;
    (net.forward(&hi).unwrap() - net.forward(&lo).unwrap()) / (2.0 * STEP)
}

/// Glorot init keeps all biases at zero, so every knot passes through the
/// origin. Random biases spread the regions out.
fn spread_biases(net: &Network, rng: &mut ChaCha8Rng) -> Network {
    let b1: Vec<f64> = net.b1().iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    Network::new(net.input_dim(), net.w1().to_vec(), b1, net.w2().to_vec(), 0.3).unwrap()
}

#[test]
fn gradient_matches_central_differences_away_from_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for (i, n) in [1usize, 2, 3, 1, 2, 3, 1, 2, 3, 2].into_iter().enumerate() {
        let net = spread_biases(&init_network(n, 64, 100 + i as u64).unwrap(), &mut rng);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if boundary_distance(&net, &x).unwrap() < 1e-4 {
                continue;
            }
            let g = gradient(&net, &x).unwrap();
            for axis in 0..n {
                let fd = central_difference(&net, &x, axis);
                assert!((g[axis] - fd).abs() <= 1e-4, "net {i} axis {axis}: {} vs {fd}", g[axis]);
            }
            checked += 1;
        }
    }
    assert!(checked > 900);
}

#[test]
fn affine_piece_reproduces_forward_under_small_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = spread_biases(&init_network(2, 32, 9).unwrap(), &mut rng);
    for _ in 0..100 {
        let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        let piece = local_affine(&net, &x).unwrap();
        let pattern = activation_pattern(&net, &x).unwrap();
        let r = boundary_distance(&net, &x).unwrap();
        let dx = [0.3 * r, -0.2 * r];
        let y = [x[0] + dx[0], x[1] + dx[1]];
        assert_eq!(activation_pattern(&net, &y).unwrap(), pattern);
        assert!((net.forward(&y).unwrap() - piece.eval(&y)).abs() <= 1e-10);
        assert!((net.forward(&x).unwrap() - piece.eval(&x)).abs() <= 1e-10);
    }
}

#[test]
fn secant_slope_equals_midpoint_gradient_between_knots() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..5u64 {
        let net = spread_biases(&init_network(1, 64, seed).unwrap(), &mut rng);
        let knots = knots_1d(&net, &Bounds::interval(-1.0, 1.0).unwrap()).unwrap();
        let mut edges = vec![-1.0];
        edges.extend(&knots);
        edges.push(1.0);
        for w in edges.windows(2) {
            let (m, n) = (w[0], w[1]);
            if n - m < 1e-9 {
                continue;
            }
            let secant = (net.forward(&[n]).unwrap() - net.forward(&[m]).unwrap()) / (n - m);
            let mid = gradient(&net, &[0.5 * (m + n)]).unwrap()[0];
            let scale = mid.abs().max(1.0);
            assert!((secant - mid).abs() <= 1e-8 * scale, "seed {seed} [{m}, {n}]: {secant} vs {mid}");
        }
    }
}

#[test]
fn knots_sit_where_a_unit_switches() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = spread_biases(&init_network(1, 16, 4).unwrap(), &mut rng);
    let knots = knots_1d(&net, &Bounds::interval(-3.0, 3.0).unwrap()).unwrap();
    assert!(knots.windows(2).all(|w| w[0] < w[1]));
    for k in knots {
        let left = activation_pattern(&net, &[k - 1e-9]).unwrap();
        let right = activation_pattern(&net, &[k + 1e-9]).unwrap();
        assert_ne!(left, right, "no switch at {k}");
    }
}
