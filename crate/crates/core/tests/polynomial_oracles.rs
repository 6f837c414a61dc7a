use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splinetaylor_core::poly::{average, eval_centered, taylor_to_monomial};
use splinetaylor_core::{MultiIndex, Polynomial};

/// Evaluates Σ c_α x^α with an explicit power loop, independent of the crate.
fn naive_eval(p: &Polynomial, x: &[f64]) -> f64 {
    p.terms()
        .map(|(a, c)| {
            let mut m = c;
            for (xi, e) in x.iter().zip(a.exponents()) {
                for _ in 0..*e {
                    m *= xi;
                }
            }
            m
        })
        .sum()
}

/// Horner-form evaluation of a dense 1D polynomial.
fn horner(coeffs_low_first: &[f64], x: f64) -> f64 {
    coeffs_low_first.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn random_derivs(rng: &mut ChaCha8Rng, dim: usize, order: u32) -> BTreeMap<MultiIndex, f64> {
    MultiIndex::all_up_to(dim, order).into_iter().map(|a| (a, rng.gen_range(-3.0..3.0))).collect()
}

#[test]
fn expansion_matches_centered_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (dim, order) in [(1usize, 4u32), (2, 3), (3, 2)] {
        let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let derivs = random_derivs(&mut rng, dim, order);
        let p = taylor_to_monomial(&center, &derivs, order).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let direct = eval_centered(&center, &derivs, &x).unwrap();
            let got = p.eval(&x).unwrap();
            let scale = direct.abs().max(1.0);
            assert!((got - direct).abs() <= 1e-9 * scale, "dim {dim}: {got} vs {direct}");
            assert!((naive_eval(&p, &x) - got).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn one_dimensional_expansion_matches_horner() {
    // (x - 2)^3 / 6 * 6 + (x - 2) = x^3 - 6x^2 + 13x - 10
    let derivs: BTreeMap<MultiIndex, f64> =
        [(vec![0], 0.0), (vec![1], 1.0), (vec![2], 0.0), (vec![3], 6.0)].into_iter().map(|(e, v)| (MultiIndex::new(e), v)).collect();
    let p = taylor_to_monomial(&[2.0], &derivs, 3).unwrap();
    let dense = [-10.0, 13.0, -6.0, 1.0];
    for (k, c) in dense.iter().enumerate() {
        assert_eq!(p.coefficient(&MultiIndex::new(vec![k as u32])), *c);
    }
    for x in [-1.5, 0.0, 0.25, 3.0, 7.0] {
        assert!((p.eval(&[x]).unwrap() - horner(&dense, x)).abs() <= 1e-12);
    }
}

fn poly_strategy(dim: usize) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((proptest::collection::vec(0u32..4, dim), -5.0f64..5.0), 0..8)
        .prop_map(move |terms| Polynomial::from_terms(dim, terms.into_iter().map(|(e, c)| (MultiIndex::new(e), c))).unwrap())
}

proptest! {
    #[test]
    fn pruning_changes_values_by_at_most_eps_times_dropped_monomials(
        p in poly_strategy(2),
        eps in 0.0f64..2.0,
        x in proptest::collection::vec(-1.0f64..1.0, 2),
    ) {
        let q = p.prune(eps);
        let dropped: f64 = p.terms().filter(|(_, c)| c.abs() <= eps).map(|(a, _)| a.monomial(&x).abs()).sum();
        let diff = (p.eval(&x).unwrap() - q.eval(&x).unwrap()).abs();
        prop_assert!(diff <= eps * dropped + 1e-12);
        prop_assert!(q.terms().all(|(_, c)| c.abs() > eps));
    }

    #[test]
    fn average_is_linear(
        p in poly_strategy(2),
        q in poly_strategy(2),
        x in proptest::collection::vec(-2.0f64..2.0, 2),
    ) {
        let avg = average(&[p.clone(), q.clone()]).unwrap();
        let want = 0.5 * (p.eval(&x).unwrap() + q.eval(&x).unwrap());
        prop_assert!((avg.eval(&x).unwrap() - want).abs() <= 1e-9 * want.abs().max(1.0));
        let same = average(&[p.clone(), p.clone(), p.clone()]).unwrap();
        prop_assert!((same.eval(&x).unwrap() - p.eval(&x).unwrap()).abs() <= 1e-9 * p.eval(&x).unwrap().abs().max(1.0));
    }
}
