use std::f64::consts::TAU;

use proptest::prelude::*;
use skewlab::cones::{self, ConeSpec, LeafDensity};
use skewlab::dfa::{
    build_variable_quadrature, markov_oracle, quotient_mass_distribution, transfer_leaf_integral_dfa,
    transfer_leaf_integral_dfa_direct, MarkovSpec, MarkovSystem,
};
use skewlab::leafmeasure::{aggregate_to_parent, build_quadrature, change_of_variables_check, integrate_leaf};
use skewlab::maxent::quotient_mem;
use skewlab::numerics::isotonic_increasing;
use skewlab::statistics::{fit_decay, ks_test, Estimate};
use skewlab::systems::{make_doubling_solenoid, make_mp_solenoid, make_perturbed_family, BaseMap};
use skewlab::transfer::{transfer_leaf_integral, transfer_leaf_integral_direct, Potential};
use skewlab::{Point, SkewProduct};

fn trig(c: &[(f64, i32, f64, f64)]) -> impl Fn(&Point) -> f64 + '_ {
    move |x: &Point| {
        c.iter()
            .map(|&(a, m, w, ph)| a * (TAU * m as f64 * x.base + w * (x.fiber[0] - x.fiber[1]) + ph).cos())
            .sum()
    }
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, i32, f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -4..=4i32, -3.0..3.0f64, 0.0..TAU), 1..4)
}

fn systems() -> impl Strategy<Value = SkewProduct> {
    prop_oneof![
        (0.01..0.5f64).prop_map(|l| make_doubling_solenoid(l, 0.5).unwrap()),
        (0.1..0.9f64, 0.01..0.5f64).prop_map(|(a, l)| make_mp_solenoid(a, l).unwrap()),
        (-0.5..0.5f64).prop_map(|t| make_perturbed_family(t, 0.05).unwrap()),
    ]
}

fn markov() -> impl Strategy<Value = MarkovSystem> {
    (1..3u32, 1..3u32, 1..3u32, 0..3u32).prop_map(|(a, b, c, d)| {
        MarkovSystem::new(MarkovSpec { counts: vec![vec![a, b], vec![c, d]], ..MarkovSpec::default() }).unwrap()
    })
}

/// Positive density built from smooth modes, so it is Hölder on every leaf.
fn density(x: &[Point], amp: f64, k: i32) -> LeafDensity {
    LeafDensity::new(x.iter().map(|p| 1.0 + amp * (TAU * k as f64 * p.base + p.fiber[0]).sin()).collect(), 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leaf_weights_sum_to_one(sys in systems(), y in 0.0..1.0f64, n in 0usize..11) {
        let q = build_quadrature(&sys, y, n).unwrap();
        prop_assert_eq!(q.len(), 1 << n);
        prop_assert!((q.weight_sum() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn refinement_is_consistent(sys in systems(), y in 0.0..1.0f64, n in 1usize..9) {
        let fine = build_quadrature(&sys, y, n).unwrap();
        let coarse = build_quadrature(&sys, y, n - 1).unwrap();
        prop_assert_eq!(aggregate_to_parent(&fine), coarse.weights);
    }

    #[test]
    fn change_of_variables_holds(sys in systems(), c in coeffs(), y in 0.0..1.0f64, j in 0usize..2, n in 1usize..8) {
        let f = trig(&c);
        let r = change_of_variables_check(&sys, |x| f(&x.point()), y, j, n).unwrap();
        prop_assert!(r < 1e-12, "residual {}", r);
    }

    #[test]
    fn preimage_inverts_the_map(sys in systems(), y in 0.0..1.0f64, n in 1usize..8) {
        let q = build_quadrature(&sys, y, n).unwrap();
        for x in q.nodes.iter().step_by(7) {
            let back = sys.preimage(x).unwrap();
            let fwd = sys.map(&back.point());
            prop_assert!((fwd.base - x.base).abs() < 1e-12);
            prop_assert!((fwd.fiber[0] - x.fiber[0]).abs() < 1e-12 && (fwd.fiber[1] - x.fiber[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn base_inverses_are_inverses(alpha in 0.05..1.0f64, x in 0.0..1.0f64) {
        let g = BaseMap::manneville_pomeau(alpha).unwrap();
        let j = g.branch_of(x);
        let y = g.eval(x);
        prop_assert!((g.inverse(j, y) - x).abs() < 1e-10);
    }

    #[test]
    fn skew_product_covers_base(sys in systems(), th in 0.0..1.0f64, zx in -0.5..0.5f64, zy in -0.5..0.5f64) {
        let p = Point::new(th, [zx, zy]);
        prop_assert_eq!(sys.map(&p).base, sys.base.eval(th));
    }

    #[test]
    fn transfer_identity(sys in systems(), c in coeffs(), y in 0.0..1.0f64, n in 1usize..7, amp in 0.0..0.5f64) {
        let q = build_quadrature(&sys, y, n).unwrap();
        let rho = LeafDensity::new(q.nodes.iter().map(|x| 1.0 + amp * (TAU * x.base * 3.0 + x.fiber[1]).cos()).collect(), 1.0);
        let pot = Potential::Constant(0.3);
        let f = trig(&c);
        let a = transfer_leaf_integral(&sys, &f, &rho, &q, &pot).unwrap();
        let b = transfer_leaf_integral_direct(&sys, &f, &rho, &q, &pot).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn transfer_of_constant_is_constant(sys in systems(), y in 0.0..1.0f64, n in 1usize..8) {
        let q = build_quadrature(&sys, y, n).unwrap();
        let one = |_: &Point| 1.0;
        let v = transfer_leaf_integral(&sys, one, &LeafDensity::constant(q.len(), 1.0, 1.0), &q, &Potential::default()).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-13);
        prop_assert!((integrate_leaf(|_| 1.0, &q) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hilbert_metric_axioms(n in 3usize..8, seed in 0u64..1000, t in 0.1..10.0f64) {
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5 * ((seed + i as u64) % 7) as f64 / 7.0) / n as f64).collect();
        let spec = ConeSpec::hoelder_from_points(2.0, 1.0, &x, |a: &f64, b: &f64| (a - b).abs()).unwrap();
        let mk = |k: f64, ph: f64| LeafDensity::new(x.iter().map(|v| 1.0 + 0.1 * (TAU * k * v + ph).sin()).collect(), 1.0);
        let s = seed as f64;
        let (u, v, w) = (mk(1.0, s), mk(2.0, s * 0.3), mk(1.0, s * 1.7 + 1.0));
        prop_assume!(cones::in_cone(&u, &spec) && cones::in_cone(&v, &spec) && cones::in_cone(&w, &spec));
        let uv = cones::theta(&u, &v, &spec).unwrap();
        prop_assert!((uv - cones::theta(&v, &u, &spec).unwrap()).abs() < 1e-8);
        prop_assert!(cones::theta(&u, &w, &spec).unwrap() <= uv + cones::theta(&v, &w, &spec).unwrap() + 1e-8);
        prop_assert_eq!(cones::theta(&u, &u.scaled(t), &spec).unwrap(), 0.0);
        prop_assert!(cones::theta(&u.scaled(t), &v, &spec).unwrap() - uv < 1e-8);
    }

    #[test]
    fn positivity_cone_closed_form(vals in prop::collection::vec((0.1..10.0f64, 0.1..10.0f64), 2..20)) {
        let u = LeafDensity::new(vals.iter().map(|p| p.0).collect(), 1.0);
        let v = LeafDensity::new(vals.iter().map(|p| p.1).collect(), 1.0);
        let r: Vec<f64> = vals.iter().map(|p| p.1 / p.0).collect();
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let th = cones::theta(&u, &v, &ConeSpec::positivity(vals.len())).unwrap();
        prop_assert!((th - (hi / lo).ln()).abs() < 1e-12);
    }

    #[test]
    fn hoelder_cone_dominates_positivity(sys in systems(), y in 0.0..1.0f64, amp in 0.0..0.02f64, k in 1i32..3) {
        let q = build_quadrature(&sys, y, 4).unwrap();
        let pts: Vec<Point> = q.nodes.iter().map(|x| x.point()).collect();
        let spec = ConeSpec::hoelder_from_points(1.0, 1.0, &pts, skewlab::systems::distance).unwrap();
        let u = density(&pts, amp, k);
        let v = density(&pts, 0.01, k + 1);
        prop_assume!(cones::in_cone(&u, &spec) && cones::in_cone(&v, &spec));
        let h = cones::theta(&u, &v, &spec).unwrap();
        let p = cones::theta(&u, &v, &ConeSpec::positivity(pts.len())).unwrap();
        prop_assert!(h + 1e-9 >= p);
    }

    #[test]
    fn variable_weights_are_products(ms in markov(), u in 0.0..1.0f64, n in 0usize..8) {
        for r in 0..ms.rectangles() {
            let leaf = build_variable_quadrature(&ms, r, u, n).unwrap();
            prop_assert!((leaf.quad.weight_sum() - 1.0).abs() < 1e-14);
            for (x, &w) in leaf.quad.nodes.iter().zip(&leaf.quad.weights) {
                let mut expected = 1.0;
                let mut cur = r;
                for &e in &x.itinerary {
                    expected /= ms.branch_count(cur) as f64;
                    cur = ms.edges[e as usize].source;
                }
                prop_assert_eq!(w, expected);
            }
        }
    }

    #[test]
    fn dfa_transfer_identity(ms in markov(), c in coeffs(), n in 1usize..6, seed in 0u64..100) {
        let r = (seed % 2) as usize;
        let mut rng = skewlab::rng::stream(seed, 99, 0);
        let u = ms.random_leaf(r, &mut rng);
        let leaf = build_variable_quadrature(&ms, r, u, n).unwrap();
        let rho: Vec<f64> = leaf.quad.nodes.iter().map(|x| 1.5 + (x.base * 9.0 + x.fiber[0]).sin()).collect();
        let f = trig(&c);
        let pot = Potential::default();
        let a = transfer_leaf_integral_dfa(&ms, &f, &rho, &leaf, &pot).unwrap();
        let b = transfer_leaf_integral_dfa_direct(&ms, &f, &rho, &leaf, &pot).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cylinder_masses_are_projective(ms in markov(), depth in 0usize..6) {
        let parent = quotient_mass_distribution(&ms, depth);
        let children = quotient_mass_distribution(&ms, depth + 1);
        prop_assert!((children.iter().map(|c| c.mass).sum::<f64>() - 1.0).abs() < 1e-12);
        for p in &parent {
            let s: f64 = children
                .iter()
                .filter(|c| c.rect == p.rect && c.word.starts_with(&p.word))
                .map(|c| c.mass)
                .sum();
            prop_assert!((s - p.mass).abs() < 1e-15);
        }
    }

    #[test]
    fn markov_oracle_decays_to_zero(ms in markov(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let v = [a, b];
        let c0 = markov_oracle(&ms, &v, &v, 0);
        prop_assert!(c0 >= -1e-12);
        prop_assert!(markov_oracle(&ms, &v, &v, 60).abs() < 1e-6 * (1.0 + c0));
        let ones = [1.0, 1.0];
        prop_assert!(markov_oracle(&ms, &v, &ones, 3).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_geometric_rates(tau in 0.1..0.9f64, k in 0.1..10.0f64) {
        let lags: Vec<usize> = (0..8).collect();
        let corr: Vec<Estimate> = lags.iter().map(|&n| Estimate::new(k * tau.powi(n as i32), 1e-12)).collect();
        let fit = fit_decay(&lags, &corr);
        prop_assert!(fit.conclusive);
        prop_assert!((fit.tau - tau).abs() < 1e-9 && (fit.k - k).abs() < 1e-8 * k);
    }

    #[test]
    fn ks_p_value_is_a_probability(data in prop::collection::vec(-3.0..3.0f64, 5..200)) {
        let (d, p) = ks_test(&data, |x| ((x + 3.0) / 6.0).clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&d) && (0.0..=1.0).contains(&p));
    }

    #[test]
    fn isotonic_fit_is_monotone(y in prop::collection::vec(-5.0..5.0f64, 1..40)) {
        let w = vec![1.0; y.len()];
        let fit = isotonic_increasing(&y, &w);
        prop_assert!(fit.windows(2).all(|p| p[0] <= p[1] + 1e-12));
        let (a, b): (f64, f64) = (y.iter().sum(), fit.iter().sum());
        prop_assert!((a - b).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn quotient_cdf_is_monotone(alpha in 0.2..0.9f64, x in 0.0..1.0f64, dx in 0.0..0.1f64) {
        let nu = quotient_mem(&BaseMap::manneville_pomeau(alpha).unwrap(), 1 << 10).unwrap();
        prop_assert!(nu.cdf(x) <= nu.cdf((x + dx).min(1.0)) + 1e-15);
        prop_assert!((nu.total_mass() - 1.0).abs() < 1e-12);
        let back = nu.inverse_cdf(nu.cdf(x));
        prop_assert!((nu.cdf(back) - nu.cdf(x)).abs() < 1e-9);
    }
}
