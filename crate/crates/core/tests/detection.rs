mod common;

use common::{ks_p_value, ks_statistic};
use leo_pla::detection::{
    decide, estimate_cdf, estimate_npsds, gamma_p, gamma_q, optimize_threshold, optimize_threshold_default, p_detect,
    p_false_alarm, threshold_objective, DetectorConfig,
};
use leo_pla::signal::simulate_observation_statistical;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

/// Fraction of `n` Gamma(T, β/T) estimates (units of Θ_a) outside the
/// acceptance interval, sampled with rand_distr in parallel chunks.
fn mc_outside(alpha: f64, beta: f64, t: usize, n: u64, seed: u64) -> f64 {
    let chunks = 64u64;
    let per = n / chunks;
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003) + c);
            let g = Gamma::new(t as f64, beta / t as f64).unwrap();
            (0..per)
                .filter(|_| {
                    let x = g.sample(&mut rng);
                    x < 1.0 - alpha || x > 1.0 + alpha
                })
                .count() as u64
        })
        .sum();
    hits as f64 / (per * chunks) as f64
}

#[test]
fn closed_forms_match_gamma_sampling() {
    for &(alpha, beta, t) in &[(0.5, 2.0, 10), (0.3, 0.5, 20), (0.7, 1.5, 10)] {
        let n = 10_000_000;
        let pd = mc_outside(alpha, beta, t, n, 1);
        let pf = mc_outside(alpha, 1.0, t, n, 2);
        let ad = p_detect(alpha, beta, t).unwrap();
        let af = p_false_alarm(alpha, t).unwrap();
        assert!((pd - ad).abs() < 1e-3, "P_d({alpha},{beta},{t}): mc {pd} vs {ad}");
        assert!((pf - af).abs() < 1e-3, "P_f({alpha},{t}): mc {pf} vs {af}");
    }
}

#[test]
fn estimate_cdf_fits_simulation() {
    let (theta, t) = (3.0, 20);
    let mut xs: Vec<f64> = (0..10_000u64)
        .map(|s| estimate_npsds(&simulate_observation_statistical(theta, t, s).unwrap()).unwrap())
        .collect();
    let n = xs.len();
    let d = ks_statistic(&mut xs, |x| estimate_cdf(x, theta, t).unwrap());
    assert!(ks_p_value(d, n) > 0.01, "D = {d}");
}

#[test]
fn probabilities_decrease_in_alpha() {
    for &(beta, t) in &[(0.3, 10), (2.0, 10), (4.0, 20), (1.0, 5)] {
        let mut prev_d = f64::INFINITY;
        let mut prev_f = f64::INFINITY;
        for k in 1..1000 {
            let a = k as f64 / 1000.0;
            let d = p_detect(a, beta, t).unwrap();
            let f = p_false_alarm(a, t).unwrap();
            assert!(d <= prev_d + 1e-15 && f <= prev_f + 1e-15, "beta {beta} T {t} alpha {a}");
            prev_d = d;
            prev_f = f;
        }
    }
}

#[test]
fn false_alarm_decreases_in_slot_length() {
    for k in 1..20 {
        let a = k as f64 / 20.0;
        let mut prev = 1.0;
        for t in [1, 2, 5, 10, 20, 50, 100] {
            let f = p_false_alarm(a, t).unwrap();
            assert!(f <= prev + 1e-15, "alpha {a} T {t}");
            prev = f;
        }
    }
}

#[test]
fn optimum_improves_with_slot_length_and_distance_from_one() {
    for beta in [0.2, 0.5, 2.0, 3.0, 5.0] {
        let o10 = optimize_threshold_default(beta, 10).unwrap();
        let o20 = optimize_threshold_default(beta, 20).unwrap();
        assert!(o20.objective <= o10.objective + 1e-6, "beta {beta}");
        assert!(o10.p_detect > o10.p_false_alarm);
    }
    let obj = |b: f64| optimize_threshold_default(b, 10).unwrap().objective;
    assert!(obj(3.0) < obj(2.0) && obj(2.0) < obj(1.5));
    assert!(obj(0.2) < obj(0.5) && obj(0.5) < obj(0.8));
}

#[test]
fn optimizer_matches_grid_search() {
    for &(beta, t) in &[(0.3, 10), (1.7, 15), (2.5, 20), (0.8, 30)] {
        let o = optimize_threshold(beta, t, 1e-8).unwrap();
        let (ga, gv) = (1..20_000)
            .map(|k| {
                let a = k as f64 / 20_000.0;
                (a, threshold_objective(a, beta, t).unwrap())
            })
            .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        assert!(o.objective <= gv + 1e-9, "beta {beta}: {} vs grid {gv}", o.objective);
        assert!((o.alpha - ga).abs() < 1e-3, "beta {beta}: {} vs grid {ga}", o.alpha);
    }
}

#[test]
fn optimizer_flat_at_beta_one() {
    let o = optimize_threshold_default(1.0, 10).unwrap();
    assert!((o.objective - 1.0).abs() < 1e-12);
    assert_eq!(o.p_detect, o.p_false_alarm);
}

#[test]
fn decide_boundaries() {
    let cfg = DetectorConfig::new(2.0, 0.25, 10).unwrap();
    assert_eq!(cfg.acceptance_interval(), (1.5, 2.5));
    assert!(!decide(1.5, &cfg));
    assert!(!decide(2.5, &cfg));
    assert!(!decide(2.0, &cfg));
    assert!(decide(1.4999999, &cfg));
    assert!(decide(2.5000001, &cfg));
    assert!(decide(0.0, &cfg));
    assert!(DetectorConfig::new(2.0, 1.0, 10).is_err());
    assert!(DetectorConfig::new(2.0, 0.0, 10).is_err());
    assert!(DetectorConfig::new(0.0, 0.5, 10).is_err());
    assert!(DetectorConfig::new(1.0, 0.5, 0).is_err());
}

#[test]
fn invalid_probability_arguments() {
    assert!(p_detect(0.5, 0.0, 10).is_err());
    assert!(p_detect(0.5, f64::NAN, 10).is_err());
    assert!(p_detect(1.2, 2.0, 10).is_err());
    assert!(p_false_alarm(0.5, 0).is_err());
    assert!(optimize_threshold(2.0, 10, 0.0).is_err());
}

fn poisson_q(a: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..a {
        term *= x / k as f64;
        sum += term;
    }
    (-x).exp() * sum
}

proptest! {
    #[test]
    fn p_plus_q_is_one(a in 0.05..200.0f64, x in 0.0..400.0f64) {
        let s = gamma_p(a, x).unwrap() + gamma_q(a, x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-13, "a {a} x {x}: {s}");
    }

    #[test]
    fn q_matches_poisson_sum(a in 1u32..40, x in 0.01..60.0f64) {
        let q = gamma_q(a as f64, x).unwrap();
        let r = poisson_q(a, x);
        prop_assert!((q - r).abs() <= 1e-12 * r.max(1e-300) || (q - r).abs() < 1e-290, "a {a} x {x}: {q} vs {r}");
    }

    #[test]
    fn beta_one_identity(alpha in 1e-6..0.999999f64, t in 1usize..60) {
        prop_assert_eq!(p_detect(alpha, 1.0, t).unwrap(), p_false_alarm(alpha, t).unwrap());
    }

    #[test]
    fn probabilities_in_unit_interval(alpha in 1e-6..0.999999f64, beta in 1e-3..1e3f64, t in 1usize..200) {
        let d = p_detect(alpha, beta, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
