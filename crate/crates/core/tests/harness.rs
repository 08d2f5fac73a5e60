use std::f64::consts::PI;

use rgg_core::analytic::{expected_k1_exact, k_prime_expectation_bracket, r_of_mu};
use rgg_core::census::CensusConfig;
use rgg_core::harness::{hitting_sweep, row, run_census_trials, scaling_sweep, second_moment_check, TrialPlan, DEFAULT_BUDGET};
use rgg_core::RandomSeed;

fn cfg(ell_max: usize) -> CensusConfig {
    CensusConfig::new(0.4, ell_max).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn identical_plans_give_identical_rows_on_any_pool() {
    let plan = TrialPlan::with_mu(1024, 1.0, 5000, RandomSeed::new(7), cfg(3)).unwrap();
    let a = in_pool(1, || run_census_trials(&plan).unwrap());
    let b = in_pool(3, || run_census_trials(&plan).unwrap());
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.censuses, b.censuses);
    for r in &a.rows {
        assert!(r.ci_low <= r.point_estimate && r.point_estimate <= r.ci_high, "{r:?}");
    }
    // second-moment sandwich on the same campaign
    for ell in 2..=3 {
        let sm = second_moment_check(&a, ell).unwrap();
        assert!(sm.holds, "{sm:?}");
    }
}

#[test]
fn isolated_mean_matches_exact_expectation() {
    let plan = TrialPlan::with_mu(4096, 1.0, 1500, RandomSeed::new(11), cfg(2)).unwrap();
    let c = run_census_trials(&plan).unwrap();
    let k1 = c.row(row::MEAN_K1, None).unwrap();
    let expected = expected_k1_exact(4096, r_of_mu(4096, 1.0).unwrap()).unwrap();
    let half = k1.ci_high - k1.point_estimate;
    assert!((k1.point_estimate - expected).abs() <= 3.0 * half, "{k1:?} vs {expected}");
}

/// `E K'_{ε,2}` on the torus: `C(n,2) ∫₀^{εr} 2πρ (1 - A(ρ))^{n-2} dρ`, with
/// `A(ρ)` the area of the union of two radius-`r` disks at distance `ρ`.
fn exact_pair_cluster_mean(n: usize, r: f64, eps: f64) -> f64 {
    let union = |p: f64| {
        let lens = 2.0 * r * r * (p / (2.0 * r)).acos() - 0.5 * p * (4.0 * r * r - p * p).sqrt();
        2.0 * PI * r * r - lens
    };
    let f = |p: f64| 2.0 * PI * p * (1.0 - union(p)).powi(n as i32 - 2);
    // composite Simpson, smooth integrand
    let steps = 4000;
    let h = eps * r / steps as f64;
    let mut s = f(0.0) + f(eps * r);
    for k in 1..steps {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let nf = n as f64;
    nf * (nf - 1.0) / 2.0 * s * h / 3.0
}

#[test]
fn narrow_pair_mean_sits_inside_the_bracket() {
    for (n, trials) in [(1 << 10, 3000), (1 << 12, 1500), (1 << 14, 600), (1 << 16, 300)] {
        let plan = TrialPlan::with_mu(n, 1.0, trials, RandomSeed::new(5), cfg(2)).unwrap();
        let c = run_census_trials(&plan).unwrap();
        let m = c.row(row::MEAN_KPRIME, Some(2)).unwrap();
        let exact = exact_pair_cluster_mean(n, plan.radius, 0.4);
        let half = m.ci_high - m.point_estimate;
        assert!((m.point_estimate - exact).abs() <= 1.5 * half, "n={n}: {} vs exact {exact}", m.point_estimate);
        let b = k_prime_expectation_bracket(n as u64, plan.radius, 2, 0.4).unwrap();
        assert!(b.lower_shape <= exact && exact <= b.upper_shape, "n={n}: {b:?} vs {exact}");
        assert!(b.upper_shape / exact <= 10.0);
    }
}

#[test]
fn reseeding_keeps_the_normalized_column_within_overlap() {
    let run = |seed| scaling_sweep(&[1024], 2, 1.0, 2000, RandomSeed::new(seed), cfg(2), DEFAULT_BUDGET).unwrap();
    let (a, b) = (run(1), run(2));
    assert_ne!(a.campaigns[0].censuses, b.campaigns[0].censuses);
    assert!(a.rows[0].normalized.overlaps(&b.rows[0].normalized));
    let expect = a.rows[0].p_hat.estimate * 1024f64.ln();
    assert!((a.rows[0].normalized.estimate - expect).abs() < 1e-12);
}

#[test]
fn close_isolated_pairs_thin_out_with_n() {
    let s = hitting_sweep(&[1 << 10, 1 << 12, 1 << 14], 400, 2.0, RandomSeed::new(8), DEFAULT_BUDGET).unwrap();
    let z: Vec<f64> = s.rows.iter().map(|r| r.p_z_positive.unwrap().estimate).collect();
    for w in z.windows(2) {
        let drop = w[0] / w[1];
        assert!((1.2..=4.0).contains(&drop), "{z:?}");
    }
    assert!(s.rows.iter().all(|r| r.r_c_dominates));
    assert!(s.trials.iter().flatten().all(|t| t.radii.r_c >= t.radii.r_i));
}

#[test]
fn budget_refuses_before_running() {
    let plan = TrialPlan::with_mu(1 << 20, 1.0, 1000, RandomSeed::new(1), cfg(2)).unwrap();
    assert!(matches!(run_census_trials(&plan), Err(rgg_core::Error::BudgetExceeded { .. })));
}
