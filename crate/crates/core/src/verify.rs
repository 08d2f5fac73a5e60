//! The desk-scale acceptance suite.
//!
//! Nine criteria check the implementation against brute-force oracles,
//! closed forms and the limiting behaviour near the connectivity threshold.
//! Each criterion produces a [`CriterionReport`] carrying every number it
//! computed; criterion 9 reruns criteria 2 to 6 on a pool with a different
//! worker count and compares those numbers bit for bit.

use std::time::Instant;

use serde::Serialize;

use crate::analytic::{area_bounds, expected_k1_exact, i_beta_asymptotic, i_beta_quadrature, r_of_mu, ClusterGeometry, IBetaParams};
use crate::census::CensusConfig;
use crate::geometry::{disk_union_area_mc, torus_distance, PointSet, TorusPoint};
use crate::harness::{hitting_sweep, isolated_counts, run_census_trials, scaling_sweep, CensusCampaign, TrialPlan, DEFAULT_BUDGET};
use crate::oracle::{bfs_components, i_beta_pair_closed_form};
use crate::rgg::{build_rgg, build_rgg_bruteforce, components, label_components, sample_points, RandomSeed};
use crate::stats::{factorial_moment, mean_estimate, poisson_tv_distance};
use crate::{Error, Result};

/// Sizes and trial counts of one suite run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySettings {
    pub quick: bool,
    pub seed: u64,
    pub oracle_instances: usize,
    pub isolated_ns: Vec<usize>,
    pub isolated_mus: Vec<f64>,
    pub isolated_trials: u64,
    pub poisson_n: usize,
    pub poisson_trials: u64,
    pub theta_ns: Vec<usize>,
    pub theta_trials: u64,
    pub hitting_ns: Vec<usize>,
    pub hitting_trials: u64,
    pub kappa: f64,
    pub area_clusters: usize,
    pub area_samples: u64,
    /// Worker count of the determinism rerun; `None` picks one that differs
    /// from the current pool.
    pub rerun_threads: Option<usize>,
    pub enforce_time_limits: bool,
}

impl VerifySettings {
    pub fn full() -> Self {
        VerifySettings {
            quick: false,
            seed: 20_240_601,
            oracle_instances: 50,
            isolated_ns: vec![1000, 4096],
            isolated_mus: vec![0.5, 1.0, 2.0],
            isolated_trials: 20_000,
            poisson_n: 10_000,
            poisson_trials: 10_000,
            theta_ns: vec![1 << 10, 1 << 12, 1 << 14, 1 << 16],
            theta_trials: 5000,
            hitting_ns: vec![1 << 10, 1 << 12, 1 << 14],
            hitting_trials: 500,
            kappa: 2.0,
            area_clusters: 500,
            area_samples: 200_000,
            rerun_threads: None,
            enforce_time_limits: true,
        }
    }

    /// Reduced sizes (every `n <= 4096`) for a run of a few minutes.
    pub fn quick() -> Self {
        VerifySettings {
            quick: true,
            isolated_trials: 4000,
            poisson_n: 4096,
            poisson_trials: 4000,
            theta_ns: vec![1 << 10, 1 << 12],
            theta_trials: 3000,
            hitting_ns: vec![1 << 10, 1 << 12],
            hitting_trials: 300,
            area_clusters: 200,
            area_samples: 100_000,
            ..Self::full()
        }
    }

    fn census_cfg(&self) -> CensusConfig {
        CensusConfig {
            epsilon: 0.4,
            ell_max: 3,
            ..CensusConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub time_limit: Option<f64>,
    /// Every estimate the criterion produced, in a fixed order.
    #[serde(skip)]
    pub numbers: Vec<f64>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    passed: bool,
    detail: String,
    numbers: Vec<f64>,
}

fn timed(id: u32, name: &'static str, limit: Option<f64>, enforce: bool, body: impl FnOnce() -> Result<Outcome>) -> CriterionReport {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail, numbers) = match outcome {
        Ok(o) => (o.passed, o.detail, o.numbers),
        Err(e) => (false, format!("error: {e}"), Vec::new()),
    };
    if let Some(limit) = limit.filter(|_| enforce) {
        if seconds > limit {
            passed = false;
            detail.push_str(&format!("; exceeded time limit of {limit} s"));
        }
    }
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds,
        time_limit: limit,
        numbers,
    }
}

fn sorted_edges(edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut e: Vec<_> = edges.into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect();
    e.sort_unstable();
    e
}

/// Instances on which the grid graph, union-find labelling or adjacency-free
/// labelling disagree with the brute-force graph and BFS.
fn oracle_mismatches(settings: &VerifySettings) -> Result<(usize, Vec<String>)> {
    let base = RandomSeed::new(settings.seed).trial(1);
    let count = settings.oracle_instances.max(1);
    let mut checked = 0;
    let mut bad = Vec::new();
    for i in 0..count {
        let n = 50 + i * 250 / (count - 1).max(1);
        let ps = sample_points(n, base.trial(i as u64))?;
        let rt = r_of_mu(n as u64, 1.0)?;
        // one radius is an exact pair distance, so the closed threshold matters
        let exact = torus_distance(ps.point(0), ps.point(1));
        for r in [0.0, 0.5 * rt, rt, exact, 0.6] {
            checked += 1;
            let fast = build_rgg(&ps, r)?;
            let slow = build_rgg_bruteforce(&ps, r)?;
            let bfs = bfs_components(&slow);
            if sorted_edges(fast.edges()) != sorted_edges(slow.edges()) {
                bad.push(format!("edges n={n} r={r}"));
            } else if components(&fast) != bfs || label_components(&ps, r)? != bfs {
                bad.push(format!("components n={n} r={r}"));
            }
        }
    }
    Ok((checked, bad))
}

fn criterion_oracle(s: &VerifySettings) -> CriterionReport {
    timed(1, "oracle equivalence", Some(30.0), s.enforce_time_limits, || {
        let (checked, bad) = oracle_mismatches(s)?;
        Ok(Outcome {
            passed: bad.is_empty(),
            detail: if bad.is_empty() {
                format!("{checked} graphs identical to brute force and BFS")
            } else {
                format!("{} of {checked} mismatched, first: {}", bad.len(), bad[0])
            },
            numbers: vec![checked as f64],
        })
    })
}

fn criterion_isolated_mean(s: &VerifySettings) -> CriterionReport {
    timed(2, "isolated-vertex mean", Some(600.0), s.enforce_time_limits, || {
        let mut numbers = Vec::new();
        let mut worst: f64 = 0.0;
        for &n in &s.isolated_ns {
            for &mu in &s.isolated_mus {
                let r = r_of_mu(n as u64, mu)?;
                let samples = isolated_counts(n, r, s.isolated_trials, RandomSeed::new(s.seed), DEFAULT_BUDGET)?;
                let values: Vec<f64> = samples.iter().map(|&k| k as f64).collect();
                let m = mean_estimate(&values)?;
                let expected = expected_k1_exact(n as u64, r)?;
                let z = (m.mean - expected).abs() / m.std_error;
                worst = worst.max(z);
                numbers.extend([m.mean, m.std_error, expected]);
            }
        }
        Ok(Outcome {
            passed: worst <= 3.0,
            detail: format!(
                "{} settings, largest deviation {worst:.2} standard errors (limit 3)",
                s.isolated_ns.len() * s.isolated_mus.len()
            ),
            numbers,
        })
    })
}

fn criterion_poisson(s: &VerifySettings) -> (CriterionReport, Result<CensusCampaign>) {
    let mut campaign = Err(Error::Invariant("not run".into()));
    let report = timed(3, "Poisson law of isolated vertices", Some(1200.0), s.enforce_time_limits, || {
        let plan = TrialPlan::with_mu(s.poisson_n, 1.0, s.poisson_trials, RandomSeed::new(s.seed), s.census_cfg())?;
        campaign = run_census_trials(&plan);
        let c = campaign.as_ref().map_err(|e| Error::Invariant(e.to_string()))?;
        let k1 = c.k1_samples();
        let tv = poisson_tv_distance(&k1, 1.0)?;
        let mut numbers = vec![tv];
        let mut worst: f64 = 0.0;
        let mut moments = Vec::new();
        for k in 1..=3 {
            let m = factorial_moment(&k1, k)?;
            worst = worst.max((m.mean - 1.0).abs() / m.std_error);
            numbers.extend([m.mean, m.std_error]);
            moments.push(format!("{:.4}", m.mean));
        }
        Ok(Outcome {
            passed: tv <= 0.08 && worst <= 3.0,
            detail: format!(
                "TV = {tv:.4} (limit 0.08), factorial moments [{}], largest deviation {worst:.2} SE (limit 3)",
                moments.join(", ")
            ),
            numbers,
        })
    });
    (report, campaign)
}

fn criterion_theta_band(s: &VerifySettings) -> (CriterionReport, Result<Vec<CensusCampaign>>) {
    let mut campaigns = Err(Error::Invariant("not run".into()));
    let report = timed(4, "Theta band of Pr(K~_2 > 0)", Some(2700.0), s.enforce_time_limits, || {
        let sweep = match scaling_sweep(&s.theta_ns, 2, 1.0, s.theta_trials, RandomSeed::new(s.seed), s.census_cfg(), DEFAULT_BUDGET) {
            Ok(sw) => sw,
            Err(e) => {
                let msg = e.to_string();
                campaigns = Err(e);
                return Err(Error::Invariant(msg));
            }
        };
        let rows = &sweep.rows;
        let norm: Vec<f64> = rows.iter().map(|r| r.normalized.estimate).collect();
        let (lo, hi) = norm.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let spread = hi / lo;
        let decreasing = rows.windows(2).all(|w| w[1].p_hat.estimate < w[0].p_hat.estimate);
        let dominated = rows.iter().all(|r| r.p_hat.low - r.p_prime.high <= r.p_prime.high);
        let mut numbers = Vec::new();
        for r in rows {
            numbers.extend([r.p_hat.estimate, r.p_hat.low, r.p_hat.high, r.p_prime.estimate, r.normalized.estimate]);
        }
        let table: Vec<String> = rows
            .iter()
            .map(|r| format!("n={} p={:.4} p'={:.4}", r.n, r.p_hat.estimate, r.p_prime.estimate))
            .collect();
        campaigns = Ok(sweep.campaigns);
        Ok(Outcome {
            passed: spread <= 4.0 && decreasing && dominated,
            detail: format!(
                "{}; normalized max/min {spread:.3} (limit 4), strictly decreasing: {decreasing}, clique clusters dominate: {dominated}",
                table.join(", ")
            ),
            numbers,
        })
    });
    (report, campaigns)
}

fn criterion_counter_order(s: &VerifySettings, campaigns: &[&Result<CensusCampaign>]) -> CriterionReport {
    timed(5, "counter inequality", None, s.enforce_time_limits, || {
        let mut trials = 0u64;
        let mut violations = 0u64;
        let mut missing = Vec::new();
        for c in campaigns {
            match c {
                Ok(c) => {
                    for census in &c.censuses {
                        trials += 1;
                        violations += census.check_counter_order().is_err() as u64;
                    }
                }
                Err(e) => missing.push(e.to_string()),
            }
        }
        Ok(Outcome {
            passed: violations == 0 && missing.is_empty() && trials > 0,
            detail: if missing.is_empty() {
                format!("{violations} violations in {trials} trials")
            } else {
                format!("campaign failed: {}", missing.join("; "))
            },
            numbers: vec![trials as f64, violations as f64],
        })
    })
}

fn criterion_hitting(s: &VerifySettings) -> CriterionReport {
    timed(6, "r_c equals r_i", Some(900.0), s.enforce_time_limits, || {
        let sweep = hitting_sweep(&s.hitting_ns, s.hitting_trials, s.kappa, RandomSeed::new(s.seed), DEFAULT_BUDGET)?;
        let rows = &sweep.rows;
        let first_ok = rows[0].p_equal.estimate >= 0.8;
        let trend = rows
            .windows(2)
            .all(|w| w[1].p_equal.estimate >= w[0].p_equal.estimate || w[1].p_equal.overlaps(&w[0].p_equal));
        let dominates = rows.iter().all(|r| r.r_c_dominates);
        let z: Vec<f64> = rows.iter().map(|r| r.p_z_positive.map_or(f64::NAN, |i| i.estimate)).collect();
        let z_falls = z.windows(2).all(|w| w[1] < w[0]);
        let mut numbers = Vec::new();
        for r in rows {
            numbers.extend([r.p_equal.estimate, r.p_equal.low, r.p_equal.high]);
        }
        numbers.extend(&z);
        for t in sweep.trials.iter().flatten() {
            numbers.extend([t.radii.r_i, t.radii.r_c]);
        }
        let table: Vec<String> = rows
            .iter()
            .zip(&z)
            .map(|(r, z)| format!("n={} P(r_c=r_i)={:.3} P(Z>0)={z:.3}", r.n, r.p_equal.estimate))
            .collect();
        Ok(Outcome {
            passed: first_ok && trend && dominates && z_falls,
            detail: format!(
                "{}; first >= 0.8: {first_ok}, non-decreasing: {trend}, r_c >= r_i always: {dominates}, P(Z>0) falling: {z_falls}",
                table.join(", ")
            ),
            numbers,
        })
    })
}

/// A cluster of `ell` points whose first point is leftmost and whose
/// farthest point sits at distance exactly `rho` from it.
fn sample_cluster(seed: RandomSeed, ell: usize, r: f64) -> Result<(PointSet, f64)> {
    let mut rng = seed.rng();
    let rho = (1.0 - rng.next_f64()) * r / 2.0;
    let anchor = TorusPoint::new(rng.next_f64(), rng.next_f64());
    let half_turn = |u: f64| (u - 0.5) * std::f64::consts::PI;
    let mut pts = vec![anchor];
    let theta = half_turn(rng.next_f64());
    pts.push(anchor.translated(rho * theta.cos(), rho * theta.sin()));
    for _ in 2..ell {
        let d = rho * rng.next_f64().sqrt();
        let t = half_turn(rng.next_f64());
        pts.push(anchor.translated(d * t.cos(), d * t.sin()));
    }
    Ok((PointSet::new(pts)?, rho))
}

fn criterion_area(s: &VerifySettings) -> CriterionReport {
    timed(7, "area sandwich", Some(300.0), s.enforce_time_limits, || {
        let r = 0.05;
        let base = RandomSeed::new(s.seed).trial(7);
        let mut inside = 0usize;
        for c in 0..s.area_clusters {
            let seed = base.trial(c as u64);
            let ell = 2 + c % 3;
            let (cluster, rho) = sample_cluster(seed, ell, r)?;
            let b = area_bounds(ClusterGeometry { rho, r })?;
            let a = disk_union_area_mc(&cluster, r, s.area_samples, seed.trial(1))?;
            let slack = 4.0 * a.std_error;
            inside += (b.lower - slack < a.estimate && a.estimate < b.upper + slack) as usize;
        }
        let frac = inside as f64 / s.area_clusters as f64;
        Ok(Outcome {
            passed: frac >= 0.99,
            detail: format!("{inside} of {} clusters inside the bounds (need 99%)", s.area_clusters),
            numbers: vec![frac],
        })
    })
}

fn threshold_radius(n: u64) -> f64 {
    ((n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt()
}

fn criterion_quadrature(s: &VerifySettings) -> CriterionReport {
    timed(8, "quadrature of I(beta)", Some(10.0), s.enforce_time_limits, || {
        let mut worst: f64 = 0.0;
        for beta in [1.0 / 6.0, 1.0, 2.5] {
            for epsilon in [0.05, 0.25, 0.45] {
                for n in [1_000u64, 100_000, 10_000_000] {
                    let p = IBetaParams {
                        beta,
                        ell: 2,
                        epsilon,
                        n,
                        r: threshold_radius(n),
                    };
                    let exact = i_beta_pair_closed_form(p);
                    worst = worst.max((i_beta_quadrature(p)? - exact).abs() / exact);
                }
            }
        }
        let mut monotone = true;
        let mut ratios = Vec::new();
        for beta in [1.0 / 6.0, 2.5] {
            for ell in [2u32, 3] {
                let gaps = [10_000u64, 1_000_000, 100_000_000]
                    .iter()
                    .map(|&n| {
                        let p = IBetaParams {
                            beta,
                            ell,
                            epsilon: 0.4,
                            n,
                            r: threshold_radius(n),
                        };
                        let ratio = i_beta_quadrature(p)? / i_beta_asymptotic(p)?;
                        ratios.push(ratio);
                        Ok((1.0 - ratio).abs())
                    })
                    .collect::<Result<Vec<f64>>>()?;
                monotone &= gaps.windows(2).all(|w| w[1] < w[0]);
            }
        }
        let mut numbers = vec![worst];
        numbers.extend(&ratios);
        Ok(Outcome {
            passed: worst <= 1e-9 && monotone,
            detail: format!("27-point grid max relative error {worst:.2e} (limit 1e-9), ratio approaches 1 monotonically: {monotone}"),
            numbers,
        })
    })
}

/// Criteria 2 to 6 in order; criterion 5 reads the campaigns of 3 and 4.
fn statistical_criteria(s: &VerifySettings, report: &mut dyn FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let mut emit = |r: CriterionReport, out: &mut Vec<CriterionReport>| {
        report(&r);
        out.push(r);
    };
    emit(criterion_isolated_mean(s), &mut out);
    let (r3, poisson) = criterion_poisson(s);
    emit(r3, &mut out);
    let (r4, theta) = criterion_theta_band(s);
    emit(r4, &mut out);
    let mut all = vec![&poisson];
    let theta: Vec<Result<CensusCampaign>> = match theta {
        Ok(v) => v.into_iter().map(Ok).collect(),
        Err(e) => vec![Err(e)],
    };
    all.extend(theta.iter());
    emit(criterion_counter_order(s, &all), &mut out);
    emit(criterion_hitting(s), &mut out);
    out
}

fn criterion_determinism(s: &VerifySettings, first: &[CriterionReport]) -> CriterionReport {
    let current = rayon::current_num_threads();
    let threads = s.rerun_threads.unwrap_or(if current > 1 { 1 } else { 4 });
    timed(9, "determinism", None, s.enforce_time_limits, || {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
        let second = pool.install(|| statistical_criteria(s, &mut |_| {}));
        let mut compared = 0usize;
        let mut differing = Vec::new();
        for (a, b) in first.iter().zip(&second) {
            let same = a.numbers.len() == b.numbers.len() && a.numbers.iter().zip(&b.numbers).all(|(x, y)| x.to_bits() == y.to_bits());
            compared += a.numbers.len();
            if !same || a.numbers.is_empty() {
                differing.push(a.id.to_string());
            }
        }
        Ok(Outcome {
            passed: differing.is_empty() && first.len() == second.len(),
            detail: if differing.is_empty() {
                format!("{compared} numbers identical on {current} and {threads} worker threads")
            } else {
                format!("criteria {} differ or produced nothing on rerun with {threads} threads", differing.join(", "))
            },
            numbers: vec![compared as f64],
        })
    })
}

/// Run every criterion, calling `report` as each one finishes.
pub fn run_suite(settings: &VerifySettings, mut report: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    for r in [criterion_oracle(settings)] {
        report(&r);
        out.push(r);
    }
    let stats = statistical_criteria(settings, &mut report);
    let r9 = criterion_determinism(settings, &stats);
    out.extend(stats);
    for r in [criterion_area(settings), criterion_quadrature(settings), r9] {
        report(&r);
        out.push(r);
    }
    out.sort_by_key(|r| r.id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_have_the_requested_radius() {
        for c in 0..200u64 {
            let ell = 2 + (c % 3) as usize;
            let (ps, rho) = sample_cluster(RandomSeed::new(c), ell, 0.05).unwrap();
            assert_eq!(ps.len(), ell);
            assert!(rho > 0.0 && rho <= 0.025);
            let a = ps.point(0);
            let far = ps.points().iter().map(|&q| torus_distance(a, q)).fold(0.0, f64::max);
            assert!((far - rho).abs() < 1e-12);
            // the anchor is leftmost along the unwrapped x axis
            assert!(ps.points().iter().all(|q| (q.x() - a.x()).rem_euclid(1.0) <= rho + 1e-12));
        }
    }

    #[test]
    fn fast_criteria_pass() {
        let s = VerifySettings {
            oracle_instances: 10,
            area_clusters: 30,
            area_samples: 20_000,
            ..VerifySettings::quick()
        };
        for r in [criterion_oracle(&s), criterion_area(&s), criterion_quadrature(&s)] {
            assert!(r.passed, "{}", r.line());
        }
    }
}
