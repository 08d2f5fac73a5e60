//! Seeded Monte Carlo campaigns over independent trials.
//!
//! Trial `k` of a campaign samples its points from `master.trial(k)`, so
//! every trial is a pure function of `(n, r, master, k)`. Trials run on the
//! current rayon pool and are collected in trial order; all estimates are
//! reduced sequentially from that ordered vector, which makes every output
//! bit-identical for any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{mu_of, r_of_mu};
use crate::census::{census, CensusConfig, ComponentCensus};
use crate::process::{count_close_isolated_pairs, hitting_radii, HittingRadii, IsolatedPairConfig};
use crate::rgg::{isolated_vertices, sample_points, RandomSeed};
use crate::stats::{factorial_moment, mean_estimate, wilson_interval, Interval};
use crate::{Error, Result};

/// Default cap on `n · trials` point placements per campaign.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

fn check_budget(placements: u128, budget: u64) -> Result<()> {
    if placements > u128::from(budget) {
        Err(Error::BudgetExceeded {
            requested: placements,
            budget,
        })
    } else {
        Ok(())
    }
}

/// Run `trial(k)` for `k in 0..trials` on the current pool, in trial order.
pub fn run_trials<T, F>(trials: u64, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..trials).into_par_iter().map(|k| trial(k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialPlan {
    pub n: usize,
    pub mu: f64,
    pub radius: f64,
    pub trials: u64,
    pub master_seed: RandomSeed,
    pub census_cfg: CensusConfig,
    pub kappa: f64,
    pub budget: u64,
}

impl TrialPlan {
    /// Plan at the radius where `n e^{-π r² n} = mu`.
    pub fn with_mu(n: usize, mu: f64, trials: u64, master_seed: RandomSeed, census_cfg: CensusConfig) -> Result<Self> {
        let radius = r_of_mu(n as u64, mu)?;
        Self::build(n, mu, radius, trials, master_seed, census_cfg)
    }

    pub fn with_radius(n: usize, radius: f64, trials: u64, master_seed: RandomSeed, census_cfg: CensusConfig) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::param("r", "radius must be non-negative"));
        }
        Self::build(n, mu_of(n as u64, radius), radius, trials, master_seed, census_cfg)
    }

    fn build(n: usize, mu: f64, radius: f64, trials: u64, master_seed: RandomSeed, census_cfg: CensusConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one point"));
        }
        if trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        census_cfg.validate()?;
        Ok(TrialPlan {
            n,
            mu,
            radius,
            trials,
            master_seed,
            census_cfg,
            kappa: crate::process::DEFAULT_KAPPA,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn placements(&self) -> u128 {
        self.n as u128 * u128::from(self.trials)
    }
}

/// One named estimate with its 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub name: String,
    pub ell: Option<usize>,
    pub n: usize,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl EstimateRow {
    fn new(name: &str, ell: Option<usize>, plan: &TrialPlan, i: Interval) -> Self {
        EstimateRow {
            name: name.to_string(),
            ell,
            n: plan.n,
            point_estimate: i.estimate,
            ci_low: i.low,
            ci_high: i.high,
            trials: plan.trials,
            seed: plan.master_seed.master,
        }
    }
}

/// Row names emitted by [`run_census_trials`].
pub mod row {
    pub const MEAN_K1: &str = "mean_k1";
    pub const PR_KTILDE_POS: &str = "pr_ktilde_pos";
    pub const PR_K_POS: &str = "pr_k_pos";
    pub const PR_KPRIME_POS: &str = "pr_kprime_pos";
    pub const MEAN_KPRIME: &str = "mean_kprime";
    pub const FM2_KPRIME: &str = "fm2_kprime";
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusCampaign {
    pub plan: TrialPlan,
    pub censuses: Vec<ComponentCensus>,
    pub rows: Vec<EstimateRow>,
}

impl CensusCampaign {
    pub fn row(&self, name: &str, ell: Option<usize>) -> Option<&EstimateRow> {
        self.rows.iter().find(|r| r.name == name && r.ell == ell)
    }

    pub fn k1_samples(&self) -> Vec<u64> {
        self.censuses.iter().map(|c| c.k1).collect()
    }

    fn proportion(&self, pred: impl Fn(&ComponentCensus) -> bool) -> Interval {
        let hits = self.censuses.iter().filter(|c| pred(c)).count() as u64;
        wilson_interval(hits, self.censuses.len() as u64)
    }
}

/// Census of `plan.trials` independent samples with the standard estimate rows.
///
/// The counter order `K' <= K <= K̃` is checked on every trial and a
/// violation aborts the campaign.
pub fn run_census_trials(plan: &TrialPlan) -> Result<CensusCampaign> {
    check_budget(plan.placements(), plan.budget)?;
    plan.census_cfg.validate()?;
    let censuses = run_trials(plan.trials, |k| {
        let ps = sample_points(plan.n, plan.master_seed.trial(k))?;
        let c = census(&ps, plan.radius, &plan.census_cfg)?;
        c.check_counter_order()?;
        Ok(c)
    })?;
    let mut campaign = CensusCampaign {
        plan: *plan,
        censuses,
        rows: Vec::new(),
    };

    let k1: Vec<f64> = campaign.censuses.iter().map(|c| c.k1 as f64).collect();
    let mut rows = vec![EstimateRow::new(row::MEAN_K1, None, plan, mean_estimate(&k1)?.interval())];
    for ell in 2..=plan.census_cfg.ell_max {
        rows.push(EstimateRow::new(
            row::PR_KTILDE_POS,
            Some(ell),
            plan,
            campaign.proportion(|c| c.k_tilde(ell) > 0),
        ));
        rows.push(EstimateRow::new(
            row::PR_K_POS,
            Some(ell),
            plan,
            campaign.proportion(|c| c.k_exact(ell) > 0),
        ));
        rows.push(EstimateRow::new(
            row::PR_KPRIME_POS,
            Some(ell),
            plan,
            campaign.proportion(|c| c.k_prime(ell) > 0),
        ));
        let kp: Vec<u64> = campaign.censuses.iter().map(|c| c.k_prime(ell)).collect();
        rows.push(EstimateRow::new(
            row::MEAN_KPRIME,
            Some(ell),
            plan,
            factorial_moment(&kp, 1)?.interval(),
        ));
        rows.push(EstimateRow::new(
            row::FM2_KPRIME,
            Some(ell),
            plan,
            factorial_moment(&kp, 2)?.interval(),
        ));
    }
    campaign.rows = rows;
    Ok(campaign)
}

/// Isolated-vertex counts of `trials` samples at radius `r`.
pub fn isolated_counts(n: usize, r: f64, trials: u64, master: RandomSeed, budget: u64) -> Result<Vec<u64>> {
    check_budget(n as u128 * u128::from(trials), budget)?;
    run_trials(trials, |k| {
        let ps = sample_points(n, master.trial(k))?;
        Ok(isolated_vertices(&ps, r)?.len() as u64)
    })
}

/// The two-sided second-moment sandwich
/// `E K' - E[K']₂ / 2 <= Pr(K' > 0) <= E K'` evaluated on a campaign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondMomentCheck {
    pub ell: usize,
    pub mean: Interval,
    pub second_factorial: Interval,
    pub probability: Interval,
    pub lower: f64,
    /// Both sides hold once every estimate is allowed its 95% interval.
    pub holds: bool,
}

pub fn second_moment_check(campaign: &CensusCampaign, ell: usize) -> Result<SecondMomentCheck> {
    let get = |name| {
        campaign
            .row(name, Some(ell))
            .map(|r| Interval {
                estimate: r.point_estimate,
                low: r.ci_low,
                high: r.ci_high,
            })
            .ok_or_else(|| Error::param("ell", format!("no rows for ell = {ell}")))
    };
    let mean = get(row::MEAN_KPRIME)?;
    let fm2 = get(row::FM2_KPRIME)?;
    let prob = get(row::PR_KPRIME_POS)?;
    let lower = mean.estimate - 0.5 * fm2.estimate;
    let slack_lower = mean.half_width() + 0.5 * fm2.half_width();
    let holds = lower - slack_lower <= prob.high && prob.low <= mean.high;
    Ok(SecondMomentCheck {
        ell,
        mean,
        second_factorial: fm2,
        probability: prob,
        lower,
        holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub ell: usize,
    pub trials: u64,
    /// Fraction of trials with `K̃_ℓ > 0`, with its Wilson interval.
    pub p_hat: Interval,
    /// `p̂ · log^{ℓ-1} n` and the scaled interval.
    pub normalized: Interval,
    /// Fraction of trials with `K'_{ε,ℓ} > 0`.
    pub p_prime: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSweep {
    pub rows: Vec<ScalingRow>,
    pub campaigns: Vec<CensusCampaign>,
}

fn check_sweep_sizes(ns: &[usize], min_n: usize) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::param("ns", "need at least one size"));
    }
    if ns.iter().any(|&n| n < min_n) {
        return Err(Error::param("ns", format!("every n must be at least {min_n}")));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("ns", "sizes must be strictly increasing"));
    }
    Ok(())
}

pub fn scaling_row(campaign: &CensusCampaign, ell: usize) -> ScalingRow {
    let n = campaign.plan.n;
    let scale = (n as f64).ln().powi(ell as i32 - 1);
    let p = campaign.proportion(|c| c.k_tilde(ell) > 0);
    ScalingRow {
        n,
        ell,
        trials: campaign.plan.trials,
        p_hat: p,
        normalized: Interval {
            estimate: p.estimate * scale,
            low: p.low * scale,
            high: p.high * scale,
        },
        p_prime: campaign.proportion(|c| c.k_prime(ell) > 0),
    }
}

/// `Pr(K̃_ℓ > 0)` across sizes at fixed `μ`, with the `log^{ℓ-1} n` scaling.
pub fn scaling_sweep(
    ns: &[usize],
    ell: usize,
    mu: f64,
    trials_per_n: u64,
    seed: RandomSeed,
    cfg: CensusConfig,
    budget: u64,
) -> Result<ScalingSweep> {
    check_sweep_sizes(ns, 16)?;
    if ell < 2 || ell > cfg.ell_max {
        return Err(Error::param("ell", format!("need 2 <= ell <= ell_max = {}", cfg.ell_max)));
    }
    let total: u128 = ns.iter().map(|&n| n as u128 * u128::from(trials_per_n)).sum();
    check_budget(total, budget)?;
    let mut out = ScalingSweep {
        rows: Vec::new(),
        campaigns: Vec::new(),
    };
    for &n in ns {
        let plan = TrialPlan::with_mu(n, mu, trials_per_n, seed, cfg)?.budget(budget);
        let campaign = run_census_trials(&plan)?;
        out.rows.push(scaling_row(&campaign, ell));
        out.campaigns.push(campaign);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HittingTrial {
    pub radii: HittingRadii,
    /// Close isolated pairs; absent when `log n <= κ`.
    pub z: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HittingRow {
    pub n: usize,
    pub trials: u64,
    pub p_equal: Interval,
    pub p_z_positive: Option<Interval>,
    /// Every trial had `r_c >= r_i`.
    pub r_c_dominates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingSweep {
    pub kappa: f64,
    pub seed: u64,
    pub rows: Vec<HittingRow>,
    pub trials: Vec<Vec<HittingTrial>>,
}

/// `Pr(r_c = r_i)` and `Pr(Z > 0)` across sizes.
pub fn hitting_sweep(ns: &[usize], trials_per_n: u64, kappa: f64, seed: RandomSeed, budget: u64) -> Result<HittingSweep> {
    check_sweep_sizes(ns, 2)?;
    if trials_per_n == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    if !(kappa > 0.0) {
        return Err(Error::param("kappa", "must be positive"));
    }
    let total: u128 = ns.iter().map(|&n| n as u128 * u128::from(trials_per_n)).sum();
    check_budget(total, budget)?;
    let mut out = HittingSweep {
        kappa,
        seed: seed.master,
        rows: Vec::new(),
        trials: Vec::new(),
    };
    for &n in ns {
        let pair_cfg = IsolatedPairConfig::new(n as u64, kappa).ok();
        let trials = run_trials(trials_per_n, |k| {
            let ps = sample_points(n, seed.trial(k))?;
            let radii = hitting_radii(&ps)?;
            let z = pair_cfg.map(|c| count_close_isolated_pairs(&ps, &c)).transpose()?;
            Ok(HittingTrial { radii, z })
        })?;
        let equal = trials.iter().filter(|t| t.radii.equal).count() as u64;
        let z_pos = pair_cfg.map(|_| {
            let pos = trials.iter().filter(|t| t.z.unwrap_or(0) > 0).count() as u64;
            wilson_interval(pos, trials_per_n)
        });
        out.rows.push(HittingRow {
            n,
            trials: trials_per_n,
            p_equal: wilson_interval(equal, trials_per_n),
            p_z_positive: z_pos,
            r_c_dominates: trials.iter().all(|t| t.radii.r_c >= t.radii.r_i),
        });
        out.trials.push(trials);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> CensusConfig {
        CensusConfig::new(0.4, 3).unwrap()
    }

    #[test]
    fn zero_radius_has_no_pairs() {
        let plan = TrialPlan::with_mu(2, 2.0, 50, RandomSeed::new(1), CensusConfig::new(0.4, 2).unwrap()).unwrap();
        assert_eq!(plan.radius, 0.0);
        let c = run_census_trials(&plan).unwrap();
        let row = c.row(row::PR_KPRIME_POS, Some(2)).unwrap();
        assert_eq!(row.point_estimate, 0.0);
        assert!(c.censuses.iter().all(|c| c.k1 == 2));
    }

    #[test]
    fn budget_is_enforced_up_front() {
        let plan = TrialPlan::with_mu(1000, 1.0, 1000, RandomSeed::new(1), cfg()).unwrap().budget(999_999);
        assert!(matches!(run_census_trials(&plan), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(
            scaling_sweep(&[100, 200], 2, 1.0, 10, RandomSeed::new(1), cfg(), 2_999),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(isolated_counts(10, 0.1, 10, RandomSeed::new(1), 99).is_err());
    }

    #[test]
    fn campaign_rows_are_well_formed() {
        let plan = TrialPlan::with_mu(256, 1.0, 40, RandomSeed::new(3), cfg()).unwrap();
        let c = run_census_trials(&plan).unwrap();
        assert_eq!(c.rows.len(), 1 + 2 * 5);
        for r in &c.rows {
            assert!(r.ci_low <= r.point_estimate && r.point_estimate <= r.ci_high, "{r:?}");
        }
        let sm = second_moment_check(&c, 2).unwrap();
        assert!(sm.holds, "{sm:?}");
    }

    #[test]
    fn sweep_validation() {
        assert!(scaling_sweep(&[8, 64], 2, 1.0, 1, RandomSeed::new(1), cfg(), DEFAULT_BUDGET).is_err());
        assert!(scaling_sweep(&[64, 64], 2, 1.0, 1, RandomSeed::new(1), cfg(), DEFAULT_BUDGET).is_err());
        assert!(scaling_sweep(&[64], 4, 1.0, 1, RandomSeed::new(1), cfg(), DEFAULT_BUDGET).is_err());
        let one = scaling_sweep(&[64, 128], 2, 1.0, 1, RandomSeed::new(1), cfg(), DEFAULT_BUDGET).unwrap();
        for row in &one.rows {
            assert!(row.p_hat.low <= row.p_hat.estimate && row.p_hat.estimate <= row.p_hat.high);
            assert!(row.p_hat.high - row.p_hat.low > 0.5);
        }
    }

    #[test]
    fn two_points_always_hit_together() {
        let s = hitting_sweep(&[2], 30, 2.0, RandomSeed::new(4), DEFAULT_BUDGET).unwrap();
        assert_eq!(s.rows[0].p_equal.estimate, 1.0);
        assert!(s.rows[0].p_z_positive.is_none());
        assert!(s.rows[0].r_c_dominates);
    }
}
