//! Seeded Monte Carlo estimators.
//!
//! Trial `i` always draws from `RandomStream::for_trial(seed, i)` and results are
//! reduced in trial order, so every estimate is bit-identical for any worker count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{
    data_gain_sq, directed_combine, typical_sinr, unit_interference, DeploymentParams, MptMode, SystemParams,
};
use crate::rng::{RandomStream, BOOTSTRAP_STREAM};
use crate::spatial::{sample_ppp, sample_realization, SimWindow, DEFAULT_TRUNCATION_FACTOR};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_MU_TRIALS: u64 = 200_000;
pub const BOOTSTRAP_RESAMPLES: u64 = 500;
/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HYBRIDNET_THREADS";

const Z95: f64 = 1.959_963_984_540_054;

/// How many trials to run, from which seed, and how large a window to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub seed: u64,
    pub truncation_factor: f64,
}

impl TrialPlan {
    pub fn new(trials: u64, seed: u64) -> Self {
        TrialPlan {
            trials,
            seed,
            truncation_factor: DEFAULT_TRUNCATION_FACTOR,
        }
    }

    pub fn with_truncation_factor(mut self, factor: f64) -> Self {
        self.truncation_factor = factor;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if self.trials >= BOOTSTRAP_STREAM - BOOTSTRAP_RESAMPLES {
            return Err(Error::invalid("trial count collides with the bootstrap streams"));
        }
        // Window validation happens in SimWindow; this just fails early.
        SimWindow::for_density(1.0, self.truncation_factor).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    pub ci95: (f64, f64),
}

impl Estimate {
    /// Binomial proportion with a normal-approximation interval clipped to [0, 1].
    pub fn proportion(hits: u64, trials: u64) -> Self {
        let n = trials as f64;
        let value = hits as f64 / n;
        let stderr = (value * (1.0 - value) / n).sqrt();
        let half = Z95 * stderr;
        Estimate {
            value,
            stderr,
            trials,
            ci95: ((value - half).max(0.0), (value + half).min(1.0)),
        }
    }

    /// Sample mean, summed in slice order.
    pub fn mean(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let value = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - value) * (x - value)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let stderr = (var / n).sqrt();
        let half = Z95 * stderr;
        Estimate {
            value,
            stderr,
            trials: samples.len() as u64,
            ci95: (value - half, value + half),
        }
    }

    pub fn half_width(&self) -> f64 {
        Z95 * self.stderr
    }

    /// Whether two estimates differ by no more than the sum of their 95% half-widths.
    pub fn consistent_with(&self, other: &Estimate) -> bool {
        (self.value - other.value).abs() <= self.half_width() + other.half_width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub mu: f64,
    pub epsilon: f64,
    /// Bootstrap percentile interval, widened if needed to contain `mu`.
    pub ci: (f64, f64),
    pub trials: u64,
}

/// Worker cap from `HYBRIDNET_THREADS`, if set to a positive integer.
pub fn worker_count_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_worker_count<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every trial, possibly in parallel, and returns the results in trial order.
/// The first failing trial (by index) determines the error.
pub fn run_trials<T, F>(plan: &TrialPlan, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomStream) -> Result<T> + Sync,
{
    plan.validate()?;
    let seed = plan.seed;
    let results: Vec<Result<T>> = (0..plan.trials)
        .into_par_iter()
        .map(|i| f(&mut RandomStream::for_trial(seed, i)))
        .collect();
    results.into_iter().collect()
}

fn count_hits(plan: &TrialPlan, f: impl Fn(&mut RandomStream) -> Result<bool> + Sync) -> Result<Estimate> {
    let hits = run_trials(plan, f)?.into_iter().filter(|&h| h).count() as u64;
    Ok(Estimate::proportion(hits, plan.trials))
}

/// Probability that the typical uplink misses its SINR target.
pub fn estimate_outage(system: &SystemParams, deployment: &DeploymentParams, plan: &TrialPlan) -> Result<Estimate> {
    system.validate()?;
    deployment.validate()?;
    let window = SimWindow::for_density(deployment.lambda_b, plan.truncation_factor)?;
    // Beacons do not affect the data link, so skip sampling them.
    let cellular = DeploymentParams {
        lambda_p: 0.0,
        ..*deployment
    };
    count_hits(plan, |stream| {
        let r = sample_realization(&cellular, &window, stream)?;
        Ok(typical_sinr(&r, deployment.p, system.sigma2, system.k, system.alpha) < system.theta)
    })
}

/// Probability that the signal received at the typical BS falls below `p_b`.
pub fn estimate_signal_shortfall(
    system: &SystemParams,
    deployment: &DeploymentParams,
    plan: &TrialPlan,
) -> Result<Estimate> {
    system.validate()?;
    deployment.validate()?;
    let window = SimWindow::for_density(deployment.lambda_b, plan.truncation_factor)?;
    let cellular = DeploymentParams {
        lambda_p: 0.0,
        ..*deployment
    };
    count_hits(plan, |stream| {
        let r = sample_realization(&cellular, &window, stream)?;
        Ok(deployment.p * data_gain_sq(r.typical_mobile().norm_sq(), system.alpha) < system.p_b)
    })
}

/// Sorted samples of `S = I - |U_0|^{-alpha} / theta` on the unit-density network,
/// where `I` is the post-cancellation interference at unit power.
///
/// Outage at density `lambda_b`, power `p` and noise `sigma2` is exactly the event
/// `S + sigma2 / (p lambda_b^{alpha/2}) > 0`, so one sample set serves every deployment.
#[derive(Debug, Clone)]
pub struct OutageStatistic {
    sorted: Vec<f64>,
    seed: u64,
}

impl OutageStatistic {
    pub fn sample(system: &SystemParams, plan: &TrialPlan) -> Result<Self> {
        system.validate()?;
        let window = SimWindow::for_density(1.0, plan.truncation_factor)?;
        let unit = DeploymentParams::new(1.0, 0.0, 1.0, 0.0);
        let mut sorted = run_trials(plan, |stream| {
            let r = sample_realization(&unit, &window, stream)?;
            let own = data_gain_sq(r.typical_mobile().norm_sq(), system.alpha);
            Ok(unit_interference(&r.mobiles, system.k, system.alpha) - own / system.theta)
        })?;
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(OutageStatistic {
            sorted,
            seed: plan.seed,
        })
    }

    pub fn trials(&self) -> u64 {
        self.sorted.len() as u64
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `Pr(S + mu > 0)`.
    pub fn epsilon_at(&self, mu: f64) -> Estimate {
        let below = self.sorted.partition_point(|&s| s + mu <= 0.0);
        Estimate::proportion((self.sorted.len() - below) as u64, self.trials())
    }

    /// Outage of an interference-limited network, the smallest reachable target.
    pub fn floor(&self) -> Estimate {
        self.epsilon_at(0.0)
    }

    /// The threshold with `Pr(S + mu > 0) = epsilon`, with a bootstrap interval.
    pub fn mu_for(&self, epsilon: f64) -> Result<MuEstimate> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let floor = self.floor().value;
        if epsilon <= floor {
            return Err(Error::InfeasibleEpsilon { epsilon, floor });
        }
        let n = self.sorted.len();
        let k = quantile_rank(n, 1.0 - epsilon);
        let mu = -self.sorted[k];

        let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .into_par_iter()
            .map(|b| {
                let mut stream = RandomStream::new(self.seed, BOOTSTRAP_STREAM - b);
                let mut resample: Vec<f64> = (0..n).map(|_| self.sorted[stream.below(n)]).collect();
                -*resample.select_nth_unstable_by(k, f64::total_cmp).1
            })
            .collect();
        boot.sort_unstable_by(f64::total_cmp);
        let lo = boot[quantile_rank(boot.len(), 0.025)];
        let hi = boot[quantile_rank(boot.len(), 0.975)];
        Ok(MuEstimate {
            mu,
            epsilon,
            ci: (lo.min(mu), hi.max(mu)),
            trials: self.trials(),
        })
    }
}

/// Zero-based rank of the empirical `u`-quantile, `ceil(u n) - 1` clamped to the sample.
fn quantile_rank(n: usize, u: f64) -> usize {
    ((u * n as f64).ceil() as usize).clamp(1, n) - 1
}

pub fn estimate_mu(system: &SystemParams, epsilon: f64, plan: &TrialPlan) -> Result<MuEstimate> {
    OutageStatistic::sample(system, plan)?.mu_for(epsilon)
}

/// Expected gain from beacons farther than `radius`, which the finite window omits.
fn far_field_mean_gain(lambda_p: f64, radius: f64, beta: f64, nu: f64) -> f64 {
    let outer = 2.0 * PI * lambda_p * radius.max(nu).powf(2.0 - beta) / (beta - 2.0);
    let shell = if radius < nu {
        PI * lambda_p * (nu * nu - radius * radius) * nu.powf(-beta)
    } else {
        0.0
    };
    outer + shell
}

#[inline]
fn mpt_gain_sq(d2: f64, beta: f64, nu2: f64) -> f64 {
    let d2 = d2.max(nu2);
    if beta == 3.0 {
        1.0 / (d2 * d2.sqrt())
    } else if beta == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * beta)
    }
}

/// Beacon gains seen by the typical mobile: (all beacons incl. far-field mean, nearest beacon).
///
/// The mobile sits at the origin, which is legitimate because the beacon process is
/// stationary and independent of the cellular network. A unit-density pattern on a disk of
/// radius `truncation_factor` is scaled by `lambda_p^{-1/2}`, so the same stream yields
/// coupled fields for every density: each gain is non-decreasing in `lambda_p`.
fn beacon_field(
    lambda_p: f64,
    beta: f64,
    nu: f64,
    truncation_factor: f64,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    if lambda_p == 0.0 {
        return Ok((0.0, 0.0));
    }
    let unit = SimWindow::with_radius(truncation_factor)?;
    let points = sample_ppp(1.0, &unit, stream)?;
    let scale2 = 1.0 / lambda_p;
    let nu2 = nu * nu;
    let mut total = 0.0;
    let mut nearest = f64::INFINITY;
    for t in &points {
        let d2 = t.norm_sq() * scale2;
        total += mpt_gain_sq(d2, beta, nu2);
        nearest = nearest.min(d2);
    }
    let main = if points.is_empty() {
        0.0
    } else {
        mpt_gain_sq(nearest, beta, nu2)
    };
    let radius = truncation_factor / lambda_p.sqrt();
    Ok((total + far_field_mean_gain(lambda_p, radius, beta, nu), main))
}

/// Raw power harvested by the typical mobile, one value per trial in trial order.
pub fn sample_raw_power(
    system: &SystemParams,
    deployment: &DeploymentParams,
    mode: MptMode,
    plan: &TrialPlan,
) -> Result<Vec<f64>> {
    system.validate()?;
    deployment.validate()?;
    let (q, beta, nu) = (deployment.q, system.beta, system.nu);
    run_trials(plan, |stream| {
        let (total, main) = beacon_field(deployment.lambda_p, beta, nu, plan.truncation_factor, stream)?;
        Ok(match mode {
            MptMode::Isotropic => q * total,
            MptMode::Directed => directed_combine(q, system.z_m, system.z_s, total, main),
        })
    })
}

pub fn estimate_mean_raw_power(
    system: &SystemParams,
    deployment: &DeploymentParams,
    mode: MptMode,
    plan: &TrialPlan,
) -> Result<Estimate> {
    Ok(Estimate::mean(&sample_raw_power(system, deployment, mode, plan)?))
}

/// Probability that the harvested power falls below `threshold`.
pub fn estimate_power_outage(
    system: &SystemParams,
    deployment: &DeploymentParams,
    threshold: f64,
    mode: MptMode,
    plan: &TrialPlan,
) -> Result<Estimate> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid(format!(
            "power threshold must be non-negative, got {threshold}"
        )));
    }
    let samples = sample_raw_power(system, deployment, mode, plan)?;
    let hits = samples.iter().filter(|&&p| p < threshold).count() as u64;
    Ok(Estimate::proportion(hits, plan.trials))
}

/// Largest power `x` with empirical `Pr(P < x) <= delta`: what a mobile with small
/// storage can sustain when power outages are tolerated with probability `delta`.
pub fn sustainable_power(
    system: &SystemParams,
    deployment: &DeploymentParams,
    mode: MptMode,
    delta: f64,
    plan: &TrialPlan,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mut samples = sample_raw_power(system, deployment, mode, plan)?;
    let k = ((delta * samples.len() as f64).floor() as usize).min(samples.len() - 1);
    Ok(*samples.select_nth_unstable_by(k, f64::total_cmp).1)
}

/// Probability that a mobile with large storage can transmit at power `p`.
pub fn transmit_probability(mean_power: f64, omega: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("transmit power must be positive, got {p}")));
    }
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::invalid(format!("omega must lie in (0, 1], got {omega}")));
    }
    if !(mean_power >= 0.0) {
        return Err(Error::invalid(format!(
            "mean power must be non-negative, got {mean_power}"
        )));
    }
    let need = omega * p;
    Ok(if mean_power >= need { 1.0 } else { mean_power / need })
}
