//! Feasibility regions of the cellular and hybrid networks: closed-form boundaries,
//! membership tests, and simulation-based boundaries used to check the inner bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::kappa;
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_mean_raw_power, estimate_outage, estimate_power_outage, sustainable_power, Estimate, TrialPlan,
};
use crate::propagation::{DeploymentParams, MptMode, SystemParams};

/// Largest beacon density the simulated search will try before declaring a point infeasible.
pub const MAX_SIMULATED_PB_DENSITY: f64 = 1e9;
/// Relative width at which the simulated search stops.
pub const SEARCH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    Cellular,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Nonzero,
    InterferenceLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Storage {
    Large,
    Small,
}

impl Storage {
    pub fn as_str(self) -> &'static str {
        match self {
            Storage::Large => "large",
            Storage::Small => "small",
        }
    }
}

/// Where the outage threshold passed alongside a region comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    /// A simulated `mu`; the noise term is `sigma2 / mu`.
    MonteCarlo,
    /// The interference-limited `mu_tilde`; the noise term becomes `1 / mu_tilde`.
    MuTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionConfig {
    pub network: Network,
    pub noise: Noise,
    pub mpt: Option<MptMode>,
    pub storage: Option<Storage>,
    pub mu_source: MuSource,
}

impl RegionConfig {
    pub fn cellular(noise: Noise) -> Self {
        RegionConfig {
            network: Network::Cellular,
            noise,
            mpt: None,
            storage: None,
            mu_source: source_for(noise),
        }
    }

    pub fn hybrid(noise: Noise, mpt: MptMode, storage: Storage) -> Self {
        RegionConfig {
            network: Network::Hybrid,
            noise,
            mpt: Some(mpt),
            storage: Some(storage),
            mu_source: source_for(noise),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.network {
            Network::Cellular if self.mpt.is_some() || self.storage.is_some() => {
                return Err(Error::invalid("a cellular region has no power beacons"));
            }
            Network::Hybrid if self.mpt.is_none() || self.storage.is_none() => {
                return Err(Error::invalid(
                    "a hybrid region needs both an MPT mode and a storage type",
                ));
            }
            _ => {}
        }
        if self.noise == Noise::InterferenceLimited && self.mu_source != MuSource::MuTilde {
            return Err(Error::invalid("interference-limited regions use mu_tilde"));
        }
        Ok(())
    }

    fn hybrid_parts(&self) -> Result<(MptMode, Storage)> {
        self.validate()?;
        match (self.mpt, self.storage) {
            (Some(m), Some(s)) => Ok((m, s)),
            _ => Err(Error::invalid("expected a hybrid region")),
        }
    }

    /// The noise-to-threshold ratio every boundary is expressed in.
    fn noise_ratio(&self, system: &SystemParams, mu_threshold: f64) -> Result<f64> {
        if !(mu_threshold > 0.0) || !mu_threshold.is_finite() {
            return Err(Error::Domain(format!(
                "mu threshold must be positive, got {mu_threshold}"
            )));
        }
        Ok(match self.mu_source {
            MuSource::MonteCarlo => system.sigma2 / mu_threshold,
            MuSource::MuTilde => 1.0 / mu_threshold,
        })
    }
}

fn source_for(noise: Noise) -> MuSource {
    match noise {
        Noise::Nonzero => MuSource::MonteCarlo,
        Noise::InterferenceLimited => MuSource::MuTilde,
    }
}

/// Minimal co-parameter at one BS density, or a point where none exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    Feasible(f64),
    Infeasible,
}

impl Requirement {
    pub fn value(self) -> Option<f64> {
        match self {
            Requirement::Feasible(v) => Some(v),
            Requirement::Infeasible => None,
        }
    }

    /// The value, with infeasibility as `+inf`.
    pub fn or_infinity(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub config: RegionConfig,
    pub q: f64,
    pub mu_threshold: f64,
    pub lambda_b_grid: Vec<f64>,
    /// Minimal `p` for cellular regions, minimal `lambda_p` for hybrid ones; `+inf` where infeasible.
    pub min_co_param: Vec<f64>,
    pub infeasible_mask: Vec<bool>,
}

/// Smallest mobile power meeting the outage target, `ratio / lambda_b^{alpha/2}` with
/// `ratio = sigma2 / mu`. Pass `sigma2 = 1` and `mu = mu_tilde` for the interference-limited case.
pub fn cellular_min_power(lambda_b: f64, mu_threshold: f64, sigma2: f64, alpha: f64) -> Result<f64> {
    if !(mu_threshold > 0.0) {
        return Err(Error::Domain(format!(
            "mu threshold must be positive, got {mu_threshold}"
        )));
    }
    if !(lambda_b >= 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::invalid(format!(
            "need lambda_b, sigma2 >= 0, got {lambda_b}, {sigma2}"
        )));
    }
    if lambda_b == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(sigma2 / mu_threshold / lambda_b.powf(0.5 * alpha))
}

fn required_power(lambda_b: f64, system: &SystemParams, mu_threshold: f64, config: &RegionConfig) -> Result<f64> {
    let ratio = config.noise_ratio(system, mu_threshold)?;
    cellular_min_power(lambda_b, 1.0, ratio, system.alpha)
}

/// Closed-form (inner-bound) minimal beacon density at BS density `lambda_b`.
pub fn hybrid_min_pb_density(
    lambda_b: f64,
    q: f64,
    system: &SystemParams,
    mu_threshold: f64,
    config: &RegionConfig,
) -> Result<Requirement> {
    let (mode, storage) = config.hybrid_parts()?;
    if !(lambda_b > 0.0) || !(q > 0.0) {
        return Err(Error::invalid(format!("need lambda_b, q > 0, got {lambda_b}, {q}")));
    }
    let ratio = config.noise_ratio(system, mu_threshold)?;
    let (alpha, beta, nu) = (system.alpha, system.beta, system.nu);
    let scale = lambda_b.powf(0.5 * alpha);
    Ok(match (mode, storage) {
        (MptMode::Isotropic, Storage::Large) => {
            Requirement::Feasible((1.0 - 2.0 / beta) * ratio * system.omega * nu.powf(beta - 2.0) / (PI * q * scale))
        }
        (MptMode::Directed, Storage::Large) => {
            let k = kappa(system.omega, ratio, nu, beta, 1.0)?;
            let x = system.z_m * q * scale;
            if x <= k {
                Requirement::Infeasible
            } else {
                Requirement::Feasible((x / (x - k)).ln() / (PI * nu * nu))
            }
        }
        (_, Storage::Small) => {
            let q_eff = if mode == MptMode::Directed { system.z_m * q } else { q };
            if q_eff * scale < ratio * nu.powf(beta) {
                Requirement::Infeasible
            } else {
                Requirement::Feasible((1.0 / system.delta).ln() / PI * (ratio / (q_eff * scale)).powf(2.0 / beta))
            }
        }
    })
}

/// Membership in the configured region (its inner bound where only a bound is known).
/// Cellular regions test `point.p`, hybrid regions test `point.lambda_p`.
pub fn region_contains(
    point: &DeploymentParams,
    system: &SystemParams,
    mu_threshold: f64,
    config: &RegionConfig,
) -> bool {
    let need = match config.network {
        Network::Cellular => required_power(point.lambda_b, system, mu_threshold, config),
        Network::Hybrid => {
            hybrid_min_pb_density(point.lambda_b, point.q, system, mu_threshold, config).map(Requirement::or_infinity)
        }
    };
    let have = match config.network {
        Network::Cellular => point.p,
        Network::Hybrid => point.lambda_p,
    };
    match need {
        Ok(need) => need.is_finite() && have >= need * (1.0 - 1e-12),
        Err(_) => false,
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty lambda_b grid"));
    }
    if grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("lambda_b grid must be positive and ascending"));
    }
    Ok(())
}

fn curve_from(config: &RegionConfig, q: f64, mu_threshold: f64, grid: &[f64], reqs: Vec<Requirement>) -> BoundaryCurve {
    BoundaryCurve {
        config: *config,
        q,
        mu_threshold,
        lambda_b_grid: grid.to_vec(),
        infeasible_mask: reqs.iter().map(|r| r.value().is_none()).collect(),
        min_co_param: reqs.into_iter().map(Requirement::or_infinity).collect(),
    }
}

/// Closed-form boundary over `lambda_b_grid`.
pub fn trace_boundary(
    config: &RegionConfig,
    system: &SystemParams,
    mu_threshold: f64,
    lambda_b_grid: &[f64],
    q: f64,
) -> Result<BoundaryCurve> {
    config.validate()?;
    check_grid(lambda_b_grid)?;
    let reqs = lambda_b_grid
        .iter()
        .map(|&lb| match config.network {
            Network::Cellular => required_power(lb, system, mu_threshold, config).map(Requirement::Feasible),
            Network::Hybrid => hybrid_min_pb_density(lb, q, system, mu_threshold, config),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(curve_from(config, q, mu_threshold, lambda_b_grid, reqs))
}

/// Power a mobile can count on at the given deployment: `E[P] / omega` with large storage,
/// the `delta`-quantile of `P` with small storage.
pub fn achievable_power(
    system: &SystemParams,
    deployment: &DeploymentParams,
    mode: MptMode,
    storage: Storage,
    plan: &TrialPlan,
) -> Result<f64> {
    match storage {
        Storage::Large => Ok(estimate_mean_raw_power(system, deployment, mode, plan)?.value / system.omega),
        Storage::Small => sustainable_power(system, deployment, mode, system.delta, plan),
    }
}

/// Simulated minimal beacon density: the smallest `lambda_p` whose harvested power supports the
/// cellular requirement, on average (large storage) or with power-outage probability at most
/// `delta` (small storage).
///
/// Every evaluation reuses the same trial streams, so the criterion is monotone in `lambda_p`
/// and a bisection on `log lambda_p` is well defined.
pub fn simulate_min_pb_density(
    lambda_b: f64,
    q: f64,
    system: &SystemParams,
    mu_threshold: f64,
    config: &RegionConfig,
    plan: &TrialPlan,
) -> Result<Requirement> {
    let (mode, storage) = config.hybrid_parts()?;
    let p_req = required_power(lambda_b, system, mu_threshold, config)?;
    let meets = |lambda_p: f64| -> Result<bool> {
        let d = DeploymentParams::new(p_req, q, lambda_b, lambda_p);
        Ok(match storage {
            Storage::Large => estimate_mean_raw_power(system, &d, mode, plan)?.value >= system.omega * p_req,
            Storage::Small => estimate_power_outage(system, &d, p_req, mode, plan)?.value <= system.delta,
        })
    };
    if meets(0.0)? {
        return Ok(Requirement::Feasible(0.0));
    }
    let start = hybrid_min_pb_density(lambda_b, q, system, mu_threshold, config)?
        .value()
        .filter(|&v| v > 0.0)
        .unwrap_or(1.0);
    let (mut lo, mut hi);
    if meets(start)? {
        hi = start;
        lo = start / 4.0;
        while meets(lo)? {
            hi = lo;
            lo /= 4.0;
            if lo < f64::MIN_POSITIVE * 1e10 {
                return Ok(Requirement::Feasible(hi));
            }
        }
    } else {
        lo = start;
        hi = start * 4.0;
        while !meets(hi)? {
            lo = hi;
            hi *= 4.0;
            if hi > MAX_SIMULATED_PB_DENSITY {
                return Ok(Requirement::Infeasible);
            }
        }
    }
    while hi / lo > 1.0 + SEARCH_TOLERANCE {
        let mid = (lo * hi).sqrt();
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Requirement::Feasible(hi))
}

/// Simulated boundary over `lambda_b_grid`.
pub fn simulate_boundary(
    config: &RegionConfig,
    system: &SystemParams,
    mu_threshold: f64,
    lambda_b_grid: &[f64],
    q: f64,
    plan: &TrialPlan,
) -> Result<BoundaryCurve> {
    check_grid(lambda_b_grid)?;
    let reqs = lambda_b_grid
        .iter()
        .map(|&lb| simulate_min_pb_density(lb, q, system, mu_threshold, config, plan))
        .collect::<Result<Vec<_>>>()?;
    Ok(curve_from(config, q, mu_threshold, lambda_b_grid, reqs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub lambda_b: f64,
    /// Multiple of the boundary co-parameter that was tested.
    pub scale: f64,
    /// Tested `p` (cellular) or `lambda_p` (hybrid).
    pub co_param: f64,
    /// Transmit power the mobiles used.
    pub power: f64,
    pub outage: Estimate,
    /// `outage <= epsilon + 3 stderr`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub config: RegionConfig,
    pub epsilon: f64,
    pub checks: Vec<BoundaryCheck>,
}

impl BoundaryReport {
    pub fn checks_at(&self, scale: f64) -> impl Iterator<Item = &BoundaryCheck> {
        self.checks.iter().filter(move |c| c.scale == scale)
    }
}

/// Runs the full pipeline at `scale` multiples of each finite boundary point: harvested power,
/// the transmit power it supports, then the SINR outage at that power.
pub fn verify_boundary_by_simulation(
    curve: &BoundaryCurve,
    system: &SystemParams,
    scales: &[f64],
    plan: &TrialPlan,
) -> Result<BoundaryReport> {
    curve.config.validate()?;
    let mut checks = Vec::new();
    for (&lambda_b, &boundary) in curve.lambda_b_grid.iter().zip(&curve.min_co_param) {
        if !boundary.is_finite() {
            continue;
        }
        for &scale in scales {
            let co_param = boundary * scale;
            let power = match (curve.config.mpt, curve.config.storage) {
                (Some(mode), Some(storage)) => {
                    let d = DeploymentParams::new(0.0, curve.q, lambda_b, co_param);
                    achievable_power(system, &d, mode, storage, plan)?
                }
                _ => co_param,
            };
            let d = DeploymentParams::new(power, curve.q, lambda_b, 0.0);
            let outage = estimate_outage(system, &d, plan)?;
            checks.push(BoundaryCheck {
                lambda_b,
                scale,
                co_param,
                power,
                outage,
                pass: outage.value <= system.epsilon + 3.0 * outage.stderr,
            });
        }
    }
    Ok(BoundaryReport {
        config: curve.config,
        epsilon: system.epsilon,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn cellular_power_examples() {
        assert_eq!(cellular_min_power(1.0, 1.0, 1.0, 4.0).unwrap(), 1.0);
        let a = cellular_min_power(1.0, 2.0, 1.0, 4.0).unwrap();
        let b = cellular_min_power(4.0, 2.0, 1.0, 4.0).unwrap();
        assert!((a / b - 16.0).abs() < 1e-12);
        assert_eq!(cellular_min_power(3.0, 2.0, 0.0, 4.0).unwrap(), 0.0);
        assert_eq!(cellular_min_power(0.0, 2.0, 1.0, 4.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn config_invariants() {
        let mut c = RegionConfig::cellular(Noise::Nonzero);
        assert!(c.validate().is_ok());
        c.mpt = Some(MptMode::Isotropic);
        assert!(c.validate().is_err());
        let mut h = RegionConfig::hybrid(Noise::InterferenceLimited, MptMode::Directed, Storage::Large);
        assert_eq!(h.mu_source, MuSource::MuTilde);
        h.mu_source = MuSource::MonteCarlo;
        assert!(h.validate().is_err());
    }

    #[test]
    fn hybrid_closed_forms() {
        let s = SystemParams { beta: 4.0, ..sys() };
        let mu = 3.0;
        let iso = RegionConfig::hybrid(Noise::Nonzero, MptMode::Isotropic, Storage::Large);
        let got = hybrid_min_pb_density(2.0, 5.0, &s, mu, &iso).unwrap().value().unwrap();
        let want = s.sigma2 * s.omega * s.nu.powi(2) / (2.0 * PI * mu * 5.0 * 4.0);
        assert!((got - want).abs() < 1e-14 * want);

        let s = sys();
        let dir = RegionConfig::hybrid(Noise::Nonzero, MptMode::Directed, Storage::Large);
        let k = kappa(s.omega, s.sigma2, s.nu, s.beta, mu).unwrap();
        // z_m q lambda_b^2 = kappa at the edge, 2 kappa gives ln 2 / (pi nu^2).
        let q_edge = k / s.z_m;
        assert_eq!(
            hybrid_min_pb_density(1.0, q_edge, &s, mu, &dir).unwrap(),
            Requirement::Infeasible
        );
        let got = hybrid_min_pb_density(1.0, 2.0 * q_edge, &s, mu, &dir)
            .unwrap()
            .value()
            .unwrap();
        let want = 2f64.ln() / (PI * s.nu * s.nu);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn membership_matches_boundary() {
        let s = sys();
        let c = RegionConfig::cellular(Noise::Nonzero);
        let p = cellular_min_power(2.0, 3.8, s.sigma2, s.alpha).unwrap();
        assert!(region_contains(&DeploymentParams::new(p, 1.0, 2.0, 0.0), &s, 3.8, &c));
        assert!(!region_contains(
            &DeploymentParams::new(0.99 * p, 1.0, 2.0, 0.0),
            &s,
            3.8,
            &c
        ));

        let dir = RegionConfig::hybrid(Noise::Nonzero, MptMode::Directed, Storage::Large);
        let k = kappa(s.omega, s.sigma2, s.nu, s.beta, 3.8).unwrap();
        let q = 0.9 * k / s.z_m;
        for lp in [0.1, 10.0, 1e6] {
            assert!(!region_contains(&DeploymentParams::new(1.0, q, 1.0, lp), &s, 3.8, &dir));
        }
    }

    #[test]
    fn grid_must_be_ascending() {
        let c = RegionConfig::cellular(Noise::Nonzero);
        assert!(trace_boundary(&c, &sys(), 3.8, &[2.0, 1.0], 1.0).is_err());
        assert!(trace_boundary(&c, &sys(), 3.8, &[], 1.0).is_err());
    }

    #[test]
    fn simulated_isotropic_large_matches_closed_form() {
        // The isotropic large-storage region is exact, so simulation must land on it.
        let s = sys();
        let c = RegionConfig::hybrid(Noise::Nonzero, MptMode::Isotropic, Storage::Large);
        let plan = TrialPlan::new(2000, 5).with_truncation_factor(10.0);
        let sim = simulate_min_pb_density(0.5, 2.0, &s, 3.8, &c, &plan)
            .unwrap()
            .value()
            .unwrap();
        let exact = hybrid_min_pb_density(0.5, 2.0, &s, 3.8, &c).unwrap().value().unwrap();
        assert!((sim / exact - 1.0).abs() < 0.05, "{sim} vs {exact}");
    }
}
