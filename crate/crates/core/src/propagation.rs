//! Path loss, uplink interference with K-nearest cancellation, and raw power
//! harvested from power beacons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{NetworkRealization, Point};

/// Physical and model constants. Powers are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Path-loss exponent of data links.
    pub alpha: f64,
    /// Path-loss exponent of power-transfer links.
    pub beta: f64,
    /// Short-range cutoff of the power-transfer path loss.
    pub nu: f64,
    /// Target SINR.
    pub theta: f64,
    pub sigma2: f64,
    /// Duty cycle.
    pub omega: f64,
    /// Main-lobe gain.
    pub z_m: f64,
    /// Side-lobe gain.
    pub z_s: f64,
    /// Number of interfering mobiles each BS cancels.
    pub k: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    pub p_b: f64,
    pub p_t: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(msg.to_string()))
            }
        };
        check(self.alpha > 2.0, "alpha must exceed 2")?;
        check(self.beta > 2.0, "beta must exceed 2")?;
        check(self.nu > 1.0, "nu must exceed 1")?;
        check(self.theta > 0.0, "theta must be positive")?;
        check(
            self.sigma2 >= 0.0 && self.sigma2.is_finite(),
            "sigma2 must be non-negative",
        )?;
        check(self.omega > 0.0 && self.omega <= 1.0, "omega must lie in (0, 1]")?;
        check(
            self.z_s > 0.0 && self.z_m >= self.z_s,
            "gains must satisfy z_m >= z_s > 0",
        )?;
        for (name, v) in [("epsilon", self.epsilon), ("eta", self.eta), ("delta", self.delta)] {
            check(v > 0.0 && v < 1.0, &format!("{name} must lie in (0, 1)"))?;
        }
        check(self.p_b > 0.0, "p_b must be positive")?;
        check(self.p_t >= 0.0, "p_t must be non-negative")?;
        Ok(())
    }
}

impl Default for SystemParams {
    /// Evaluation setting: alpha = 4, beta = 3, theta = 2, K = 8, epsilon = 0.3,
    /// eta = delta = 0.2, p_b = 10 dB. The remaining constants are our choices.
    fn default() -> Self {
        SystemParams {
            alpha: 4.0,
            beta: 3.0,
            nu: 1.5,
            theta: 2.0,
            sigma2: 1.0,
            omega: 0.5,
            z_m: 10.0,
            z_s: 1e-3,
            k: 8,
            epsilon: 0.3,
            eta: 0.2,
            delta: 0.2,
            p_b: 10.0,
            p_t: 1.0,
        }
    }
}

/// The four tunable deployment quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentParams {
    /// Mobile transmit power.
    pub p: f64,
    /// Beacon transmit power.
    pub q: f64,
    pub lambda_b: f64,
    pub lambda_p: f64,
}

impl DeploymentParams {
    pub const fn new(p: f64, q: f64, lambda_b: f64, lambda_p: f64) -> Self {
        DeploymentParams {
            p,
            q,
            lambda_b,
            lambda_p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p", self.p),
            ("q", self.q),
            ("lambda_b", self.lambda_b),
            ("lambda_p", self.lambda_p),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MptMode {
    Isotropic,
    Directed,
}

impl MptMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MptMode::Isotropic => "isotropic",
            MptMode::Directed => "directed",
        }
    }
}

pub fn data_path_gain(d: f64, alpha: f64) -> Result<f64> {
    if d == 0.0 {
        return Err(Error::Singularity);
    }
    if !(d > 0.0) {
        return Err(Error::invalid(format!("distance must be positive, got {d}")));
    }
    Ok(d.powf(-alpha))
}

#[inline]
pub fn mpt_path_gain(d: f64, beta: f64, nu: f64) -> f64 {
    d.max(nu).powf(-beta)
}

/// Gain `|x|^{-alpha}` from the squared distance, with the common exponents unrolled.
#[inline]
pub(crate) fn data_gain_sq(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

/// Interference power at the typical BS after cancelling the `k` interfering
/// mobiles closest to the origin (ties by index).
pub fn interference_at_typical(r: &NetworkRealization, p: f64, k: usize, alpha: f64) -> f64 {
    p * unit_interference(&r.mobiles, k, alpha)
}

/// Interference from `mobiles[1..]` at unit transmit power.
pub(crate) fn unit_interference(mobiles: &[Point], k: usize, alpha: f64) -> f64 {
    let interferers = mobiles.len().saturating_sub(1);
    if k >= interferers {
        return 0.0;
    }
    // The k nearest interferers by (distance, index), kept sorted in a small buffer.
    let mut cancelled: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, m) in mobiles.iter().enumerate().skip(1).filter(|_| k > 0) {
        let key = (m.norm_sq(), i);
        if cancelled.len() == k && !ranks_before(key, cancelled[k - 1]) {
            continue;
        }
        let at = cancelled.partition_point(|&e| ranks_before(e, key));
        cancelled.insert(at, key);
        cancelled.truncate(k);
    }
    let mut skip: Vec<usize> = cancelled.iter().map(|e| e.1).collect();
    skip.sort_unstable();
    // Sum in index order so the result does not depend on how the k were found.
    let mut next_skip = skip.iter().peekable();
    let mut total = 0.0;
    for (i, m) in mobiles.iter().enumerate().skip(1) {
        if next_skip.peek() == Some(&&i) {
            next_skip.next();
            continue;
        }
        total += data_gain_sq(m.norm_sq(), alpha);
    }
    total
}

#[inline]
fn ranks_before(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// SINR of the typical uplink.
pub fn typical_sinr(r: &NetworkRealization, p: f64, sigma2: f64, k: usize, alpha: f64) -> f64 {
    let signal = p * data_gain_sq(r.typical_mobile().norm_sq(), alpha);
    let noise = interference_at_typical(r, p, k, alpha) + sigma2;
    if noise == 0.0 {
        if signal > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        signal / noise
    }
}

/// Sum of cutoff gains from `beacons` at `receiver`, and the gain of the nearest one.
pub(crate) fn beacon_gains(receiver: Point, beacons: &[Point], beta: f64, nu: f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut nearest_d2 = f64::INFINITY;
    for t in beacons {
        let d2 = t.dist_sq(receiver);
        total += mpt_path_gain(d2.sqrt(), beta, nu);
        if d2 < nearest_d2 {
            nearest_d2 = d2;
        }
    }
    let nearest = if beacons.is_empty() {
        0.0
    } else {
        mpt_path_gain(nearest_d2.sqrt(), beta, nu)
    };
    (total, nearest)
}

/// Raw power at the typical mobile when every beacon radiates isotropically.
pub fn raw_power_isotropic(r: &NetworkRealization, q: f64, beta: f64, nu: f64) -> f64 {
    q * beacon_gains(r.typical_mobile(), &r.pb_points, beta, nu).0
}

/// Raw power at the typical mobile when its nearest beacon points the main lobe at it
/// and all others reach it through side lobes.
pub fn raw_power_directed(r: &NetworkRealization, q: f64, z_m: f64, z_s: f64, beta: f64, nu: f64) -> Result<f64> {
    let t0 = r.nearest_pb_of_typical.ok_or(Error::NoBeacon)?;
    let u0 = r.typical_mobile();
    let (total, _) = beacon_gains(u0, &r.pb_points, beta, nu);
    let main = mpt_path_gain(r.pb_points[t0].dist(u0), beta, nu);
    Ok(directed_combine(q, z_m, z_s, total, main))
}

/// `q z_m g_0 + q z_s sum_{T != T_0} g_T`, written as `q (z_s G + (z_m - z_s) g_0)` so that
/// equal gains reproduce the isotropic value bit for bit.
#[inline]
pub(crate) fn directed_combine(q: f64, z_m: f64, z_s: f64, total_gain: f64, main_gain: f64) -> f64 {
    q * (z_s * total_gain + (z_m - z_s) * main_gain)
}
